"""Command line front end: ``edm <subcommand> [options]``.

Exit codes: 0 success, 1 invalid arguments or domain error, 2 I/O error
(unreadable or malformed input), 3 schema or model mismatch.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from . import apriori as ap
from . import evaluation as ev
from . import placement as pl
from . import stats as st
from .dataset import dump_csv, load_csv, load_csv_as
from .errors import (EDMError, EmptyInput, ModelFormatError, ParseError, SchemaError)
from .id3 import build_tree, load_model, render_text, save_model
from .preprocess import default_pipeline, load_pipeline_config, run_pipeline, select_top_k

EXIT_OK, EXIT_DOMAIN, EXIT_IO, EXIT_SCHEMA = 0, 1, 2, 3

BUILTIN_PIPELINES = {"default": "pipeline_default.json", "percent-bands": "pipeline_percent_bands.json"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _color(text: str, stream) -> str:
    """Bold section headings when writing to a terminal, unless EDM_NO_COLOR is set."""
    if os.environ.get("EDM_NO_COLOR") is not None or not getattr(stream, "isatty", lambda: False)():
        return text
    return "\n".join(f"\033[1m{line}\033[0m" if line.startswith("===") else line for line in text.split("\n"))


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(_color(text, sys.stdout))


def _need_file(path: str, what: str = "input") -> str:
    if not os.path.exists(path):
        raise FileNotFoundError(f"{what} not found: {path}")
    return path


def _load(args):
    ds = load_csv(_need_file(args.input), class_column=None)
    key = args.class_name if args.class_name is not None else len(ds.schema) - 1
    return ds.with_class(key)


def _select(ds, args):
    if getattr(args, "attributes", None):
        names = [n.strip() for n in args.attributes.split(",") if n.strip()]
        ds = ds.project(names)
    if getattr(args, "select_top", None):
        ds = select_top_k(ds, args.select_top)
    return ds


def cmd_preprocess(args) -> int:
    ds = load_csv(_need_file(args.input))
    if args.pipeline in BUILTIN_PIPELINES:
        config = default_pipeline(BUILTIN_PIPELINES[args.pipeline])
    else:
        config = load_pipeline_config(_need_file(args.pipeline, "pipeline config"))
    out, summaries = run_pipeline(ds, config)
    _emit(dump_csv(out), args.output)
    for s in summaries:
        print(s.describe(), file=sys.stderr)
    return EXIT_OK


def cmd_train(args) -> int:
    ds = _select(_load(args), args)
    tree = build_tree(ds)
    if args.model:
        save_model(tree, args.model)
    _emit(render_text(tree), args.output)
    return EXIT_OK


def _report(report, args) -> None:
    text = ev.report_json(report) if args.format == "structured" else ev.render_report(report)
    _emit(text, args.output)


def cmd_eval(args) -> int:
    if args.model:
        tree = load_model(_need_file(args.model, "model"))
        ds = load_csv_as(_need_file(args.input), tree.schema)
        report = ev.evaluate_training(ds, tree, mode=args.mode)
    else:
        ds = _select(_load(args), args)
        report = ev.evaluate_training(ds, build_tree(ds))
    _report(report, args)
    return EXIT_OK


def cmd_crossval(args) -> int:
    ds = _select(_load(args), args)
    _report(ev.cross_validate(ds, args.folds, args.seed), args)
    return EXIT_OK


def cmd_predict(args) -> int:
    tree = load_model(_need_file(args.model, "model"))
    test = load_csv_as(_need_file(args.test, "test file"), tree.schema)
    rows = ev.predict_file(tree, test)
    if args.format == "structured":
        text = json.dumps([{"index": n, "actual": a, "predicted": p} for n, a, p in rows], indent=2) + "\n"
    else:
        text = ev.render_predictions(rows)
    _emit(text, args.output)
    return EXIT_OK


def cmd_apriori(args) -> int:
    db = ap.load_db(_need_file(args.input))
    threshold = args.min_support_count
    if args.min_support is not None:
        total = len(db.transactions) if isinstance(db, ap.TransactionDB) else db.total_pair_count
        threshold = ap.support_count_threshold(args.min_support, total)
    trace = ap.apriori_trace(db, threshold)
    levels = [list(s.frequent) for s in trace if s.frequent]
    rules = ap.mine_rules(levels, db, args.min_confidence)
    if args.format == "structured":
        text = ap.result_document(trace, rules, threshold, args.min_confidence)
    else:
        parts = [ap.render_levels(trace, threshold)]
        if args.relations:
            parts.append("Relations:\n" + ap.render_relations(ap.relation_table(db)))
        parts.append(f"Rules with confidence >= {args.min_confidence:g}:\n" + ap.render_rules(rules))
        text = "\n".join(parts)
    _emit(text, args.output)
    return EXIT_OK


def _encoding(spec: str | None, ds, columns):
    if spec is None or spec == "grades":
        return None
    if spec == "alphabetical":
        values = [v for c in columns for v in ds.column(c)]
        return dict(st.GRADE_ENCODING, **st.alphabetical_encoding(
            [v for v in values if v not in st.GRADE_ENCODING]))
    if os.path.exists(spec):
        with open(spec, encoding="utf-8") as fh:
            return {k: float(v) for k, v in json.load(fh).items()}
    return dict(st.GRADE_ENCODING, **st.parse_encoding(spec))


def cmd_correlate(args) -> int:
    ds = load_csv(_need_file(args.input))
    mapping = _encoding(args.encoding, ds, (args.x, args.y))
    result = st.correlate_columns(ds, args.x, args.y, mapping)
    used = st.GRADE_ENCODING if mapping is None else mapping
    if args.format == "structured":
        text = st.correlation_document(args.x, args.y, result, used)
    else:
        enc = ", ".join(f"{k}={v:g}" for k, v in used.items())
        text = st.render_correlation(args.x, args.y, result) + f"\nEncoding: {enc}\n"
    _emit(text, args.output)
    return EXIT_OK


def cmd_crosstab(args) -> int:
    ds = load_csv(_need_file(args.input))
    row_order = col_order = None
    if args.sort:
        row_order = sorted(ds.schema[args.rows].domain)
        col_order = sorted(ds.schema[args.columns].domain)
    tab = st.crosstab(ds, args.rows, args.columns, row_order, col_order)
    text = json.dumps(tab.to_dict(), indent=2) + "\n" if args.format == "structured" else st.render_crosstab(tab)
    _emit(text, args.output)
    return EXIT_OK


def cmd_placement(args) -> int:
    book = pl.load_rulebook(_need_file(args.rules, "rule book")) if args.rules else pl.default_rulebook()
    bands = [pl.band(p) for p in (args.tenth, args.twelfth, args.btech)]
    grade = pl.classify_placement(*bands, book=book)
    if args.format == "structured":
        text = json.dumps({"bands": [str(b) for b in bands], "grade": grade}, indent=2) + "\n"
    else:
        text = " ".join(str(b) for b in bands) + f" → {grade}\n"
    _emit(text, args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="edm", description="Decision trees, Apriori and correlation for student data.")
    p.add_argument("--version", action="version", version=f"edm {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp, output=True, fmt=True):
        if output:
            sp.add_argument("--output", "-o", help="write here instead of stdout")
        if fmt:
            sp.add_argument("--format", choices=("text", "structured"), default="text")

    def data(sp):
        sp.add_argument("--input", "-i", required=True, help="CSV file with a header row")
        sp.add_argument("--class", dest="class_name", help="class attribute (default: last column)")
        sp.add_argument("--attributes", help="comma-separated predictors to keep")
        sp.add_argument("--select-top", type=int, metavar="K", help="keep the K predictors with the highest gain")

    sp = sub.add_parser("preprocess", help="turn raw percentages into grades")
    sp.add_argument("--input", "-i", required=True)
    sp.add_argument("--pipeline", default="default",
                    help="pipeline JSON file, or one of: " + ", ".join(BUILTIN_PIPELINES))
    common(sp, fmt=False)
    sp.set_defaults(func=cmd_preprocess)

    sp = sub.add_parser("train", help="grow an ID3 tree and print it")
    data(sp)
    sp.add_argument("--model", "-m", help="save the model document here")
    common(sp, fmt=False)
    sp.set_defaults(func=cmd_train)

    sp = sub.add_parser("eval", help="evaluate a model (or a fresh tree) on a dataset")
    data(sp)
    sp.add_argument("--model", "-m", help="saved model; without it a tree is trained on --input")
    sp.add_argument("--mode", default="training set", choices=("training set", "supplied test set"),
                    help="report heading when --model is given")
    common(sp)
    sp.set_defaults(func=cmd_eval)

    sp = sub.add_parser("crossval", help="stratified k-fold cross-validation")
    data(sp)
    sp.add_argument("--folds", "-k", type=int, default=10)
    sp.add_argument("--seed", type=int, default=0)
    common(sp)
    sp.set_defaults(func=cmd_crossval)

    sp = sub.add_parser("predict", help="classify a test file with a saved model")
    sp.add_argument("--model", "-m", required=True)
    sp.add_argument("--test", "-t", required=True)
    common(sp)
    sp.set_defaults(func=cmd_predict)

    sp = sub.add_parser("apriori", help="frequent itemsets and association rules")
    sp.add_argument("--input", "-i", required=True, help="itemset,count file or one transaction per line")
    sp.add_argument("--min-support-count", type=int, default=5)
    sp.add_argument("--min-support", type=float, help="fraction; overrides --min-support-count")
    sp.add_argument("--min-confidence", type=float, default=0.5)
    sp.add_argument("--relations", action="store_true", help="also list every item pair's measures")
    common(sp)
    sp.set_defaults(func=cmd_apriori)

    sp = sub.add_parser("correlate", help="Pearson correlation between two columns")
    sp.add_argument("--input", "-i", required=True)
    sp.add_argument("--x", required=True)
    sp.add_argument("--y", required=True)
    sp.add_argument("--encoding", help="'grades' (F=0, E=1 .. A=5, default), 'alphabetical', "
                    "'label=n,...' or a JSON file")
    common(sp)
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("crosstab", help="cross-tabulate two nominal columns")
    sp.add_argument("--input", "-i", required=True)
    sp.add_argument("--rows", required=True)
    sp.add_argument("--columns", required=True)
    sp.add_argument("--sort", action="store_true", help="sort labels instead of first-appearance order")
    common(sp)
    sp.set_defaults(func=cmd_crosstab)

    sp = sub.add_parser("placement", help="placement grade from 10th, 12th and B.Tech percentages",
                        description="Bands: First > 60, Second > 45, Third > 35. A percentage exactly "
                        "on a boundary takes the lower band (60 is Second, 45 is Third).")
    sp.add_argument("tenth", type=float)
    sp.add_argument("twelfth", type=float)
    sp.add_argument("btech", type=float)
    sp.add_argument("--rules", help="rule book file (b10,b12,btech,grade per line)")
    common(sp)
    sp.set_defaults(func=cmd_placement)
    return p


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (SchemaError, ModelFormatError)):
        return EXIT_SCHEMA
    if isinstance(exc, (OSError, ParseError, EmptyInput, UnicodeDecodeError)):
        return EXIT_IO
    return EXIT_DOMAIN


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="edm: warning: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"{exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except FileNotFoundError as exc:
        msg = exc.args[0] if len(exc.args) == 1 else f"input not found: {exc.filename}"
        print(f"edm: error: {msg}", file=sys.stderr)
        return EXIT_IO
    except (EDMError, OSError, UnicodeDecodeError) as exc:
        print(f"edm: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
