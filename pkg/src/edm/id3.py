"""ID3 decision trees over nominal attributes.

Induction follows the classic recipe with two rules that matter for
reproducing hand-derived trees:

* when several attributes share the best gain at a node, the one with the
  larger gain on the *whole* training set wins, then the earlier one in the
  schema;
* a node whose best gain is zero becomes a majority leaf instead of being
  split (an attribute that separates nothing would only add null branches).

Labels that never occur at a node become null leaves; routing an instance
into one yields no prediction (``None``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

from .dataset import NOMINAL, NUMERIC, Attribute, ClassDistribution, Dataset, Schema
from .errors import (
    ArgumentError,
    AttributeKindError,
    EmptyTrainingSet,
    MissingClassError,
    MissingValueError,
    ModelFormatError,
    SchemaError,
)

MODEL_FORMAT = "edm.id3"
MODEL_VERSION = 1

# gains at or below this are treated as "no split"
ZERO_GAIN = 1e-12


@dataclass(frozen=True)
class Leaf:
    label: str
    support: tuple | None = None  # class counts in class-domain order


@dataclass(frozen=True)
class NullLeaf:
    pass


@dataclass(frozen=True)
class Internal:
    attribute: str
    branches: dict = field(default_factory=dict)  # label -> node, domain order


TreeNode = Union[Internal, Leaf, NullLeaf]


@dataclass(frozen=True)
class DecisionTree:
    schema: Schema
    root: TreeNode
    trained_on: int
    root_gains: dict


def entropy(dist) -> float:
    """Shannon entropy in bits of a ClassDistribution or a sequence of counts."""
    counts = dist.counts if isinstance(dist, ClassDistribution) else tuple(dist)
    total = sum(counts)
    if total <= 0:
        return 0.0
    h = 0.0
    for c in counts:
        if c > 0:
            p = c / total
            h -= p * math.log2(p)
    return h


def split_gain(partitions: Sequence[Sequence[int]]) -> float:
    """Information gain of a split given per-branch class counts.

    Branches are summed left to right; identical splits therefore produce
    bit-identical gains, which keeps tie detection deterministic.
    """
    parts = [tuple(p) for p in partitions]
    if not parts:
        return 0.0
    width = max(len(p) for p in parts)
    parts = [p + (0,) * (width - len(p)) for p in parts]
    parent = [sum(col) for col in zip(*parts)]
    n = sum(parent)
    if n == 0:
        return 0.0
    remainder = 0.0
    for p in parts:
        size = sum(p)
        if size:
            remainder += size / n * entropy(p)
    return entropy(parent) - remainder


def _class_counts(rows, ci: int, labels: Sequence[str]) -> list[int]:
    pos = {label: k for k, label in enumerate(labels)}
    counts = [0] * len(labels)
    for row in rows:
        counts[pos[row[ci]]] += 1
    return counts


def _split_counts(rows, ai: int, domain, ci: int, labels) -> list[list[int]]:
    apos = {label: k for k, label in enumerate(domain)}
    cpos = {label: k for k, label in enumerate(labels)}
    table = [[0] * len(labels) for _ in domain]
    for row in rows:
        table[apos[row[ai]]][cpos[row[ci]]] += 1
    return table


def _check_trainable(ds: Dataset, attributes=None):
    schema = ds.schema
    if schema.class_index is None:
        raise SchemaError("no class attribute set")
    ci = schema.class_index
    idx = schema.predictors() if attributes is None else attributes
    for i in idx:
        if not schema.attributes[i].is_nominal:
            raise AttributeKindError(f"attribute {schema.attributes[i].name!r} is numeric")
    for n, row in enumerate(ds.instances):
        if row[ci] is None:
            raise MissingClassError(f"instance {n} has a missing class value")
        for i in idx:
            if row[i] is None:
                raise MissingValueError(f"instance {n} is missing {schema.attributes[i].name!r}")


def information_gain(ds: Dataset, attribute) -> float:
    i = ds.schema.resolve(attribute)
    if i == ds.schema.class_index:
        raise ArgumentError("cannot measure the gain of the class attribute itself")
    _check_trainable(ds, [i])
    attr = ds.schema.attributes[i]
    ci = ds.schema.class_index
    return split_gain(_split_counts(ds.instances, i, attr.domain, ci, ds.schema.class_labels))


def build_tree(ds: Dataset) -> DecisionTree:
    if len(ds) == 0:
        raise EmptyTrainingSet("cannot train on an empty dataset")
    _check_trainable(ds)
    schema = ds.schema
    ci = schema.class_index
    labels = schema.class_labels
    predictors = schema.predictors()
    root_gains = {
        schema.attributes[i].name: split_gain(_split_counts(ds.instances, i, schema.attributes[i].domain, ci, labels))
        for i in predictors
    }

    def rank(i, gain):
        return (gain, root_gains[schema.attributes[i].name], -i)

    def grow(rows, available):
        counts = _class_counts(rows, ci, labels)
        dist = ClassDistribution(labels, tuple(counts))
        leaf = Leaf(dist.majority(), dist.counts)
        if sum(1 for c in counts if c) <= 1 or not available:
            return leaf
        scored = [
            (i, split_gain(_split_counts(rows, i, schema.attributes[i].domain, ci, labels))) for i in available
        ]
        best, gain = max(scored, key=lambda s: rank(*s))
        if gain <= ZERO_GAIN:
            return leaf
        attr = schema.attributes[best]
        rest = [i for i in available if i != best]
        branches = {}
        for label in attr.domain:
            sub = [row for row in rows if row[best] == label]
            branches[label] = grow(sub, rest) if sub else NullLeaf()
        return Internal(attr.name, branches)

    root = grow(list(ds.instances), predictors)
    return DecisionTree(schema, root, len(ds), root_gains)


def _leaf_for(tree: DecisionTree, inst: Sequence):
    node = tree.root
    while isinstance(node, Internal):
        value = inst[tree.schema.index(node.attribute)]
        node = node.branches.get(value)
        if node is None:
            return None
    return node if isinstance(node, Leaf) else None


def predict(tree: DecisionTree, inst: Sequence):
    """Class label for ``inst``, or None when it lands in a null branch or
    carries a value (or a missing value) the tree has no branch for."""
    leaf = _leaf_for(tree, inst)
    return None if leaf is None else leaf.label


def distribution_for(tree: DecisionTree, inst: Sequence):
    """Leaf class frequencies (unsmoothed) in class-domain order, or None."""
    leaf = _leaf_for(tree, inst)
    if leaf is None:
        return None
    labels = tree.schema.class_labels
    if not leaf.support or sum(leaf.support) == 0:
        return tuple(1.0 if label == leaf.label else 0.0 for label in labels)
    total = sum(leaf.support)
    return tuple(c / total for c in leaf.support)


# -- text rendering ---------------------------------------------------------


def render_text(tree) -> str:
    """Indented one-line-per-branch layout; each nesting level adds ``"| "``."""
    root = tree.root if isinstance(tree, DecisionTree) else tree
    if isinstance(root, Leaf):
        return root.label + "\n"
    if isinstance(root, NullLeaf):
        return "null\n"
    lines = []
    _render(root, 0, lines)
    return "\n".join(lines) + "\n"


def _render(node: Internal, depth: int, lines: list):
    for label, child in node.branches.items():
        head = "| " * depth + f"{node.attribute} = {label}"
        if isinstance(child, Internal):
            lines.append(head)
            _render(child, depth + 1, lines)
        elif isinstance(child, Leaf):
            lines.append(f"{head}: {child.label}")
        else:
            lines.append(f"{head}: null")


def parse_text(text: str) -> TreeNode:
    """Inverse of render_text. Leaves come back without support counts."""
    lines = [ln.rstrip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ModelFormatError("empty tree text")
    if len(lines) == 1 and " = " not in lines[0]:
        return NullLeaf() if lines[0] == "null" else Leaf(lines[0])
    parsed = []
    for ln in lines:
        depth = 0
        while ln.startswith("| ", 2 * depth):
            depth += 1
        body = ln[2 * depth:]
        if " = " not in body:
            raise ModelFormatError(f"cannot parse tree line {ln!r}")
        attribute, rest = body.split(" = ", 1)
        outcome = None
        if ": " in rest:
            rest, outcome = rest.rsplit(": ", 1)
        parsed.append((depth, attribute, rest, outcome))

    pos = 0

    def block(depth):
        nonlocal pos
        attribute = parsed[pos][1]
        branches = {}
        while pos < len(parsed) and parsed[pos][0] == depth:
            d, attr, label, outcome = parsed[pos]
            if attr != attribute:
                raise ModelFormatError(f"mixed attributes at depth {depth}: {attribute!r} and {attr!r}")
            pos += 1
            if outcome is None:
                if pos >= len(parsed) or parsed[pos][0] != depth + 1:
                    raise ModelFormatError(f"branch {attr} = {label} has no subtree")
                branches[label] = block(depth + 1)
            else:
                branches[label] = NullLeaf() if outcome == "null" else Leaf(outcome)
        return Internal(attribute, branches)

    root = block(0)
    if pos != len(parsed):
        raise ModelFormatError(f"unexpected indentation at line {pos + 1}")
    return root


def iter_paths(node: TreeNode, prefix=()) -> Iterator[tuple[tuple, str | None]]:
    """Yield (path, outcome) per leaf; path is ((attribute, label), ...), outcome None for null."""
    if isinstance(node, Internal):
        for label, child in node.branches.items():
            yield from iter_paths(child, prefix + ((node.attribute, label),))
    elif isinstance(node, Leaf):
        yield prefix, node.label
    else:
        yield prefix, None


def iter_internal(node: TreeNode, prefix=()) -> Iterator[tuple[tuple, Internal]]:
    if isinstance(node, Internal):
        yield prefix, node
        for label, child in node.branches.items():
            yield from iter_internal(child, prefix + ((node.attribute, label),))


# -- model documents --------------------------------------------------------


def _node_doc(node):
    if isinstance(node, Internal):
        return {"attribute": node.attribute, "branches": [[k, _node_doc(v)] for k, v in node.branches.items()]}
    if isinstance(node, Leaf):
        return {"class": node.label, "support": list(node.support) if node.support is not None else None}
    return {"null": True}


def serialize(tree: DecisionTree) -> str:
    doc = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "schema": {
            "attributes": [
                {"name": a.name, "kind": a.kind, "domain": list(a.domain)} for a in tree.schema.attributes
            ],
            "class_index": tree.schema.class_index,
        },
        "trained_on": tree.trained_on,
        "root_gains": tree.root_gains,
        "root": _node_doc(tree.root),
    }
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def _schema_from_doc(doc) -> Schema:
    try:
        attrs = [Attribute(a["name"], a["kind"], tuple(a.get("domain", ()))) for a in doc["attributes"]]
        schema = Schema(attrs, doc["class_index"])
    except (KeyError, TypeError, SchemaError) as exc:
        raise ModelFormatError(f"bad schema: {exc}") from None
    if schema.class_index is None:
        raise ModelFormatError("model schema has no class attribute")
    return schema


def _node_from_doc(doc, schema: Schema, used: frozenset) -> TreeNode:
    if not isinstance(doc, dict):
        raise ModelFormatError("tree node must be an object")
    if doc.get("null") is True:
        return NullLeaf()
    if "class" in doc:
        label = doc["class"]
        if label not in schema.class_labels:
            raise ModelFormatError(f"unknown class label {label!r}")
        support = doc.get("support")
        if support is not None:
            if (
                not isinstance(support, list)
                or len(support) != len(schema.class_labels)
                or not all(isinstance(c, int) and c >= 0 for c in support)
            ):
                raise ModelFormatError("leaf support must list one count per class")
            support = tuple(support)
        return Leaf(label, support)
    if "attribute" in doc:
        name = doc["attribute"]
        try:
            i = schema.index(name)
        except SchemaError:
            raise ModelFormatError(f"unknown attribute {name!r}") from None
        attr = schema.attributes[i]
        if i == schema.class_index or attr.kind != NOMINAL:
            raise ModelFormatError(f"cannot split on {name!r}")
        if name in used:
            raise ModelFormatError(f"attribute {name!r} repeats along a path")
        pairs = doc.get("branches")
        if not isinstance(pairs, list) or [p[0] for p in pairs if isinstance(p, list)] != list(attr.domain):
            raise ModelFormatError(f"branches of {name!r} must cover its domain in order")
        return Internal(name, {label: _node_from_doc(child, schema, used | {name}) for label, child in pairs})
    raise ModelFormatError("unrecognised tree node")


def deserialize(text: str) -> DecisionTree:
    try:
        doc = json.loads(text)
    except (json.JSONDecodeError, TypeError) as exc:
        raise ModelFormatError(f"model is not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError("not an edm ID3 model document")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(f"unsupported model version {doc.get('version')!r}")
    for key in ("schema", "trained_on", "root_gains", "root"):
        if key not in doc:
            raise ModelFormatError(f"model document lacks {key!r}")
    schema = _schema_from_doc(doc["schema"])
    gains = doc["root_gains"]
    if not isinstance(gains, dict) or not all(isinstance(v, (int, float)) for v in gains.values()):
        raise ModelFormatError("root_gains must map attribute names to numbers")
    for name in gains:
        if name not in schema.names:
            raise ModelFormatError(f"root gain for unknown attribute {name!r}")
    if not isinstance(doc["trained_on"], int) or doc["trained_on"] < 0:
        raise ModelFormatError("trained_on must be a non-negative integer")
    root = _node_from_doc(doc["root"], schema, frozenset())
    return DecisionTree(schema, root, doc["trained_on"], {k: float(v) for k, v in gains.items()})


def save_model(tree: DecisionTree, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize(tree))


def load_model(path) -> DecisionTree:
    with open(path, encoding="utf-8") as fh:
        return deserialize(fh.read())


__all__ = [
    "DecisionTree", "Internal", "Leaf", "NullLeaf", "TreeNode", "build_tree", "deserialize",
    "distribution_for", "entropy", "information_gain", "iter_internal", "iter_paths", "load_model",
    "parse_text", "predict", "render_text", "save_model", "serialize", "split_gain", "NUMERIC",
]
