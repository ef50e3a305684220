"""Rebuild src/edm/data/mca_fixture.csv, the 99-student graded MCA dataset.

Only the first 24 students are published row by row; the rest are pinned
down by conditional class counts along every tree path, which is what the
groups below encode. Medium columns are filled to match the medium x
PG Grade cross tabulations; Category gets its 3 OBC students.

    python tools/build_mca_fixture.py
"""

import csv
import os
import random

HEADER = ["Category", "XII Med", "Mathematics Grade in XII", "XII Grade",
          "UGStream", "UGMed", "UG Grade", "PG Grade"]

# (XII Med, Math, XII, UGStream, UGMed, UG, PG), already graded
PUBLISHED = [
    ("Hindi", "F", "C", "BSC(IT)", "English", "B", "D"),
    ("English", "A", "B", "BSC(Math)", "English", "C", "A"),
    ("Hindi", "A", "B", "BSC(CS)", "English", "B", "B"),
    ("Hindi", "A", "B", "BSC(Math)", "English", "C", "A"),
    ("Hindi", "A", "A", "BSC(CS)", "Hindi", "C", "B"),
    ("English", "F", "A", "BCA", "English", "B", "C"),
    ("English", "F", "D", "BCA", "English", "C", "C"),
    ("English", "B", "B", "BSC(Math)", "English", "B", "A"),
    ("English", "C", "C", "BCA", "English", "B", "A"),
    ("English", "B", "B", "BCA", "English", "B", "A"),
    ("English", "F", "C", "BSC(IT)", "English", "B", "D"),
    ("Hindi", "C", "D", "BSC", "English", "C", "C"),
    ("English", "B", "B", "BCA", "English", "B", "C"),
    ("Hindi", "B", "B", "BCA", "English", "A", "C"),
    ("English", "B", "B", "BCA", "English", "C", "B"),
    ("Hindi", "B", "B", "BSC(CS)", "English", "B", "B"),
    ("English", "B", "B", "BSC", "English", "C", "C"),
    ("English", "B", "B", "BCA", "English", "B", "B"),
    ("Hindi", "F", "C", "BCA", "English", "B", "C"),
    ("English", "B", "C", "BSC(CS)", "Hindi", "C", "D"),
    ("English", "F", "C", "BCA", "English", "B", "C"),
    ("English", "B", "C", "BSC(Math)", "English", "C", "A"),
    ("English", "F", "C", "BSC(Biotech)", "English", "C", "C"),
    ("English", "F", "B", "BSC(PCM)", "English", "C", "A"),
]

# (Math, XII, UGStream, UG, PG) -> multiplicity, for all 99 students
ALL = {
    # BSC(Math): 23 A
    ("A", "B", "BSC(Math)", "C", "A"): 6,
    ("B", "B", "BSC(Math)", "B", "A"): 4,
    ("B", "C", "BSC(Math)", "C", "A"): 2,
    ("A", "B", "BSC(Math)", "B", "A"): 6,
    ("A", "B", "BSC(Math)", "A", "A"): 1,
    ("B", "B", "BSC(Math)", "C", "A"): 2,
    ("C", "C", "BSC(Math)", "B", "A"): 1,
    ("F", "C", "BSC(Math)", "C", "A"): 1,
    # BSC(PCM): 4 A
    ("F", "B", "BSC(PCM)", "C", "A"): 2,
    ("F", "B", "BSC(PCM)", "B", "A"): 1,
    ("F", "C", "BSC(PCM)", "C", "A"): 1,
    # BSC(IT): 2 D, BSC(Biotech): 1 C
    ("F", "C", "BSC(IT)", "B", "D"): 2,
    ("F", "C", "BSC(Biotech)", "C", "C"): 1,
    # BSC(CS): 10 B, 11 D
    ("B", "A", "BSC(CS)", "B", "B"): 1,
    ("B", "B", "BSC(CS)", "B", "B"): 1,
    ("B", "C", "BSC(CS)", "C", "D"): 1,
    ("F", "A", "BSC(CS)", "C", "D"): 4,
    ("F", "A", "BSC(CS)", "D", "D"): 6,
    ("C", "B", "BSC(CS)", "B", "B"): 1,
    ("A", "B", "BSC(CS)", "B", "B"): 3,
    ("A", "A", "BSC(CS)", "C", "B"): 1,
    ("A", "A", "BSC(CS)", "D", "B"): 1,
    ("A", "B", "BSC(CS)", "C", "B"): 1,
    ("A", "C", "BSC(CS)", "B", "B"): 1,
    # BCA: 7 A, 13 B, 13 C, 5 D
    ("A", "B", "BCA", "B", "B"): 1,
    ("B", "B", "BCA", "A", "C"): 1,
    ("B", "B", "BCA", "B", "A"): 6,
    ("B", "B", "BCA", "B", "B"): 8,
    ("B", "B", "BCA", "B", "C"): 1,
    ("B", "B", "BCA", "C", "B"): 1,
    ("C", "C", "BCA", "B", "A"): 1,
    ("C", "C", "BCA", "B", "B"): 3,
    ("C", "C", "BCA", "C", "C"): 1,
    ("C", "D", "BCA", "C", "D"): 1,
    ("D", "B", "BCA", "C", "C"): 1,
    ("D", "D", "BCA", "C", "D"): 1,
    ("D", "D", "BCA", "D", "D"): 2,
    ("F", "A", "BCA", "B", "C"): 1,
    ("F", "A", "BCA", "C", "C"): 1,
    ("F", "A", "BCA", "C", "D"): 1,
    ("F", "C", "BCA", "B", "C"): 2,
    ("F", "D", "BCA", "C", "C"): 3,
    ("F", "D", "BCA", "D", "C"): 1,
    ("F", "E", "BCA", "C", "C"): 1,
    # BSC: 5 C, 5 D
    ("F", "A", "BSC", "C", "C"): 1,
    ("B", "B", "BSC", "C", "C"): 1,
    ("C", "C", "BSC", "C", "D"): 3,
    ("F", "C", "BSC", "C", "C"): 2,
    ("F", "C", "BSC", "C", "D"): 1,
    ("C", "D", "BSC", "C", "C"): 1,
    ("F", "D", "BSC", "C", "D"): 1,
}

# PG Grade -> count per medium over all 99 students
XII_MED = {"English": {"A": 16, "B": 16, "C": 8, "D": 14},
           "Hindi": {"A": 18, "B": 7, "C": 11, "D": 9}}
UG_MED = {"English": {"A": 27, "B": 18, "C": 18, "D": 20},
          "Hindi": {"A": 7, "B": 5, "C": 1, "D": 3}}
OBC = 3


def build(seed=2014):
    rng = random.Random(seed)
    remaining = dict(ALL)
    xii_left = {m: dict(c) for m, c in XII_MED.items()}
    ug_left = {m: dict(c) for m, c in UG_MED.items()}
    rows = []
    for xmed, m, x, s, umed, u, pg in PUBLISHED:
        key = (m, x, s, u, pg)
        assert remaining.get(key, 0) > 0, key
        remaining[key] -= 1
        xii_left[xmed][pg] -= 1
        ug_left[umed][pg] -= 1
        rows.append(["GEN", xmed, m, x, s, umed, u, pg])

    rest = [k for k, n in remaining.items() for _ in range(n)]
    rng.shuffle(rest)
    pools = {}
    for pg in "ABCD":
        xm = [m for m in XII_MED for _ in range(xii_left[m][pg])]
        um = [m for m in UG_MED for _ in range(ug_left[m][pg])]
        rng.shuffle(xm)
        rng.shuffle(um)
        pools[pg] = (xm, um)
    obc = set(rng.sample(range(len(rest)), OBC))
    for n, (m, x, s, u, pg) in enumerate(rest):
        xm, um = pools[pg]
        rows.append(["OBC" if n in obc else "GEN", xm.pop(), m, x, s, um.pop(), u, pg])
    assert len(rows) == 99
    assert all(not xm and not um for xm, um in pools.values())
    return rows


def main():
    here = os.path.dirname(os.path.abspath(__file__))
    path = os.path.join(here, "..", "src", "edm", "data", "mca_fixture.csv")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HEADER)
        w.writerows(build())
    print(os.path.normpath(path))


if __name__ == "__main__":
    main()
