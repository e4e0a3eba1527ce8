"""Published reference data for conv(F4) and conv(H4).

Matrices are given as strings in the scalar grammar so they can be parsed in
either field context.  Histograms map a key (incidence ``p`` or stabilizer
size ``s``) to the number of orbits.
"""

from __future__ import annotations

from .linalg import as_matrix
from .scalar import qe_parse

F4_ORBIT_COUNT = 2
F4_TOTAL_FACETS = 55872
F4_STABILIZERS = (4608, 48)
F4_INCIDENCE = 288

F4_ORBIT1 = [
    "0 0 0 0",
    "0 0 0 0",
    "0 0 0 0",
    "1 0 0 -1",
]

F4_ORBIT2 = [
    "1/4 0 1/4 0",
    "0 1/4 0 -1/4",
    "0 1/4 0 1/4",
    "1/4 0 1/4 -1/2",
]

H4_COUNTEREXAMPLE = [
    "-3/2+1/2*sqrt(5) -11/4+5/4*sqrt(5) -7/4+3/4*sqrt(5) 1-1/2*sqrt(5)",
    "0 -1/2 3/4-1/4*sqrt(5) 1/4-1/4*sqrt(5)",
    "0 -1/4+1/4*sqrt(5) 1-1/2*sqrt(5) 3/4-1/4*sqrt(5)",
    "0 0 0 0",
]
H4_COUNTEREXAMPLE_INCIDENCE = 120
H4_COUNTEREXAMPLE_STABILIZER = 120

H4_ORBIT_COUNT = 1063
H4_TOTAL_FACETS = 188455824000

H4_INCIDENCE_TABLE = {
    16: 376, 17: 282, 18: 116, 19: 85, 20: 48, 21: 30, 22: 12, 23: 5,
    24: 44, 25: 3, 26: 31, 28: 10, 30: 7, 32: 5, 36: 4, 38: 1,
    48: 1, 100: 1, 120: 1, 480: 1,
}

H4_STABILIZER_TABLE = {
    1: 800, 2: 189, 4: 50, 6: 1, 8: 8, 12: 4, 16: 3, 24: 1,
    36: 1, 40: 1, 48: 2, 120: 1, 576: 1, 2880: 1,
}

# read as {rank: orbits}; the source lists 1, 4, 130, 928 for ranks 1..4
H4_RANK_HISTOGRAM = {1: 1, 2: 4, 3: 130, 4: 928}


def matrix(rows, d=None):
    """Parse a list of row strings into a field matrix."""
    return as_matrix([[qe_parse(x, d) for x in r.split()] for r in rows], d)


def matrix_text(rows) -> str:
    return "\n".join(rows) + "\n"
