"""Reference transition matrices on G1 (8 nodes) and G2 (5 nodes).

Index 1 is Metropolis, 2 its Peskun-dominating modification, 3 the fastest
mixing chain. Matrices 2 and 3 on G1, and 3 on G2, are printed to two
decimals, so they are only approximately stochastic.
"""
from fractions import Fraction as Fr

import numpy as np


def _rat(rows):
    return np.array([[float(Fr(x)) for x in row.split()] for row in rows])


P1_G1 = _rat([
    "1/12 1/3 1/4 0 0 1/3 0 0",
    "1/3 1/6 0 0 1/2 0 0 0",
    "1/4 0 0 1/4 0 1/4 1/4 0",
    "0 0 1/4 1/12 1/3 0 0 1/3",
    "0 1/2 0 1/3 1/6 0 0 0",
    "1/3 0 1/4 0 0 5/12 0 0",
    "0 0 1/4 0 0 0 1/4 1/2",
    "0 0 0 1/3 0 0 1/2 1/6",
])

P2_G1 = np.array([
    [0, 0.35, 0.25, 0, 0, 0.4, 0, 0],
    [0.35, 0.02, 0, 0, 0.63, 0, 0, 0],
    [0.25, 0, 0, 0.25, 0, 0.25, 0.25, 0],
    [0, 0, 0.25, 0, 0.37, 0, 0, 0.38],
    [0, 0.63, 0, 0.37, 0, 0, 0, 0],
    [0.4, 0, 0.25, 0, 0, 0.35, 0, 0],
    [0, 0, 0.25, 0, 0, 0, 0.13, 0.62],
    [0, 0, 0, 0.38, 0, 0, 0.62, 0],
])

P3_G1 = np.array([
    [0.13, 0.42, 0.17, 0, 0, 0.28, 0, 0],
    [0.42, 0.1, 0, 0, 0.48, 0, 0, 0],
    [0.17, 0, 0, 0.06, 0, 0.32, 0.45, 0],
    [0, 0, 0.06, 0.14, 0.46, 0, 0, 0.34],
    [0, 0.48, 0, 0.46, 0.06, 0, 0, 0],
    [0.28, 0, 0.32, 0, 0, 0.4, 0, 0],
    [0, 0, 0.45, 0, 0, 0, 0.09, 0.46],
    [0, 0, 0, 0.34, 0, 0, 0.46, 0.2],
])

P1_G2 = _rat([
    "0 1/4 1/4 1/4 1/4",
    "1/4 1/6 0 1/4 1/3",
    "1/4 0 1/2 1/4 0",
    "1/4 1/4 1/4 0 1/4",
    "1/4 1/3 0 1/4 1/6",
])

P2_G2 = _rat([
    "0 1/4 1/4 1/4 1/4",
    "1/4 0 0 1/4 1/2",
    "1/4 0 1/2 1/4 0",
    "1/4 1/4 1/4 0 1/4",
    "1/4 1/2 0 1/4 0",
])

P3_G2 = np.array([
    [0.09, 0.25, 0.33, 0.08, 0.25],
    [0.25, 0.25, 0, 0.25, 0.25],
    [0.33, 0, 0.34, 0.33, 0],
    [0.08, 0.25, 0.33, 0.09, 0.25],
    [0.25, 0.25, 0, 0.25, 0.25],
])

# Reference SLEMs, in the order MHRW, Modified-MHRW, FMMC.
SLEM_TABLE = {
    "G1": (0.761, 0.868, 0.712),
    "G2": (0.500, 0.500, 0.408),
}

MATRICES = {
    ("G1", "mhrw"): P1_G1, ("G1", "mhrw_modified"): P2_G1, ("G1", "fmmc"): P3_G1,
    ("G2", "mhrw"): P1_G2, ("G2", "mhrw_modified"): P2_G2, ("G2", "fmmc"): P3_G2,
}
