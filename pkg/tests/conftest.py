"""Shared test helpers: independent oracles and small utilities."""

import cmath

import numpy as np
import pytest


def dft2d_quadruple_loop(x):
    """Straight-from-definition 2D DFT: four nested Python loops.

    Written independently of the package's transform code; keep it free of
    numpy FFT calls and of any package imports.
    """
    n = len(x)
    out = [[0j] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            acc = 0j
            for u in range(n):
                for v in range(n):
                    acc += complex(x[u][v]) * cmath.exp(-2j * cmath.pi * (i * u + j * v) / n)
            out[i][j] = acc
    return np.array(out)


def relerr_frobenius(a, b):
    denom = np.linalg.norm(b)
    return np.linalg.norm(np.asarray(a) - np.asarray(b)) / denom if denom else np.linalg.norm(a - b)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
