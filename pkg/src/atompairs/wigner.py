"""Small angular-momentum helpers: spin matrices and Wigner 3-j symbols.

Only low spins appear here (J <= 3/2, I <= 5/2), so the explicit Racah sum
is fast and accurate enough.
"""

from __future__ import annotations

from math import factorial, sqrt

import numpy as np


def spin_matrices(j: float):
    """Return (jx, jy, jz) for spin j in the basis m = -j..j (ascending)."""
    dim = round(2 * j + 1)
    m = -j + np.arange(dim)
    jz = np.diag(m)
    # <m+1| J+ |m> = sqrt(j(j+1) - m(m+1))
    raise_elems = np.sqrt(j * (j + 1) - m[:-1] * (m[:-1] + 1))
    jp = np.zeros((dim, dim))
    jp[np.arange(1, dim), np.arange(dim - 1)] = raise_elems
    jm = jp.T
    jx = 0.5 * (jp + jm)
    jy = -0.5j * (jp - jm)
    return jx, jy, jz.astype(float)


def _triangle_ok(j1, j2, j3):
    return abs(j1 - j2) <= j3 <= j1 + j2


def _is_half_int(x):
    return abs(2 * x - round(2 * x)) < 1e-9


def wigner_3j(j1, m1, j2, m2, j3, m3) -> float:
    """Wigner 3-j symbol by the Racah formula (exact for the small j used)."""
    for val in (j1, m1, j2, m2, j3, m3):
        if not _is_half_int(val):
            raise ValueError("non half-integer argument to wigner_3j")
    if abs(m1 + m2 + m3) > 1e-9:
        return 0.0
    if not _triangle_ok(j1, j2, j3):
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0

    def f(x):
        n = round(x)
        if n < 0:
            raise ValueError("negative factorial")
        return factorial(n)

    prefac = sqrt(
        f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3) / f(j1 + j2 + j3 + 1)
    )
    prefac *= sqrt(
        f(j1 + m1) * f(j1 - m1) * f(j2 + m2) * f(j2 - m2) * f(j3 + m3) * f(j3 - m3)
    )
    kmin = round(max(0, j2 - j3 - m1, j1 - j3 + m2))
    kmax = round(min(j1 + j2 - j3, j1 - m1, j2 + m2))
    total = 0.0
    for k in range(kmin, kmax + 1):
        total += (-1) ** k / (
            f(k)
            * f(j1 + j2 - j3 - k)
            * f(j1 - m1 - k)
            * f(j2 + m2 - k)
            * f(j3 - j2 + m1 + k)
            * f(j3 - j1 - m2 + k)
        )
    return ((-1) ** round(j1 - j2 - m3)) * prefac * total
