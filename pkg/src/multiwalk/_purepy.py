"""Pure-Python versions of the hot kernels.

These are the reference implementations; ``_core.pyx`` mirrors them line for
line with C types.  Both take and return the same objects.
"""

from itertools import product
from math import factorial, sqrt

import numpy as np

MAX_BOSONS = 16

_SQRT_FACT = [sqrt(factorial(k)) for k in range(MAX_BOSONS + 1)]


def _multiplicity_norm(key):
    # prod_m sqrt(n_m!) for a sorted mode tuple
    norm = 1.0
    run = 1
    for i in range(1, len(key)):
        if key[i] == key[i - 1]:
            run += 1
        else:
            norm *= _SQRT_FACT[run]
            run = 1
    if key:
        norm *= _SQRT_FACT[run]
    return norm


def apply_linear(terms, indptr, indices, data, prune):
    """Push every creation operator of every term through a sparse mode map.

    ``indptr``/``indices``/``data`` hold the map in CSC layout: column ``m``
    lists the images of mode ``m``.  Keys are sorted mode-index tuples and
    amplitudes refer to normalised Fock basis states.
    """
    out = {}
    columns = {}
    for key, amp in terms.items():
        if len(key) > MAX_BOSONS:
            raise ValueError(f"at most {MAX_BOSONS} bosons per term")
        cols = []
        for m in key:
            col = columns.get(m)
            if col is None:
                lo, hi = indptr[m], indptr[m + 1]
                col = list(zip(indices[lo:hi].tolist(), data[lo:hi].tolist()))
                columns[m] = col
            cols.append(col)
        coeff = amp / _multiplicity_norm(key)
        for choice in product(*cols):
            value = coeff
            rows = []
            for row, c in choice:
                value *= c
                rows.append(row)
            rows.sort()
            new = tuple(rows)
            out[new] = out.get(new, 0j) + value * _multiplicity_norm(new)
    return {k: v for k, v in out.items() if abs(v) >= prune}


def permanent(a):
    """Ryser's formula, visiting column subsets in Gray-code order."""
    a = np.asarray(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("permanent needs a square matrix")
    if n == 0:
        return 1.0 + 0j
    row_sums = np.zeros(n, dtype=complex)
    total = 0j
    gray = 0
    for k in range(1, 1 << n):
        j = (k & -k).bit_length() - 1
        gray ^= 1 << j
        if gray >> j & 1:
            row_sums += a[:, j]
        else:
            row_sums -= a[:, j]
        prod = complex(np.prod(row_sums))
        if bin(gray).count("1") & 1:
            total -= prod
        else:
            total += prod
    return -total if n & 1 else total
