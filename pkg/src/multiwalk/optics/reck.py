"""Triangular (Reck-style) decomposition of a unitary into two-mode blocks."""

from __future__ import annotations

import numpy as np

from ..errors import ValidationError
from .network import BeamSplitter, OpticalNetwork, Phase

RECK_ATOL = 1e-10


def reck_decompose(u: np.ndarray) -> OpticalNetwork:
    """Network of at most ``k(k-1)/2`` beamsplitters and ``k`` phases whose
    mode map is ``u``.

    Entries below the diagonal are nulled column by column, bottom row first,
    with nearest-neighbour rotations ``G`` so that ``G_L ... G_1 u = D``.
    The network applies ``D`` first and then the inverse rotations in reverse
    order, which forms the usual triangular mesh.
    """
    u = np.array(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] == 0:
        raise ValidationError(f"expected a non-empty square matrix, got shape {u.shape}")
    k = u.shape[0]
    if not np.allclose(u @ u.conj().T, np.eye(k), rtol=0, atol=RECK_ATOL):
        raise ValidationError("matrix is not unitary")

    rotations = []
    work = u.copy()
    for col in range(k - 1):
        for row in range(k - 1, col, -1):
            b = work[row, col]
            if b == 0:
                continue
            a = work[row - 1, col]
            r = np.hypot(abs(a), abs(b))
            g = np.array([[np.conj(a), np.conj(b)], [-b, a]]) / r
            work[[row - 1, row], :] = g @ work[[row - 1, row], :]
            work[row, col] = 0
            rotations.append((row - 1, row, g))

    elements = [Phase(m, float(np.angle(work[m, m]))) for m in range(k)]
    for i, j, g in reversed(rotations):
        elements.append(BeamSplitter(i, j, g.conj().T))
    return OpticalNetwork(k, tuple(elements))
