"""Sparse bosonic Fock states over a fixed set of modes.

A basis state is keyed by the sorted tuple of its occupied mode indices, with
repetitions for multiply occupied modes: ``(2, 2, 5)`` is the occupation
vector with ``n_2 = 2, n_5 = 1``.  Amplitudes always refer to *normalised*
basis states ``prod_m (a_m^dag)^{n_m} / sqrt(n_m!) |0>``.

Linear maps follow the column convention: a mode unitary ``U`` sends
``a_c^dag -> sum_j U[j, c] a_j^dag``, so a single boson's amplitude vector
``psi`` becomes ``U @ psi``.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import dataclass
from math import factorial, sqrt

import numpy as np

from . import _backend
from .errors import CapExceededError, ValidationError

Key = tuple[int, ...]

PRUNE = 1e-14
UNITARY_ATOL = 1e-12
PERMANENT_CAP = 10


class FockState:
    """Immutable sparse superposition of n-boson basis states."""

    __slots__ = ("_terms", "mode_count", "n")

    def __init__(self, terms: Mapping[Key, complex], mode_count: int, *, _trusted: bool = False):
        if _trusted:
            self._terms = terms
        else:
            self._terms = {}
            for key, amp in terms.items():
                key = tuple(sorted(int(m) for m in key))
                if any(not 0 <= m < mode_count for m in key):
                    raise ValidationError(f"basis key {key} references a mode outside 0..{mode_count - 1}")
                self._terms[key] = self._terms.get(key, 0j) + complex(amp)
        self.mode_count = int(mode_count)
        lengths = {len(k) for k in self._terms}
        if len(lengths) > 1:
            raise ValidationError("all basis terms must carry the same number of bosons")
        self.n = lengths.pop() if lengths else 0

    @property
    def terms(self) -> Mapping[Key, complex]:
        return self._terms

    def __len__(self):
        return len(self._terms)

    def __getitem__(self, key: Iterable[int]) -> complex:
        return self._terms.get(tuple(sorted(key)), 0j)

    def __repr__(self):
        return f"FockState(n={self.n}, modes={self.mode_count}, terms={len(self._terms)})"

    def norm(self) -> float:
        return sqrt(sum(abs(a) ** 2 for a in self._terms.values()))

    def normalized(self) -> FockState:
        norm = self.norm()
        if norm == 0:
            raise ValidationError("cannot normalise the zero state")
        return FockState({k: a / norm for k, a in self._terms.items()}, self.mode_count, _trusted=True)

    def probabilities(self) -> dict[Key, float]:
        return {k: abs(a) ** 2 for k, a in self._terms.items()}

    def occupations(self) -> Iterable[tuple[np.ndarray, complex]]:
        for key, amp in self._terms.items():
            yield occupation_vector(key, self.mode_count), amp


def occupation_vector(key: Key, mode_count: int) -> np.ndarray:
    return np.bincount(np.asarray(key, dtype=np.int64), minlength=mode_count)


def key_from_occupation(counts: Sequence[int]) -> Key:
    counts = np.asarray(counts)
    if (counts < 0).any():
        raise ValidationError("occupation numbers must be non-negative")
    return tuple(int(m) for m in np.repeat(np.arange(len(counts)), counts))


def create(modes: Iterable[int], mode_count: int) -> FockState:
    """Basis state ``prod a_m^dag |0>`` normalised to unit norm."""
    key = tuple(sorted(int(m) for m in modes))
    for m in key:
        if not 0 <= m < mode_count:
            raise ValidationError(f"mode {m} outside 0..{mode_count - 1}")
    return FockState({key: 1.0 + 0j}, mode_count, _trusted=True)


def product_state(walkers: Sequence[Mapping[int, complex]], mode_count: int) -> FockState:
    """Normalised ``prod_w (sum_m psi_w[m] a_m^dag) |0>``."""
    raw: dict[Key, complex] = {(): 1.0 + 0j}
    for psi in walkers:
        nxt: dict[Key, complex] = {}
        for key, coeff in raw.items():
            for m, amp in psi.items():
                if not 0 <= m < mode_count:
                    raise ValidationError(f"mode {m} outside 0..{mode_count - 1}")
                new = tuple(sorted(key + (int(m),)))
                nxt[new] = nxt.get(new, 0j) + coeff * amp
        raw = nxt
    terms = {k: c * _sqrt_multiplicity(k) for k, c in raw.items() if c != 0}
    return FockState(terms, mode_count, _trusted=True).normalized()


def _sqrt_multiplicity(key: Key) -> float:
    return sqrt(float(np.prod([factorial(c) for c in np.unique(key, return_counts=True)[1]]))) if key else 1.0


@dataclass(frozen=True)
class ModeUnitary:
    """Unitary acting on the listed modes; identity elsewhere."""

    matrix: np.ndarray
    support: tuple[int, ...]

    def __post_init__(self):
        u = np.asarray(self.matrix, dtype=complex)
        support = tuple(int(m) for m in self.support)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] != len(support):
            raise ValidationError(f"matrix shape {u.shape} does not match support of size {len(support)}")
        if len(set(support)) != len(support):
            raise ValidationError("support modes must be distinct")
        if not np.allclose(u @ u.conj().T, np.eye(len(support)), rtol=0, atol=UNITARY_ATOL):
            raise ValidationError("matrix is not unitary")
        object.__setattr__(self, "matrix", u)
        object.__setattr__(self, "support", support)


class SparseModeMap:
    """Linear single-boson map in CSC form, ready for the expansion kernel."""

    __slots__ = ("indptr", "indices", "data", "mode_count")

    def __init__(self, columns: Sequence[Sequence[tuple[int, complex]]]):
        self.mode_count = len(columns)
        lengths = [len(c) for c in columns]
        self.indptr = np.concatenate([[0], np.cumsum(lengths)]).astype(np.int64)
        self.indices = np.array([r for col in columns for r, _ in col], dtype=np.int64)
        self.data = np.array([v for col in columns for _, v in col], dtype=complex)

    @classmethod
    def from_blocks(cls, mode_count: int, blocks: Iterable[tuple[Sequence[int], np.ndarray]]) -> SparseModeMap:
        columns: list[list[tuple[int, complex]]] = [[(m, 1.0 + 0j)] for m in range(mode_count)]
        for support, matrix in blocks:
            for ci, c in enumerate(support):
                columns[c] = [(support[ri], complex(matrix[ri, ci])) for ri in range(len(support)) if matrix[ri, ci] != 0]
        return cls(columns)

    def dense(self) -> np.ndarray:
        out = np.zeros((self.mode_count, self.mode_count), dtype=complex)
        for c in range(self.mode_count):
            lo, hi = self.indptr[c], self.indptr[c + 1]
            out[self.indices[lo:hi], c] = self.data[lo:hi]
        return out


def apply_sparse_map(s: FockState, mapping: SparseModeMap) -> FockState:
    if mapping.mode_count != s.mode_count:
        raise ValidationError(f"map acts on {mapping.mode_count} modes, state has {s.mode_count}")
    out = _backend.apply_linear(s.terms, mapping.indptr, mapping.indices, mapping.data, PRUNE)
    return FockState(out, s.mode_count, _trusted=True)


def apply_mode_unitary(s: FockState, u: ModeUnitary) -> FockState:
    """Substitute every creation operator on ``u.support`` by its image."""
    if any(m >= s.mode_count for m in u.support):
        raise ValidationError("unitary support exceeds the state's modes")
    return apply_sparse_map(s, SparseModeMap.from_blocks(s.mode_count, [(u.support, u.matrix)]))


def apply_mode_permutation(s: FockState, perm: Sequence[int]) -> FockState:
    """Move the content of mode ``i`` to mode ``perm[i]``."""
    perm = np.asarray(perm, dtype=np.int64)
    if perm.shape != (s.mode_count,) or not np.array_equal(np.sort(perm), np.arange(s.mode_count)):
        raise ValidationError("mode permutation must be a bijection on all modes")
    table = perm.tolist()
    terms = {tuple(sorted(table[m] for m in key)): amp for key, amp in s.terms.items()}
    return FockState(terms, s.mode_count, _trusted=True)


def apply_diagonal_phase(s: FockState, phase_fn: Callable[[np.ndarray], float]) -> FockState:
    """Multiply each basis term by ``exp(i phase_fn(occupation_vector))``."""
    terms = {}
    for key, amp in s.terms.items():
        phase = phase_fn(occupation_vector(key, s.mode_count))
        terms[key] = amp * np.exp(1j * phase) if phase else amp
    return FockState(terms, s.mode_count, _trusted=True)


def apply_key_phase(s: FockState, phase_fn: Callable[[Key], float]) -> FockState:
    """Like :func:`apply_diagonal_phase` but ``phase_fn`` sees the sorted key."""
    terms = {}
    for key, amp in s.terms.items():
        phase = phase_fn(key)
        terms[key] = amp * np.exp(1j * phase) if phase else amp
    return FockState(terms, s.mode_count, _trusted=True)


def cphase_fn(mode_a: int, mode_b: int, theta: float = np.pi) -> Callable[[np.ndarray], float]:
    """Phase ``theta`` on every term where both modes are occupied.

    For ``mode_a == mode_b`` the mode must hold at least two bosons.
    """

    def phase(counts):
        if mode_a == mode_b:
            return theta if counts[mode_a] >= 2 else 0.0
        return theta if counts[mode_a] and counts[mode_b] else 0.0

    return phase


def kerr_fn(modes: Iterable[int], phi: float) -> Callable[[np.ndarray], float]:
    """Phase ``phi * k (k - 1) / 2`` with ``k`` the bosons found in ``modes``."""
    modes = list(modes)

    def phase(counts):
        k = int(counts[modes].sum())
        return phi * k * (k - 1) / 2

    return phase


def inner_product(a: FockState, b: FockState) -> complex:
    """``<a|b>``."""
    if a.mode_count != b.mode_count:
        raise ValidationError(f"mode counts differ: {a.mode_count} vs {b.mode_count}")
    small, large = (a.terms, b.terms) if len(a) <= len(b) else (b.terms, a.terms)
    total = 0j
    for key in small:
        if key in large:
            total += a.terms[key].conjugate() * b.terms[key]
    return total


def permanent(matrix: np.ndarray) -> complex:
    return _backend.permanent(np.asarray(matrix, dtype=complex))


def permanent_amplitude(u: np.ndarray, inp: Sequence[int], out: Sequence[int]) -> complex:
    """``<out| U |in>`` for occupation vectors via Ryser's permanent.

    The amplitude is ``per(U[T, S]) / sqrt(prod s_i! prod t_j!)`` where the
    row/column index lists repeat each mode by its occupation.
    """
    u = np.asarray(u, dtype=complex)
    inp = np.asarray(inp, dtype=np.int64)
    out = np.asarray(out, dtype=np.int64)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError("unitary must be square")
    if inp.shape != (u.shape[0],) or out.shape != (u.shape[0],):
        raise ValidationError("occupation vectors must have one entry per mode")
    if inp.sum() != out.sum():
        raise ValidationError(f"photon number mismatch: {inp.sum()} in, {out.sum()} out")
    n = int(inp.sum())
    if n > PERMANENT_CAP:
        raise CapExceededError(f"permanent oracle capped at {PERMANENT_CAP} photons, got {n}")
    cols = np.repeat(np.arange(len(inp)), inp)
    rows = np.repeat(np.arange(len(out)), out)
    norm = sqrt(float(np.prod([factorial(int(c)) for c in inp]) * np.prod([factorial(int(c)) for c in out])))
    return permanent(u[np.ix_(rows, cols)]) / norm


def random_unitary(k: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random ``k x k`` unitary (QR of a complex Ginibre matrix)."""
    z = (rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
