"""Moving controlled phases to the front of a network.

Two rewrite rules are used, plus the trivial cases (disjoint supports, two
diagonal elements):

* ``pair-phase``: a diagonal element giving both modes of a beamsplitter the
  same phase (optionally controlled by a third mode) commutes with it, since
  the beamsplitter conserves the pair's total occupation.
* ``swap``: a mode swap (or any relabelling) passes through another element
  by relabelling that element's modes.

Every rewrite is checked numerically as an operator identity on all states
of at most two bosons before it is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from .network import (
    BeamSplitter,
    CPhase,
    Element,
    OpticalNetwork,
    Phase,
    Relabel,
    fock_operator,
    is_diagonal,
    relabel_element,
    touched,
)

VERIFY_ATOL = 1e-10
MAX_LOCAL_MODES = 8


@dataclass(frozen=True)
class Commutation:
    """Outcome of trying to move ``second`` in front of ``first``.

    When ``commutes`` is true, applying ``rewritten[0]`` then ``rewritten[1]``
    equals applying ``first`` then ``second`` and ``distance`` is the
    verification residual.  Otherwise ``distance`` is the gap between the two
    plain orderings.
    """

    first: Element
    second: Element
    commutes: bool
    rule: str | None
    rewritten: tuple[Element, Element] | None
    distance: float


def _localise(elements: list[Element]) -> tuple[list[Element], int]:
    modes = touched(elements)
    if len(modes) > MAX_LOCAL_MODES:
        raise ValidationError(f"commutation check limited to {MAX_LOCAL_MODES} modes, got {len(modes)}")
    mapping = {m: i for i, m in enumerate(modes)}
    out = []
    for e in elements:
        if isinstance(e, Relabel):
            out.append(Relabel(tuple(mapping[e.perm[m]] for m in modes)))
        else:
            out.append(relabel_element(e, mapping))
    return out, max(len(modes), 1)


def operator_gap(left: list[Element], right: list[Element]) -> float:
    """Largest entry of the difference between two element sequences as
    operators on the <=2-boson Fock space of the modes they touch."""
    local, k = _localise(left + right)
    a = fock_operator(local[: len(left)], k)
    b = fock_operator(local[len(left) :], k)
    return float(np.max(np.abs(a - b)))


def _pair_phase(diag: Element, bs: BeamSplitter) -> bool:
    pair = {bs.i, bs.j}
    if isinstance(diag, Phase):
        return pair <= set(diag.targets)
    if isinstance(diag, CPhase):
        return diag.control not in pair and pair <= set(diag.targets)
    return False


def _is_permutation(e: Element) -> bool:
    return isinstance(e, Relabel) or (isinstance(e, BeamSplitter) and e.is_swap)


def _conjugate(e: Element, perm_element: Element, inverse: bool) -> Element:
    if isinstance(perm_element, BeamSplitter):
        mapping = {perm_element.i: perm_element.j, perm_element.j: perm_element.i}
    else:
        perm = perm_element.perm
        mapping = {p: i for i, p in enumerate(perm)} if inverse else dict(enumerate(perm))
    return relabel_element(e, mapping)


def _propose(a: Element, b: Element) -> tuple[str, tuple[Element, Element]] | None:
    if not set(a.modes) & set(b.modes):
        return "disjoint", (b, a)
    if is_diagonal(a) and is_diagonal(b):
        return "diagonal", (b, a)
    if isinstance(a, BeamSplitter) and is_diagonal(b) and _pair_phase(b, a):
        return "pair-phase", (b, a)
    if isinstance(b, BeamSplitter) and is_diagonal(a) and _pair_phase(a, b):
        return "pair-phase", (b, a)
    if _is_permutation(a) and not isinstance(b, Relabel):
        # a then b == b' then a, with b' = a^-1 b a
        return "swap", (_conjugate(b, a, inverse=True), a)
    if _is_permutation(b) and not isinstance(a, Relabel):
        # a then b == b then a', with a' = b a b^-1
        return "swap", (b, _conjugate(a, b, inverse=False))
    return None


def check_commutation(a: Element, b: Element) -> Commutation:
    """Try to rewrite "``a`` then ``b``" as "something like ``b`` then ``a``"."""
    proposal = _propose(a, b)
    if proposal is not None:
        rule, (b2, a2) = proposal
        gap = operator_gap([a, b], [b2, a2])
        if gap <= VERIFY_ATOL:
            return Commutation(a, b, True, rule, (b2, a2), gap)
    return Commutation(a, b, False, None, None, operator_gap([a, b], [b, a]))


@dataclass(frozen=True)
class HoistResult:
    prefix: OpticalNetwork
    suffix: OpticalNetwork
    cphase_count: int
    original_cphase_count: int


@dataclass(frozen=True)
class BlockedReport:
    """The first pair that would not commute; ``distance`` is the operator
    gap between its two orderings."""

    blocked: tuple[Element, Element]
    distance: float

    @property
    def message(self) -> str:
        first, second = self.blocked
        return f"{second!r} cannot move before {first!r} (ordering gap {self.distance:.3g})"


def hoist_cphases(net: OpticalNetwork) -> HoistResult | BlockedReport:
    """Split ``net`` into a controlled-phase prefix and a linear suffix."""
    prefix: list[Element] = []
    suffix: list[Element] = []
    for e in net.elements:
        if not isinstance(e, CPhase):
            suffix.append(e)
            continue
        moving: Element = e
        for idx in range(len(suffix) - 1, -1, -1):
            result = check_commutation(suffix[idx], moving)
            if not result.commutes:
                return BlockedReport((suffix[idx], moving), result.distance)
            moving, suffix[idx] = result.rewritten
        prefix.append(moving)
    original = net.count(CPhase)
    return HoistResult(
        OpticalNetwork(net.mode_count, tuple(prefix)),
        OpticalNetwork(net.mode_count, tuple(suffix)),
        len(prefix),
        original,
    )
