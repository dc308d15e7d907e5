import numpy as np
import pytest
from conftest import two_boson_network
from hypothesis import given, settings
from hypothesis import strategies as st

from multiwalk.errors import ValidationError
from multiwalk.fock import random_unitary
from multiwalk.optics import (
    BeamSplitter,
    BlockedReport,
    CPhase,
    HoistResult,
    OpticalNetwork,
    Phase,
    Relabel,
    beamsplitter,
    check_commutation,
    cphase,
    hoist_cphases,
    phase,
    swap,
)
from multiwalk.optics.rewrite import VERIFY_ATOL, operator_gap
from multiwalk.walk import HADAMARD

CONVENTIONS = {
    "hadamard": HADAMARD,
    "symmetric": np.array([[1, 1j], [1j, 1]]) / np.sqrt(2),
    "rotation": np.array([[np.cos(0.4), -np.sin(0.4)], [np.sin(0.4), np.cos(0.4)]]),
    "random": random_unitary(2, np.random.default_rng(3)),
}


def random_psi(rng, M):
    a = rng.standard_normal((M, M)) + 1j * rng.standard_normal((M, M))
    a = a + a.T
    return a / np.linalg.norm(a)


def same_action(left, right, M, seed=0):
    psi = random_psi(np.random.default_rng(seed), M)
    return np.allclose(two_boson_network(left, M, psi), two_boson_network(right, M, psi), atol=1e-10)


class TestCommutation:
    @pytest.mark.parametrize("name", CONVENTIONS)
    def test_pair_phase_through_beamsplitter(self, name):
        bs = beamsplitter(1, 2, CONVENTIONS[name])
        for diag in (Phase((1, 2), 0.7), CPhase(0, (1, 2), 1.1), CPhase(3, (2, 1), np.pi)):
            result = check_commutation(bs, diag)
            assert result.commutes and result.rule == "pair-phase"
            assert same_action([bs, diag], list(result.rewritten), 4)

    @pytest.mark.parametrize("name", CONVENTIONS)
    def test_swap_relabels_the_controlled_phase(self, name):
        sw = swap(0, 1)
        result = check_commutation(sw, cphase(1, 2, 0.9))
        assert result.rule == "swap"
        assert result.rewritten == (CPhase(0, (2,), 0.9), sw)
        assert same_action([sw, cphase(1, 2, 0.9)], list(result.rewritten), 3)
        # the other direction relabels the element being passed
        bs = beamsplitter(1, 2, CONVENTIONS[name])
        result = check_commutation(bs, swap(2, 3))
        assert result.commutes and result.rule == "swap"
        assert result.rewritten[1].modes == (1, 3)
        assert same_action([bs, swap(2, 3)], list(result.rewritten), 4)

    def test_relabel_conjugation(self):
        perm = Relabel((2, 0, 1, 3))
        result = check_commutation(perm, cphase(0, 3, 0.5))
        assert result.rule == "swap"
        assert same_action([perm, cphase(0, 3, 0.5)], list(result.rewritten), 4)

    def test_disjoint(self):
        result = check_commutation(beamsplitter(0, 1, HADAMARD), cphase(2, 3))
        assert result.rule == "disjoint"
        assert result.distance <= VERIFY_ATOL

    def test_diagonal(self):
        result = check_commutation(phase(1, 0.3), cphase(1, 2, 0.8))
        assert result.rule == "diagonal"

    @pytest.mark.parametrize("name", CONVENTIONS)
    def test_blocked_pair_reports_gap(self, name):
        bs = beamsplitter(0, 1, CONVENTIONS[name])
        result = check_commutation(bs, cphase(1, 2))
        assert not result.commutes
        assert result.rewritten is None
        assert result.distance >= 1e-3
        assert result.distance == pytest.approx(operator_gap([bs, cphase(1, 2)], [cphase(1, 2), bs]))

    def test_single_target_is_not_a_pair_phase(self):
        assert not check_commutation(beamsplitter(1, 2, HADAMARD), cphase(0, 1)).commutes

    def test_locality_limit(self):
        with pytest.raises(ValidationError, match="limited to 8 modes"):
            operator_gap([Relabel(tuple(range(1, 9)) + (0,))], [])


class TestHoist:
    def test_two_cphase_circuit(self):
        h = beamsplitter(2, 3, HADAMARD)
        net = OpticalNetwork(4, (h, CPhase(0, (2, 3), np.pi), h, CPhase(1, (2, 3), np.pi)))
        result = hoist_cphases(net)
        assert isinstance(result, HoistResult)
        assert result.cphase_count == result.original_cphase_count == 2
        assert all(isinstance(e, CPhase) for e in result.prefix.elements)
        assert not any(isinstance(e, CPhase) for e in result.suffix.elements)
        assert same_action(net.elements, result.prefix.elements + result.suffix.elements, 4)

    def test_blocked_circuit(self):
        net = OpticalNetwork(4, (beamsplitter(0, 1, HADAMARD), beamsplitter(2, 3, HADAMARD), cphase(1, 2)))
        result = hoist_cphases(net)
        assert isinstance(result, BlockedReport)
        first, second = result.blocked
        assert isinstance(first, BeamSplitter) and isinstance(second, CPhase)
        assert result.distance >= 1e-3
        assert "cannot move before" in result.message

    def test_no_cphase(self):
        net = OpticalNetwork(3, (beamsplitter(0, 1, HADAMARD), phase(2, 0.4)))
        result = hoist_cphases(net)
        assert result.prefix.elements == ()
        assert result.suffix == net

    def test_swaps_are_passed(self):
        net = OpticalNetwork(4, (beamsplitter(0, 1, HADAMARD), swap(1, 2), cphase(1, 3)))
        result = hoist_cphases(net)
        assert isinstance(result, HoistResult)
        assert same_action(net.elements, result.prefix.elements + result.suffix.elements, 4)
        assert result.prefix.elements == (CPhase(2, (3,), np.pi),)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(1, 7))
    def test_hoist_preserves_operator(self, seed, M, count):
        rng = np.random.default_rng(seed)
        elements = []
        for _ in range(count):
            kind = rng.integers(4)
            i, j = sorted(rng.choice(M, 2, replace=False).tolist())
            if kind == 0:
                elements.append(beamsplitter(i, j, random_unitary(2, rng)))
            elif kind == 1:
                elements.append(swap(i, j))
            elif kind == 2:
                elements.append(phase(i, float(rng.uniform(0, 6))))
            else:
                elements.append(cphase(i, j, float(rng.uniform(0, 6))))
        net = OpticalNetwork(M, tuple(elements))
        result = hoist_cphases(net)
        if isinstance(result, BlockedReport):
            assert result.distance > VERIFY_ATOL
        else:
            assert result.cphase_count == net.count(CPhase)
            assert same_action(net.elements, result.prefix.elements + result.suffix.elements, M, seed)
