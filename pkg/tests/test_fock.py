from itertools import combinations_with_replacement
from math import factorial, sqrt

import numpy as np
import pytest
from conftest import brute_permanent
from hypothesis import given, settings
from hypothesis import strategies as st

from multiwalk import fock
from multiwalk.errors import CapExceededError, ValidationError
from multiwalk.fock import (
    FockState,
    ModeUnitary,
    apply_diagonal_phase,
    apply_mode_permutation,
    apply_mode_unitary,
    create,
    inner_product,
    key_from_occupation,
    occupation_vector,
    permanent,
    permanent_amplitude,
    product_state,
    random_unitary,
)
from multiwalk.graph import build_line
from multiwalk.walk import HADAMARD, basis_state

BALANCED = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
SYMMETRIC_BS = np.array([[1, 1j], [1j, 1]]) / np.sqrt(2)


def random_state(rng, n, M, terms=4):
    keys = {tuple(sorted(rng.integers(0, M, n).tolist())) for _ in range(terms)}
    amps = rng.standard_normal(len(keys)) + 1j * rng.standard_normal(len(keys))
    return FockState(dict(zip(keys, amps)), M).normalized()


def to_occupation(key, M):
    return occupation_vector(key, M).tolist()


class TestPermanent:
    @pytest.mark.parametrize("n", range(0, 7))
    def test_matches_permutation_sum(self, n, rng):
        for _ in range(3):
            a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            assert abs(permanent(a) - brute_permanent(a)) <= 1e-10 * max(1.0, abs(brute_permanent(a)))

    @pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
    def test_all_ones(self, n):
        assert permanent(np.ones((n, n))) == pytest.approx(factorial(n))

    def test_two_by_two(self):
        a = np.array([[1, 2], [3, 4]])
        assert permanent(a) == pytest.approx(10)

    def test_balanced_beamsplitter_is_zero(self):
        assert abs(permanent(BALANCED)) <= 1e-15

    def test_rejects_non_square(self):
        with pytest.raises(ValueError):
            permanent(np.ones((2, 3)))


class TestPermanentAmplitude:
    def test_identity(self):
        assert permanent_amplitude(np.eye(3), [1, 0, 2], [1, 0, 2]) == pytest.approx(1)

    def test_hong_ou_mandel(self):
        assert abs(permanent_amplitude(BALANCED, [1, 1], [1, 1])) <= 1e-12

    def test_bunching_amplitude(self):
        amp = permanent_amplitude(SYMMETRIC_BS, [1, 1], [2, 0])
        assert amp == pytest.approx(1j / sqrt(2))

    def test_number_mismatch(self):
        with pytest.raises(ValidationError, match="mismatch"):
            permanent_amplitude(np.eye(2), [1, 1], [1, 0])

    def test_cap(self):
        with pytest.raises(CapExceededError):
            permanent_amplitude(np.eye(2), [6, 5], [6, 5])


class TestStates:
    def test_single_excitation(self):
        g = build_line(4)
        s = basis_state(g, [(0, 1)])
        assert dict(s.terms) == {(g.mode_index(0, 1),): 1}

    def test_double_occupation_is_unit_norm(self):
        s = create([1, 1], 3)
        assert dict(s.terms) == {(1, 1): 1}
        assert s.norm() == pytest.approx(1)

    def test_two_modes(self):
        g = build_line(5)
        s = basis_state(g, [(0, 1), (3, 2)])
        assert inner_product(s, s) == pytest.approx(1)
        assert len(s) == 1 and s.n == 2

    def test_invalid_mode(self):
        with pytest.raises(ValidationError):
            create([5], 3)

    def test_product_state_bunching_norm(self):
        # (a0 + a1)^2 |0> / 2 = (|2,0> + sqrt2 |1,1> + |0,2>) / 2
        s = product_state([{0: 1 / sqrt(2), 1: 1 / sqrt(2)}] * 2, 2)
        assert s[(0, 0)] == pytest.approx(0.5)
        assert s[(0, 1)] == pytest.approx(1 / sqrt(2))
        assert s[(1, 1)] == pytest.approx(0.5)

    def test_mixed_boson_numbers_rejected(self):
        with pytest.raises(ValidationError, match="same number"):
            FockState({(0,): 1, (0, 1): 1}, 2)

    @pytest.mark.parametrize("counts", [[0, 0, 0], [2, 0, 1], [0, 3, 0, 1]])
    def test_occupation_round_trip(self, counts):
        key = key_from_occupation(counts)
        assert to_occupation(key, len(counts)) == counts

    def test_inner_product_orthogonal(self):
        assert inner_product(create([0], 2), create([1], 2)) == 0

    def test_inner_product_mode_mismatch(self):
        with pytest.raises(ValidationError):
            inner_product(create([0], 2), create([0], 3))


class TestModeUnitary:
    def test_hadamard_on_interior_walker(self):
        g = build_line(5)
        x = 2
        left, right = g.mode_index(x, x - 1), g.mode_index(x, x + 1)
        out = apply_mode_unitary(basis_state(g, [(x, x + 1)]), ModeUnitary(HADAMARD, (left, right)))
        # column convention: the right coin is column 1 of [[1, 1], [1, -1]] / sqrt 2
        assert out[(left,)] == pytest.approx(1 / sqrt(2))
        assert out[(right,)] == pytest.approx(-1 / sqrt(2))
        # same state as (e_right - e_left)/sqrt 2 up to a global sign
        ref = FockState({(right,): 1 / sqrt(2), (left,): -1 / sqrt(2)}, g.mode_count)
        assert abs(inner_product(ref, out)) == pytest.approx(1)

    def test_identity(self, rng):
        s = random_state(rng, 3, 5)
        out = apply_mode_unitary(s, ModeUnitary(np.eye(3), (0, 2, 4)))
        assert out.terms == pytest.approx(s.terms)

    def test_hong_ou_mandel(self):
        out = apply_mode_unitary(create([0, 1], 2), ModeUnitary(BALANCED, (0, 1)))
        assert abs(out[(0, 1)]) <= 1e-12
        assert abs(out[(0, 0)]) == pytest.approx(1 / sqrt(2))

    def test_rejects_non_unitary(self):
        with pytest.raises(ValidationError, match="unitary"):
            ModeUnitary(np.array([[1, 1], [0, 1]]), (0, 1))

    def test_rejects_shape_mismatch(self):
        with pytest.raises(ValidationError, match="support"):
            ModeUnitary(np.eye(2), (0, 1, 2))

    def test_support_outside_state(self):
        with pytest.raises(ValidationError):
            apply_mode_unitary(create([0], 2), ModeUnitary(np.eye(2), (1, 2)))

    @pytest.mark.parametrize("M,n", [(2, 2), (3, 3), (4, 2), (5, 4), (8, 3)])
    def test_matches_permanent_oracle(self, M, n, rng):
        u = random_unitary(M, rng)
        for inp in list(combinations_with_replacement(range(M), n))[:6]:
            out = apply_mode_unitary(create(inp, M), ModeUnitary(u, tuple(range(M))))
            for key in combinations_with_replacement(range(M), n):
                s, t = to_occupation(inp, M), to_occupation(key, M)
                rows = np.repeat(np.arange(M), t)
                cols = np.repeat(np.arange(M), s)
                norm = sqrt(np.prod([factorial(c) for c in s]) * np.prod([factorial(c) for c in t]))
                expected = brute_permanent(u[np.ix_(rows, cols)]) / norm
                assert abs(out[key] - expected) <= 1e-9

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 4), st.integers(2, 7), st.integers(0, 2**32 - 1))
    def test_norm_and_number_conserved(self, n, M, seed):
        rng = np.random.default_rng(seed)
        s = random_state(rng, n, M)
        k = int(rng.integers(1, M + 1))
        support = tuple(rng.permutation(M)[:k].tolist())
        out = apply_mode_unitary(s, ModeUnitary(random_unitary(k, rng), support))
        assert abs(out.norm() - 1) <= 1e-12
        assert all(len(key) == n for key in out.terms)

    @pytest.mark.parametrize("M,modes", [(40, [0, 39]), (12, [0, 3, 3, 11])])
    def test_norm_over_long_sequences(self, M, modes, rng):
        n = len(modes)
        s = create(modes, M)
        for _ in range(1000):
            a, b = rng.choice(M, 2, replace=False)
            s = apply_mode_unitary(s, ModeUnitary(random_unitary(2, rng), (int(a), int(b))))
        assert abs(s.norm() - 1) <= 1e-12
        assert s.n == n

    def test_adjoint_identity(self, rng):
        M = 4
        u = random_unitary(M, rng)
        a, b = random_state(rng, 2, M), random_state(rng, 2, M)
        lhs = inner_product(a, apply_mode_unitary(b, ModeUnitary(u, tuple(range(M)))))
        rhs = inner_product(apply_mode_unitary(a, ModeUnitary(u.conj().T, tuple(range(M)))), b)
        assert lhs == pytest.approx(rhs, abs=1e-12)


class TestPermutationsAndPhases:
    def test_identity_permutation(self, rng):
        s = random_state(rng, 2, 4)
        assert apply_mode_permutation(s, range(4)).terms == s.terms

    def test_step_is_an_involution(self, rng):
        g = build_line(6)
        s = random_state(rng, 3, g.mode_count)
        twice = apply_mode_permutation(apply_mode_permutation(s, g.step_permutation), g.step_permutation)
        assert twice.terms == s.terms

    def test_step_moves_walker(self):
        g = build_line(6)
        s = apply_mode_permutation(basis_state(g, [(2, 3)]), g.step_permutation)
        assert dict(s.terms) == {(g.mode_index(3, 2),): 1}

    @pytest.mark.parametrize("perm", [[0, 0, 1], [0, 1], [0, 1, 3]])
    def test_rejects_non_bijection(self, perm):
        with pytest.raises(ValidationError, match="bijection"):
            apply_mode_permutation(create([0], 3), perm)

    def test_zero_phase(self, rng):
        s = random_state(rng, 2, 4)
        assert apply_diagonal_phase(s, lambda counts: 0.0).terms == s.terms

    def test_cphase_flips_exactly_both_occupied(self):
        s = FockState({(0, 1): 0.5, (0, 2): 0.5, (1, 1): 0.5, (1, 2): 0.5}, 3)
        out = apply_diagonal_phase(s, fock.cphase_fn(0, 1))
        assert out[(0, 1)] == pytest.approx(-0.5)
        assert all(out[k] == pytest.approx(0.5) for k in [(0, 2), (1, 1), (1, 2)])

    def test_cphase_same_mode_needs_two(self):
        out = apply_diagonal_phase(FockState({(1, 1): 1}, 2), fock.cphase_fn(1, 1))
        assert out[(1, 1)] == pytest.approx(-1)

    def test_kerr_two_bosons(self):
        phi = 0.37
        s = FockState({(0, 1): 1}, 3)
        out = apply_diagonal_phase(s, fock.kerr_fn([0, 1], phi))
        assert out[(0, 1)] == pytest.approx(np.exp(1j * phi))

    def test_phase_preserves_norm(self, rng):
        s = random_state(rng, 3, 6, terms=10)
        out = apply_diagonal_phase(s, lambda counts: float(counts @ np.arange(6)))
        assert out.norm() == pytest.approx(1, abs=1e-15)

    @settings(max_examples=30, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_permutation_conjugates_phase(self, seed):
        rng = np.random.default_rng(seed)
        M = 5
        s = random_state(rng, 2, M, terms=6)
        perm = rng.permutation(M)
        weights = rng.standard_normal(M)
        phase = lambda counts: float(counts @ weights) + 0.7 * float(counts[0] * counts[1])  # noqa: E731
        # P D = D' P with D' reading occupations through the inverse relabelling
        moved = lambda counts: phase(counts[perm])  # noqa: E731
        lhs = apply_mode_permutation(apply_diagonal_phase(s, phase), perm)
        rhs = apply_diagonal_phase(apply_mode_permutation(s, perm), moved)
        assert lhs.terms == pytest.approx(rhs.terms)


def test_random_unitary_is_unitary(rng):
    u = random_unitary(6, rng)
    assert np.allclose(u @ u.conj().T, np.eye(6), atol=1e-13)
