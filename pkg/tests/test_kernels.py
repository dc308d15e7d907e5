import os
import subprocess
import sys

import numpy as np
import pytest
from conftest import brute_permanent

from multiwalk import _backend, _purepy
from multiwalk.fock import SparseModeMap, random_unitary

BACKENDS = _backend.available()


def random_terms(rng, n, M, count):
    keys = {tuple(sorted(rng.integers(0, M, n).tolist())) for _ in range(count)}
    return {k: complex(*rng.standard_normal(2)) for k in keys}


@pytest.mark.parametrize("name", BACKENDS)
class TestKernels:
    @pytest.mark.parametrize("n", range(0, 8))
    def test_permanent(self, name, n, rng):
        impl = _backend.load(name)
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        expected = brute_permanent(a)
        assert abs(impl.permanent(a) - expected) <= 1e-10 * max(1.0, abs(expected))

    def test_permanent_rejects_non_square(self, name):
        with pytest.raises(ValueError):
            _backend.load(name).permanent(np.ones((2, 3), dtype=complex))

    @pytest.mark.parametrize("n,M", [(1, 6), (2, 5), (3, 7), (4, 4)])
    def test_apply_linear_matches_pure_python(self, name, n, M, rng):
        impl = _backend.load(name)
        u = random_unitary(M, rng)
        u[np.abs(u) < 0.2] = 0  # exercise sparse columns
        mapping = SparseModeMap([[(r, u[r, c]) for r in range(M) if u[r, c] != 0] for c in range(M)])
        terms = random_terms(rng, n, M, 6)
        got = impl.apply_linear(terms, mapping.indptr, mapping.indices, mapping.data, 1e-14)
        ref = _purepy.apply_linear(terms, mapping.indptr, mapping.indices, mapping.data, 1e-14)
        assert set(got) == set(ref)
        for k in ref:
            assert abs(got[k] - ref[k]) <= 1e-12

    def test_apply_linear_prunes(self, name):
        impl = _backend.load(name)
        h = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
        mapping = SparseModeMap([[(0, h[0, 0]), (1, h[1, 0])], [(0, h[0, 1]), (1, h[1, 1])]])
        out = impl.apply_linear({(0, 1): 1.0 + 0j}, mapping.indptr, mapping.indices, mapping.data, 1e-14)
        assert (0, 1) not in out
        assert set(out) == {(0, 0), (1, 1)}

    def test_vacuum(self, name):
        impl = _backend.load(name)
        mapping = SparseModeMap([[(0, 1.0)]])
        assert impl.apply_linear({(): 2.0 + 0j}, mapping.indptr, mapping.indices, mapping.data, 1e-14) == {(): 2.0}


def test_pure_python_can_be_forced():
    env = dict(os.environ, MULTIWALK_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import multiwalk; print(multiwalk.KERNEL_BACKEND)"],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    assert out.stdout.strip() == "python"


def test_default_backend_is_first_available():
    assert _backend.NAME == BACKENDS[0] or os.environ.get("MULTIWALK_PURE_PYTHON") not in (None, "", "0")


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.load("fortran")
