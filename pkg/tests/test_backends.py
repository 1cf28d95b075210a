import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nonstat_causal import _core, _kernels_py

_kernels = pytest.importorskip("nonstat_causal._kernels")


def test_compiled_backend_selected_by_default():
    if os.environ.get("NONSTAT_CAUSAL_PURE"):
        pytest.skip("fallback forced by the environment")
    assert _core.BACKEND == "cython"


def test_environment_forces_fallback():
    code = "from nonstat_causal import _core; print(_core.BACKEND)"
    env = dict(os.environ, NONSTAT_CAUSAL_PURE="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def operator(rng, T, p):
    return np.column_stack([rng.uniform(1.0, 2.0, T), rng.uniform(-0.4, 0.4, (T, p))])


sizes = st.tuples(st.integers(0, 2**32 - 1), st.integers(1, 60), st.integers(0, 4))


@settings(max_examples=30)
@given(sizes)
def test_apply_parity(args):
    seed, T, p = args
    rng = np.random.default_rng(seed)
    c, x = operator(rng, T, p), rng.standard_normal(T)
    assert np.allclose(_kernels.tv_apply(c, x), _kernels_py.tv_apply(c, x), rtol=1e-13, atol=1e-13)


@settings(max_examples=30)
@given(sizes, st.integers(0, 4))
def test_compose_parity(args, q):
    seed, T, p = args
    rng = np.random.default_rng(seed)
    a, b = operator(rng, T, p), operator(rng, T, q)
    assert np.allclose(_kernels.tv_compose(a, b), _kernels_py.tv_compose(a, b), rtol=1e-13, atol=1e-13)


@settings(max_examples=30)
@given(sizes, st.integers(0, 30))
def test_invert_parity(args, r_max):
    seed, T, p = args
    c = operator(np.random.default_rng(seed), T, p)
    assert np.allclose(_kernels.tv_invert(c, r_max), _kernels_py.tv_invert(c, r_max), rtol=1e-12, atol=1e-12)


@settings(max_examples=30)
@given(sizes, st.floats(0.0, 4.0), st.integers(0, 20))
def test_backward_parity(args, ratio, q_max):
    seed, T, p = args
    c = operator(np.random.default_rng(seed), T, p)
    got = _kernels.tv_backward(c, ratio, q_max)
    ref = _kernels_py.tv_backward(c, ratio, q_max)
    for g, r in zip(np.atleast_1d(got) if not isinstance(got, tuple) else got,
                    np.atleast_1d(ref) if not isinstance(ref, tuple) else ref):
        assert np.allclose(g, r, rtol=1e-12, atol=1e-12)


@settings(max_examples=30)
@given(sizes, st.integers(1, 8))
def test_companion_parity(args, n_blocks):
    seed, T, p = args
    c = operator(np.random.default_rng(seed), T + n_blocks, p)
    assert np.allclose(_kernels.companion_norms(c, n_blocks), _kernels_py.companion_norms(c, n_blocks),
                       rtol=1e-12, atol=1e-12)
