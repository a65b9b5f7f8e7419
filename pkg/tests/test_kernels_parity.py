"""The compiled kernel and the NumPy fallback must agree bit for bit."""

from __future__ import annotations

import numpy as np
import pytest

from hallab._kernels import KERNEL_IMPL, readout_chain_py

try:
    from hallab._kernels import _readout_chain
except ImportError:
    _readout_chain = None


def _draw(seed, shots, n):
    rng = np.random.Generator(np.random.PCG64(seed))
    return (rng.random((shots, n)), rng.random((shots, n + 1)),
            rng.random((shots, n + 1)), rng.random((shots, n + 1)))


def brute_force_chain(flags, p_pi, eps, leak, bias, flip_u, assign_u,
                      leak_u, leaked_u):
    """Scalar oracle following the written-out state machine."""
    shots = assign_u.shape[0]
    n = len(flags)
    bits = np.zeros((shots, n + 1), dtype=np.uint8)
    for i in range(shots):
        state = 0  # 0 ground, 1 excited, 2 leaked
        for j in range(n + 1):
            if j > 0 and flags[j - 1] and state < 2:
                if flip_u[i, j - 1] >= p_pi:
                    state ^= 1
            if state < 2:
                bit = int(state == 1) ^ int(assign_u[i, j] < eps)
                bits[i, j] = bit
                if leak_u[i, j] < leak:
                    state = 2
            else:
                bits[i, j] = int(leaked_u[i, j] < bias)
    return bits


@pytest.mark.parametrize("seed,p_pi,eps,leak,bias", [
    (0, 0.0, 0.0, 0.0, 0.5),
    (1, 0.005, 0.02, 0.124, 0.5),
    (2, 0.3, 0.4, 0.9, 0.1),
    (3, 0.0, 0.0, 1.0, 1.0),
])
def test_python_kernel_matches_brute_force(seed, p_pi, eps, leak, bias):
    rng = np.random.Generator(np.random.PCG64(seed + 100))
    flags = rng.integers(0, 2, size=9).astype(np.uint8)
    draws = _draw(seed, 40, 9)
    expected = brute_force_chain(flags, p_pi, eps, leak, bias, *draws)
    got = readout_chain_py.simulate_chain(flags, p_pi, eps, leak, bias, *draws)
    assert np.array_equal(expected, got)


@pytest.mark.skipif(_readout_chain is None,
                    reason="compiled kernel not built")
@pytest.mark.parametrize("seed", range(6))
def test_compiled_matches_python(seed):
    rng = np.random.Generator(np.random.PCG64(seed))
    n = int(rng.integers(1, 40))
    shots = int(rng.integers(1, 200))
    flags = rng.integers(0, 2, size=n).astype(np.uint8)
    p_pi, eps, leak = rng.random(3) * [0.2, 0.4, 0.5]
    draws = _draw(seed + 1000, shots, n)
    a = readout_chain_py.simulate_chain(flags, p_pi, eps, leak, 0.5, *draws)
    b = _readout_chain.simulate_chain(flags, p_pi, eps, leak, 0.5, *draws)
    assert np.array_equal(a, b)


def test_dispatch_reports_an_implementation():
    assert KERNEL_IMPL in ("compiled", "python")
