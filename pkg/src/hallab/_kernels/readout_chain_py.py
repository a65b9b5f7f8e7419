"""NumPy implementation of the interleaved pi-pulse/readout chain.

Must stay observationally identical to the compiled twin in
``_readout_chain.pyx``: both consume the same pre-drawn uniform matrices in
the same order, so the selected implementation never changes results.

State encoding: 0 = ground, 1 = excited, 2 = leaked.
"""

from __future__ import annotations

import numpy as np


def simulate_chain(pi_flags, p_pi, eps, leak, leaked_bias,
                   flip_u, assign_u, leak_u, leaked_u):
    """Run the readout chain for all shots.

    Per shot: readout 0 first, then for each cycle j an optional pi pulse
    (succeeds with probability 1 - p_pi, no effect on a leaked state)
    followed by readout j. An in-basis readout yields indicator(excited)
    XOR Bernoulli(eps); a leaked readout yields Bernoulli(leaked_bias).
    Leakage to the non-computational state happens with probability
    ``leak`` after each recorded bit.

    Args:
        pi_flags: (n,) bool, pulse pattern shared by every shot.
        flip_u / assign_u / leak_u / leaked_u: pre-drawn U(0,1) matrices of
            shapes (shots, n), (shots, n+1), (shots, n+1), (shots, n+1).

    Returns:
        (shots, n+1) uint8 matrix of readout bits.
    """
    pi_flags = np.asarray(pi_flags, dtype=bool)
    n = pi_flags.size
    shots = assign_u.shape[0]
    bits = np.empty((shots, n + 1), dtype=np.uint8)
    state = np.zeros(shots, dtype=np.uint8)

    for j in range(n + 1):
        if j > 0 and pi_flags[j - 1]:
            flip = (state < 2) & (flip_u[:, j - 1] >= p_pi)
            state[flip] ^= 1
        in_basis = state < 2
        bits[:, j] = np.where(
            in_basis,
            (state == 1) ^ (assign_u[:, j] < eps),
            leaked_u[:, j] < leaked_bias,
        )
        state[in_basis & (leak_u[:, j] < leak)] = 2
    return bits
