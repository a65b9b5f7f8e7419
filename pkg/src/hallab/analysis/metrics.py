"""Readout fidelity metrics."""

from __future__ import annotations

import numpy as np


def readout_metrics(prep0_bits, prep1_bits, double_readout_pairs) -> dict:
    """Visibility and repeatability of a qubit readout.

    visibility    = P(bit = 1 | prepared excited) - P(bit = 1 | prepared ground)
    repeatability = fraction of consecutive readout pairs that agree
    """
    prep0 = np.asarray(prep0_bits, dtype=float)
    prep1 = np.asarray(prep1_bits, dtype=float)
    pairs = np.asarray(double_readout_pairs, dtype=float)
    if prep0.size == 0 or prep1.size == 0 or pairs.size == 0:
        raise ValueError("empty input samples")
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ValueError("double_readout_pairs must be n x 2")
    return {
        "visibility": float(prep1.mean() - prep0.mean()),
        "repeatability": float(np.mean(pairs[:, 0] == pairs[:, 1])),
    }
