"""Kernel dispatch: compiled extension when available, NumPy otherwise.

Set HALLAB_PURE=1 to force the NumPy implementation (used by the parity
tests and the benchmark).
"""

from __future__ import annotations

import os

from . import readout_chain_py

if os.environ.get("HALLAB_PURE") == "1":
    simulate_chain = readout_chain_py.simulate_chain
    KERNEL_IMPL = "python"
else:
    try:
        from ._readout_chain import simulate_chain

        KERNEL_IMPL = "compiled"
    except ImportError:
        simulate_chain = readout_chain_py.simulate_chain
        KERNEL_IMPL = "python"

__all__ = ["KERNEL_IMPL", "simulate_chain", "readout_chain_py"]
