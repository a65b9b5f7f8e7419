"""Simulated instruments: VNA sweeps and qubit readout sequences.

Every operation is a pure function of (request, lab config, seed): the RNG
stream is derived from the request seed alone, so concurrent clients and
repeated calls are reproducible.
"""

from __future__ import annotations

import numpy as np

from .._kernels import simulate_chain
from .config import LabConfig, QubitSpec
from .s21 import s21_response


class LabError(Exception):
    """Request rejected by the lab; carries a wire-level error code."""

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code
        self.message = message


def _rng(seed) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed)))


def vna_sweep(request: dict, config: LabConfig) -> dict:
    """Uniform-grid S21 sweep with averaged Gaussian noise.

    Noise of standard deviation sigma / sqrt(averages) is added
    independently to the real and imaginary parts of each point.
    """
    try:
        f_start = float(request["f_start"])
        f_stop = float(request["f_stop"])
        points = int(request["points"])
        averages = int(request.get("averages", 1))
        seed = int(request.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise LabError("bad_request", f"invalid sweep request: {exc}") from exc
    if not f_start < f_stop:
        raise LabError("bad_request", "f_start must be below f_stop")
    if points < 2:
        raise LabError("bad_request", "points must be at least 2")
    if averages < 1:
        raise LabError("bad_request", "averages must be at least 1")

    freq = np.linspace(f_start, f_stop, points)
    trace = s21_response(freq, config.resonators, config.background)
    sigma = config.noise_sigma / np.sqrt(averages)
    if sigma > 0:
        noise = _rng(seed).normal(0.0, sigma, size=(2, points))
        trace = trace + noise[0] + 1j * noise[1]
    return {
        "freq": freq.tolist(),
        "s21_re": trace.real.tolist(),
        "s21_im": trace.imag.tolist(),
    }


def qubit_sequence(request: dict, qubit: QubitSpec) -> dict:
    """Randomized pi-pulse/readout chain; returns the shots x (N+1) bits.

    The request carries the pi-flag pattern explicitly; ``power`` selects
    (leak, assign_error) from the qubit's power table by nearest entry.
    """
    try:
        pi_flags = [bool(v) for v in request["pi_flags"]]
        shots = int(request["shots"])
        seed = int(request.get("seed", 0))
    except (KeyError, TypeError, ValueError) as exc:
        raise LabError("bad_request", f"invalid sequence request: {exc}") from exc
    if not pi_flags:
        raise LabError("bad_request", "pi_flags must not be empty")
    if shots < 1:
        raise LabError("bad_request", "shots must be at least 1")

    power = request.get("power")
    leak, eps = qubit.at_power(None if power is None else float(power))
    n = len(pi_flags)
    rng = _rng(seed)
    flip_u = rng.random((shots, n))
    assign_u = rng.random((shots, n + 1))
    leak_u = rng.random((shots, n + 1))
    leaked_u = rng.random((shots, n + 1))
    bits = simulate_chain(np.asarray(pi_flags, dtype=np.uint8), qubit.pi_error,
                          eps, leak, qubit.leaked_bit_bias,
                          flip_u, assign_u, leak_u, leaked_u)
    return {"bits": bits.tolist()}
