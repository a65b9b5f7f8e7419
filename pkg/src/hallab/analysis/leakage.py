"""Readout-leakage benchmarking: correlation series and decay fit.

A chain of N randomized pi pulses interleaved with N+1 readouts yields, per
cycle index j, the average agreement between consecutive-readout alternation
and the pi flag in between. Leakage out of the computational basis destroys
that agreement, so the averaged correlation decays as

    c_avg(j) = (A + B * (1 - L)^j) / 2

with L the per-readout leakage probability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nlls import nlls


class InsufficientDataError(ValueError):
    """Fewer cycle points than the decay fit can constrain."""


@dataclass
class CorrelationSeries:
    j: np.ndarray          # cycle indices 1..N
    c_avg: np.ndarray      # mean {0,1} correlation per cycle index
    n_samples: np.ndarray  # samples averaged per cycle index
    # Covariance of the c_avg vector, estimated from the per-shot match
    # vectors. A shot that leaks early suppresses all its later cycles at
    # once, so the points are correlated and this matrix is what an honest
    # parameter uncertainty has to propagate.
    c_cov: np.ndarray | None = None

    def as_dict(self) -> dict:
        out = {
            "j": [int(v) for v in self.j],
            "c_avg": [float(v) for v in self.c_avg],
            "n_samples": [int(v) for v in self.n_samples],
        }
        if self.c_cov is not None:
            out["c_cov"] = [[float(v) for v in row] for row in self.c_cov]
        return out


@dataclass
class LeakageFit:
    a: float
    b: float
    leak: float
    sigma_leak: float
    j_range: tuple[int, int]

    def as_dict(self) -> dict:
        return {
            "A": self.a, "B": self.b, "L": self.leak,
            "sigma_L": self.sigma_leak,
            "j_range": [self.j_range[0], self.j_range[1]],
        }


def correlation_series(pi_flags, bits) -> CorrelationSeries:
    """Per-cycle correlation, averaged over shots and randomizations.

    ``pi_flags`` holds one boolean list (length N) per randomization and
    ``bits`` the matching shots x (N+1) readout matrices. For each shot and
    cycle j, the correlation is 1 when bits[j] XOR bits[j-1] equals
    pi_flags[j-1], else 0.
    """
    if len(pi_flags) != len(bits):
        raise ValueError("pi_flags and bits must pair one per randomization")
    if not pi_flags:
        raise ValueError("need at least one randomization")

    n = len(pi_flags[0])
    match_sum = np.zeros(n)
    cross_sum = np.zeros((n, n))
    shots_total = 0
    for flags, matrix in zip(pi_flags, bits):
        flags = np.asarray(flags, dtype=bool)
        matrix = np.asarray(matrix, dtype=np.uint8)
        if flags.shape != (n,):
            raise ValueError("inconsistent pi_flags length across randomizations")
        if matrix.ndim != 2 or matrix.shape[1] != n + 1:
            raise ValueError("bits matrix must be shots x (N+1)")
        alternation = matrix[:, 1:] ^ matrix[:, :-1]
        match = (alternation == flags[None, :]).astype(float)
        match_sum += match.sum(axis=0)
        cross_sum += match.T @ match
        shots_total += matrix.shape[0]

    c_avg = match_sum / shots_total
    c_cov = None
    if shots_total > 1:
        shot_cov = ((cross_sum - shots_total * np.outer(c_avg, c_avg))
                    / (shots_total - 1))
        c_cov = shot_cov / shots_total
    return CorrelationSeries(
        j=np.arange(1, n + 1),
        c_avg=c_avg,
        n_samples=np.full(n, shots_total, dtype=np.int64),
        c_cov=c_cov,
    )


def decay_model(params, j):
    a, b, leak = params
    return 0.5 * (a + b * np.power(1.0 - leak, j))


def _loglinear_prefit(j, c_avg, a0):
    """Slope/intercept of log(max(2 c_avg - A0, floor)) vs j, with the
    slope's std error from ordinary least squares."""
    y = np.log(np.maximum(2.0 * c_avg - a0, 1e-6))
    n = j.size
    jm, ym = j.mean(), y.mean()
    sjj = np.sum((j - jm) ** 2)
    slope = np.sum((j - jm) * (y - ym)) / sjj
    intercept = ym - slope * jm
    resid = y - (intercept + slope * j)
    if n > 2:
        slope_err = np.sqrt(np.sum(resid**2) / (n - 2) / sjj)
    else:
        slope_err = 0.0
    return slope, intercept, slope_err


def _flat_fit(j, c_avg, slope_err, j_range) -> LeakageFit:
    flat = nlls(lambda p, x: np.full_like(x, 0.5 * p[0]),
                np.array([2.0 * c_avg.mean()]), j, c_avg)
    return LeakageFit(a=float(flat.params[0]), b=0.0, leak=0.0,
                      sigma_leak=float(slope_err), j_range=j_range)


def fit_leakage(series: CorrelationSeries) -> LeakageFit:
    """Fit the correlation decay and extract the leakage rate.

    Initial guess: A0 = 2 * mean of the last 10% of c_avg; L0 from a
    log-linear regression of the baseline-subtracted series; B0 =
    2 c_avg[1] / (1 - L0) - A0.

    A flat series makes B unidentifiable against A, and a noisy flat series
    produces a slightly negative slope about half the time, so the
    degenerate branch triggers unless the slope is negative beyond three
    standard errors; in that branch L is pinned to 0, only A is fitted, and
    sigma_L is the pre-fit slope standard error. A full fit whose B is
    itself consistent with zero falls back the same way.
    """
    j = np.asarray(series.j, dtype=float)
    c_avg = np.asarray(series.c_avg, dtype=float)
    if j.size < 5:
        raise InsufficientDataError("need at least 5 cycle points")
    j_range = (int(series.j[0]), int(series.j[-1]))

    tail = max(1, int(round(0.1 * j.size)))
    a0 = 2.0 * float(np.mean(c_avg[-tail:]))
    slope, _, slope_err = _loglinear_prefit(j, c_avg, a0)

    if slope >= -max(1e-9, 3.0 * slope_err):
        return _flat_fit(j, c_avg, slope_err, j_range)

    l0 = min(max(1.0 - np.exp(slope), 1e-6), 0.9999)
    b0 = 2.0 * c_avg[0] / (1.0 - l0) - a0
    result = nlls(decay_model, np.array([a0, b0, l0]), j, c_avg)
    a, b, leak = result.params
    sigma = result.sigma
    if series.c_cov is not None:
        sigma = _sandwich_sigma(result.params, j, np.asarray(series.c_cov),
                                fallback=sigma)
    if not np.isfinite(sigma[2]) or abs(b) <= 3.0 * float(sigma[1]):
        return _flat_fit(j, c_avg, slope_err, j_range)
    return LeakageFit(
        a=float(a), b=float(b), leak=float(min(max(leak, 0.0), 1.0)),
        sigma_leak=float(sigma[2]),
        j_range=j_range,
    )


def _sandwich_sigma(params, j, c_cov, fallback):
    """Parameter std errors propagating the measured covariance of the
    series: (JtJ)^-1 Jt Cov J (JtJ)^-1. Falls back to the ordinary estimate
    when the matrices are degenerate."""
    from .nlls import jacobian

    jac = jacobian(decay_model, params, j)
    try:
        bread = np.linalg.inv(jac.T @ jac)
    except np.linalg.LinAlgError:
        return fallback
    cov = bread @ jac.T @ c_cov @ jac @ bread
    diag = np.diag(cov)
    if not np.all(np.isfinite(diag)):
        return fallback
    return np.sqrt(np.clip(diag, 0.0, None))
