"""Levenberg-Marquardt nonlinear least squares.

Small, dependency-free fitter sized for the resonator and leakage models:
forward-difference Jacobian, multiplicative damping on the normal equations,
and a covariance estimate from the final Jacobian.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

_SQRT_EPS = np.sqrt(np.finfo(float).eps)


def _eval(model, params, x):
    # Wild trial parameters may overflow; the step logic rejects non-finite
    # results, so the numpy warnings are noise.
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        return model(params, x)


class SingularFitError(RuntimeError):
    """Normal equations stayed singular even after damping escalation."""


class DomainError(ValueError):
    """Model produced non-finite residuals at the current parameters."""


@dataclass
class FitResult:
    params: np.ndarray
    covariance: np.ndarray
    residual_rms: float
    iterations: int
    ssr: float = 0.0
    sigma: np.ndarray = field(default=None)  # per-parameter std errors

    def __post_init__(self):
        if self.sigma is None:
            diag = np.clip(np.diag(self.covariance), 0.0, None)
            self.sigma = np.sqrt(diag)


def jacobian(model, params, x, h_scale=1.0):
    """Forward-difference Jacobian of model(params, x) w.r.t. params.

    Step size per parameter: sqrt(machine eps) * max(1, |p_i|) * h_scale.
    """
    params = np.asarray(params, dtype=float)
    f0 = np.asarray(_eval(model, params, x), dtype=float)
    jac = np.empty((f0.size, params.size))
    for i in range(params.size):
        h = _SQRT_EPS * max(1.0, abs(params[i])) * h_scale
        p = params.copy()
        p[i] += h
        jac[:, i] = (np.asarray(_eval(model, p, x), dtype=float) - f0) / h
    return jac


def nlls(model, p0, x, y, max_iter=200, step_tol=1e-10, ssr_tol=1e-12,
         lambda0=1e-3, lambda_max=1e12):
    """Fit y ~ model(params, x) by Levenberg-Marquardt.

    The damping factor starts at ``lambda0``, grows x10 on a rejected step
    and shrinks /10 on an accepted one. Iteration stops on a relative step
    below ``step_tol``, a relative SSR change below ``ssr_tol``, or after
    ``max_iter`` accepted/rejected rounds. Covariance is s^2 (J^T J)^-1
    with s^2 = SSR / (n - p).

    Raises:
        DomainError: residuals non-finite at the starting point.
        SingularFitError: normal equations singular after escalating the
            damping to ``lambda_max``.
    """
    p = np.asarray(p0, dtype=float).copy()
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if y.size <= p.size:
        raise ValueError("need more data points than parameters")

    resid = y - np.asarray(_eval(model, p, x), dtype=float)
    if not np.all(np.isfinite(resid)):
        raise DomainError("non-finite residuals at initial parameters")
    ssr = float(resid @ resid)

    lam = lambda0
    iterations = 0
    for iterations in range(1, max_iter + 1):
        jac = jacobian(model, p, x)
        if not np.all(np.isfinite(jac)):
            raise DomainError("non-finite Jacobian")
        jtj = jac.T @ jac
        jtr = jac.T @ resid
        # Solve in column-scaled coordinates: with unit-norm columns the
        # Marquardt damping lam*diag(JtJ) becomes lam*I and the system stays
        # well conditioned even when parameter magnitudes span many decades.
        scale = np.sqrt(np.clip(np.diag(jtj), 0.0, None))
        scale[scale <= 0.0] = 1.0
        a_hat = jtj / np.outer(scale, scale)
        r_hat = jtr / scale
        eye = np.eye(p.size)

        accepted = False
        while True:
            try:
                step = np.linalg.solve(a_hat + lam * eye, r_hat) / scale
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                trial = p + step
                trial_resid = y - np.asarray(_eval(model, trial, x),
                                             dtype=float)
                if np.all(np.isfinite(trial_resid)):
                    trial_ssr = float(trial_resid @ trial_resid)
                    if trial_ssr <= ssr:
                        accepted = True
                        break
            lam *= 10.0
            if lam > lambda_max:
                if step is None:
                    raise SingularFitError(
                        "normal equations singular after damping escalation")
                break

        if not accepted:
            break
        rel_step = np.linalg.norm(step) / max(np.linalg.norm(p), 1e-300)
        rel_ssr = (ssr - trial_ssr) / max(ssr, 1e-300)
        p, resid, ssr = trial, trial_resid, trial_ssr
        lam = max(lam / 10.0, 1e-300)
        if rel_step < step_tol or rel_ssr < ssr_tol:
            break

    jac = jacobian(model, p, x)
    jtj = jac.T @ jac
    dof = y.size - p.size
    s2 = ssr / dof
    scale = np.sqrt(np.clip(np.diag(jtj), 0.0, None))
    scale[scale <= 0.0] = 1.0
    a_hat = jtj / np.outer(scale, scale)
    try:
        inv_hat = np.linalg.inv(a_hat)
    except np.linalg.LinAlgError:
        inv_hat = np.linalg.pinv(a_hat)
    cov = s2 * inv_hat / np.outer(scale, scale)
    return FitResult(
        params=p,
        covariance=cov,
        residual_rms=float(np.sqrt(ssr / y.size)),
        iterations=iterations,
        ssr=ssr,
    )
