from __future__ import annotations

import numpy as np
import pytest

from hallab.analysis import DomainError, jacobian, nlls
from hallab.analysis.resonator import _model as resonator_model
from hallab.virtlab import Background, ResonatorSpec, s21_response


def line(params, x):
    return params[0] * x + params[1]


def exp_decay(params, x):
    return np.exp(-params[0] * x)


def test_exact_line_recovery():
    x = np.linspace(0.0, 5.0, 20)
    y = 2.0 * x + 1.0
    result = nlls(line, [0.5, 0.0], x, y)
    assert result.params == pytest.approx([2.0, 1.0], abs=1e-10)
    assert result.residual_rms < 1e-10


def test_noiseless_exponential_rate():
    x = np.linspace(0.0, 10.0, 51)
    y = np.exp(-0.3 * x)
    result = nlls(exp_decay, [0.1], x, y)
    assert result.params[0] == pytest.approx(0.3, abs=1e-8)


def test_forward_jacobian_matches_central_difference():
    # Central differences are the independent reference: O(h^2) accurate.
    x = np.linspace(0.1, 4.0, 37)
    params = np.array([0.7, -1.3])

    def model(p, x):
        return np.sin(p[0] * x) + np.exp(p[1] * x) * x

    fwd = jacobian(model, params, x)
    central = np.empty_like(fwd)
    for i in range(params.size):
        h = 1e-6 * max(1.0, abs(params[i]))
        up, dn = params.copy(), params.copy()
        up[i] += h
        dn[i] -= h
        central[:, i] = (model(up, x) - model(dn, x)) / (2 * h)
    scale = np.max(np.abs(central))
    assert np.max(np.abs(fwd - central)) / scale < 1e-5


def test_domain_error_on_nonfinite_start():
    with pytest.raises(DomainError):
        nlls(lambda p, x: np.log(p[0] * x), [-1.0], np.linspace(1, 2, 9),
             np.zeros(9))


def test_needs_more_points_than_params():
    with pytest.raises(ValueError):
        nlls(line, [1.0, 1.0], np.array([1.0, 2.0]), np.array([1.0, 2.0]))


def test_resonator_recovery_under_noise():
    # Round trip against simulator ground truth: sigma 0.003, 10 averages.
    spec = ResonatorSpec(f_r=5.0e9, q_i=2.0e4, q_c=8.0e3, phi=0.15)
    background = Background(a=0.97, alpha=0.3)
    freq = np.linspace(spec.f_r - 5e6, spec.f_r + 5e6, 401)
    clean = s21_response(freq, [spec], background)
    sigma = 0.003 / np.sqrt(10)

    p_true = np.array([spec.f_r, np.log(spec.q_i), np.log(spec.q_c),
                       spec.phi, background.a, background.alpha])
    failures = 0
    for seed in range(20):
        rng = np.random.Generator(np.random.PCG64(seed))
        noisy = clean + rng.normal(0, sigma, freq.size) \
            + 1j * rng.normal(0, sigma, freq.size)
        y = np.concatenate([noisy.real, noisy.imag])
        p0 = p_true * np.array([1.0 + 2e-7, 1.02, 0.98, 1.0, 1.0, 1.0])
        result = nlls(resonator_model, p0, freq, y)
        f_r, log_qi, log_qc = result.params[:3]
        ok = (abs(f_r - spec.f_r) / spec.f_r < 1e-6
              and abs(np.exp(log_qi) - spec.q_i) / spec.q_i < 0.05
              and abs(np.exp(log_qc) - spec.q_c) / spec.q_c < 0.05)
        failures += not ok
    assert failures == 0
