"""Notch-resonator parameter extraction from complex S21 traces."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..virtlab.s21 import Background, notch_term
from .nlls import nlls

PARAM_NAMES = ("f_r", "q_i", "q_c", "phi", "a", "alpha")


class NoResonanceError(ValueError):
    """Trace has no dip deep enough to fit."""


@dataclass
class ResonatorFit:
    f_r: float
    q_i: float
    q_c: float
    phi: float
    a: float
    alpha: float
    residual_rms: float
    sigma: dict[str, float]

    def as_dict(self) -> dict:
        return {
            "f_r": self.f_r, "Q_i": self.q_i, "Q_c": self.q_c,
            "phi": self.phi, "a": self.a, "alpha": self.alpha,
            "residual_rms": self.residual_rms,
            "sigma": dict(self.sigma),
        }


def _model(params, freq):
    """Stacked (re, im) prediction of the single-notch model.

    Qi and Qc enter through their logs so the fitter works on O(1)
    magnitudes and positivity is structural.
    """
    f_r, log_qi, log_qc, phi, a, alpha = params
    trace = (a * np.exp(1j * alpha)
             * notch_term(freq, f_r, np.exp(log_qi), np.exp(log_qc), phi))
    return np.concatenate([trace.real, trace.imag])


def guess_parameters(freq, s21):
    """Initial estimate: f_r at min |S21|, Ql from the 3 dB width, a from
    the edge mean, phi = 0, Qc from the dip depth via Ql/Qc ~ 1 - |S21(f_r)|.
    """
    freq = np.asarray(freq, dtype=float)
    mag = np.abs(s21)
    n_edge = max(2, freq.size // 10)
    edges = np.concatenate([s21[:n_edge], s21[-n_edge:]])
    a0 = float(np.mean(np.abs(edges)))
    alpha0 = float(np.angle(np.mean(edges)))

    i_min = int(np.argmin(mag))
    f_r0 = float(freq[i_min])
    dip = mag[i_min] / a0
    if 20.0 * np.log10(max(dip, 1e-12)) > -0.5:
        raise NoResonanceError("dip shallower than 0.5 dB")

    # Width at the level halfway between baseline and dip bottom; for this
    # notch shape that width is ~0.82 linewidths, close enough for a seed.
    half_level = a0 * (1.0 + dip) / 2.0
    left = i_min
    while left > 0 and mag[left] < half_level:
        left -= 1
    right = i_min
    while right < freq.size - 1 and mag[right] < half_level:
        right += 1
    width = max(freq[right] - freq[left], (freq[1] - freq[0]) * 2)
    q_l0 = f_r0 / width
    depth0 = min(max(1.0 - dip, 1e-3), 0.999)
    q_c0 = q_l0 / depth0
    q_i0 = 1.0 / max(1.0 / q_l0 - 1.0 / q_c0, 1.0 / (q_c0 * 1e3))
    return np.array([f_r0, np.log(q_i0), np.log(q_c0), 0.0, a0, alpha0])


def fit_resonator(freq, s21_re, s21_im, guess=None):
    """Fit the shared notch model on stacked real/imag residuals.

    ``guess`` may supply (f_r, q_i, q_c, phi, a, alpha); otherwise it is
    derived from the trace. Requires at least 8 points spanning the
    resonance.
    """
    freq = np.asarray(freq, dtype=float)
    s21 = np.asarray(s21_re, dtype=float) + 1j * np.asarray(s21_im, dtype=float)
    if freq.size < 8:
        raise ValueError("need at least 8 points to fit a resonance")

    if guess is None:
        p0 = guess_parameters(freq, s21)
    else:
        f_r0, q_i0, q_c0, phi0, a0, alpha0 = guess
        p0 = np.array([f_r0, np.log(q_i0), np.log(q_c0), phi0, a0, alpha0])

    y = np.concatenate([s21.real, s21.imag])
    result = nlls(_model, p0, freq, y)
    f_r, log_qi, log_qc, phi, a, alpha = result.params
    q_i, q_c = float(np.exp(log_qi)), float(np.exp(log_qc))

    # Map std errors of log Q back to Q by first-order propagation.
    sig = result.sigma
    sigma = {
        "f_r": float(sig[0]),
        "q_i": float(sig[1] * q_i),
        "q_c": float(sig[2] * q_c),
        "phi": float(sig[3]),
        "a": float(sig[4]),
        "alpha": float(sig[5]),
    }
    return ResonatorFit(
        f_r=float(f_r), q_i=q_i, q_c=q_c, phi=float(phi), a=float(a),
        alpha=float(alpha), residual_rms=result.residual_rms, sigma=sigma,
    )


def resonator_trace(fit: ResonatorFit, freq):
    """Model prediction for a fitted resonator (plot overlay helper)."""
    return (fit.a * np.exp(1j * fit.alpha)
            * notch_term(np.asarray(freq, dtype=float),
                         fit.f_r, fit.q_i, fit.q_c, fit.phi))


def ground_truth_trace(freq, resonators, background=Background()):
    from ..virtlab.s21 import s21_response

    return s21_response(freq, resonators, background)
