"""Complex S21 transmission model for notch-coupled resonators.

A single parameterization is shared by the sweep simulator and the curve
fitter so that parameter recovery is well posed:

    S21(f) = a e^{i alpha} e^{-2 pi i f tau}
             * prod_k [ 1 - (Ql_k / Qc_k) e^{i phi_k}
                            / (1 + 2i Ql_k (f - fr_k) / fr_k) ]

with loaded quality factor 1/Ql = 1/Qi + 1/Qc per resonator.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ResonatorSpec:
    """Ground-truth parameters of one notch resonator."""

    f_r: float       # resonance frequency, Hz
    q_i: float       # internal quality factor
    q_c: float       # coupling quality factor
    phi: float = 0.0  # impedance-mismatch angle, rad

    def __post_init__(self):
        if not self.f_r > 0:
            raise ValueError("f_r must be positive")
        if not (1e2 <= self.q_i <= 1e9 and 1e2 <= self.q_c <= 1e9):
            raise ValueError("Q_i and Q_c must lie in [1e2, 1e9]")
        if not -np.pi / 2 < self.phi < np.pi / 2:
            raise ValueError("phi must lie in (-pi/2, pi/2)")

    @property
    def q_l(self) -> float:
        return 1.0 / (1.0 / self.q_i + 1.0 / self.q_c)

    @property
    def fwhm(self) -> float:
        return self.f_r / self.q_l


@dataclass(frozen=True)
class Background:
    """Slowly varying transmission background: gain, phase, cable delay."""

    a: float = 1.0
    alpha: float = 0.0
    tau: float = 0.0  # seconds


def notch_term(f, f_r, q_i, q_c, phi):
    """Single-resonator dip factor (background-free)."""
    f = np.asarray(f, dtype=float)
    q_l = 1.0 / (1.0 / q_i + 1.0 / q_c)
    depth = (q_l / q_c) * np.exp(1j * phi)
    return 1.0 - depth / (1.0 + 2j * q_l * (f - f_r) / f_r)


def s21_response(f, resonators, background=Background()):
    """Evaluate the full multi-resonator S21 model on frequencies ``f``."""
    f = np.asarray(f, dtype=float)
    out = np.full(f.shape, background.a * np.exp(1j * background.alpha),
                  dtype=complex)
    if background.tau != 0.0:
        out = out * np.exp(-2j * np.pi * f * background.tau)
    for res in resonators:
        out *= notch_term(f, res.f_r, res.q_i, res.q_c, res.phi)
    return out
