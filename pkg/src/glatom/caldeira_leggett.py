"""Recoil-free, cross-term-free analytic check (Caldeira-Leggett limit).

For a beam superposition carrying no net orbital angular momentum the
dissipator has no x-y cross terms and no momentum kick, the master
equation separates per axis, and the position variance of an initial
Gaussian of width sigma evolves in closed form:

    <x^2>(tau) = sigma^2 cos^2(nu) + eta_bar beta^2 [nu - sin(2 nu)/2]
                 + (beta^2 / (4 sigma^2)) sin^2(nu),        nu = tau.

The same curve can be assembled from the Gaussian-propagator coefficient
route (high-temperature, vanishing-friction limit); that route is
singular at nu = k pi (focal caustics) and is exposed here only as a
cross-check of the regular closed form above.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_SIN_FLOOR = 1e-12


@dataclass(frozen=True)
class CLParams:
    sigma_bar: float  # initial position width
    eta_bar: float  # dissipation rate
    beta: float

    def __post_init__(self):
        if self.sigma_bar <= 0:
            raise ValidationError(f"sigma_bar must be positive, got {self.sigma_bar}")
        if self.eta_bar < 0:
            raise ValidationError(f"eta_bar must be nonnegative, got {self.eta_bar}")
        if self.beta <= 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")


def cl_variance(tau, p: CLParams):
    """Position variance <x^2>(tau); <x> stays 0 for the <P> = 0 start."""
    tau = np.asarray(tau, dtype=float)
    if np.any(tau < 0):
        raise ValidationError("tau must be nonnegative")
    nu = tau
    out = (
        p.sigma_bar**2 * np.cos(nu) ** 2
        + p.eta_bar * p.beta**2 * (nu - 0.5 * np.sin(2.0 * nu))
        + (p.beta**2 / (4.0 * p.sigma_bar**2)) * np.sin(nu) ** 2
    )
    return float(out) if out.ndim == 0 else out


def cl_coefficients(nu: float, eta: float, omega_r: float):
    """Dissipative Gaussian-propagator coefficients (A, B, C) at angle nu.

    Singular whenever sin(nu) = 0: those are the focal caustics of the
    harmonic propagator; use cl_variance for a regular evaluation.
    """
    s = math.sin(nu)
    if abs(s) < _SIN_FLOOR:
        raise ValidationError(
            f"coefficients are singular at nu = {nu} (multiple of pi)"
        )
    s2 = s * s
    A = eta * (nu - math.sin(2.0 * nu)) / (2.0 * omega_r * s2)
    B = eta * (s - nu * math.cos(nu)) / (omega_r * s2)
    C = eta * (nu - 0.5 * math.sin(2.0 * nu)) / (2.0 * omega_r * s2)
    return A, B, C


def cl_variance_via_coefficients(tau: float, p: CLParams) -> float:
    """cl_variance rebuilt from the propagator-coefficient route.

    Mapping to the unbarred model: omega_R = beta, t = tau / beta (so
    nu = omega_R t = tau), eta = eta_bar beta^3, sigma = sigma_bar/beta,
    and <x_bar^2> = beta^2 <x^2> = beta^2 / (8 B_out) where B_out is the
    evolved Gaussian's X^2 coefficient:

        B_out = L^2 / (4 [1/(8 sigma^2) + C + 2 sigma^2 Khat^2]),
        Khat = (omega_R / 2) cot(nu),   L = omega_R / (2 sin(nu)).
    """
    omega_r = p.beta
    eta = p.eta_bar * p.beta**3
    sigma = p.sigma_bar / p.beta
    nu = tau
    _, _, C = cl_coefficients(nu, eta, omega_r)
    k_hat = 0.5 * omega_r * math.cos(nu) / math.sin(nu)
    ell = 0.5 * omega_r / math.sin(nu)
    b_out = ell**2 / (
        4.0 * (1.0 / (8.0 * sigma**2) + C + 2.0 * sigma**2 * k_hat**2)
    )
    return p.beta**2 / (8.0 * b_out)
