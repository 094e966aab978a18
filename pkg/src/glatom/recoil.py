"""Spontaneous-emission machinery: direction sampling and the recoil jump.

A jump applies C = (X + iY) exp(i mu (eps_x X + eps_y Y)) followed by
renormalization; the sqrt(eta Phi(n)) prefactor of the full Lindblad
channel is absorbed by the renormalization and the direction sampling.

The photon direction follows the circular-polarization dipole pattern
Phi(n) = (3/16 pi)(1 + cos^2 theta): phi is uniform and theta comes from
cumulative inversion,

    theta = arccos(u^(1/3) - u^(-1/3)),
    u = 2 - 4 e + sqrt(5 - 16 e + 16 e^2),   e uniform in [0, 1].

Matrix elements are evaluated in closed form.  With kappa = b sqrt(beta/2),

    G(m, n, b) = <m|e^(i b X)|n>
               = sqrt(n_>! / n_<!) e^(-kappa^2/2)
                 sum_j C(n_<, j) (i kappa)^(n_> + n_< - 2j) / (n_> - j)!

and F(m, n, b) = <m| X e^(i b X) |n> follows from the ladder identity

    F(m, n, b) = sqrt(beta/2) [sqrt(m+1) G(m+1, n, b) + sqrt(m) G(m-1, n, b)],

which is exact, safe at kappa = 0, and reuses G built on an (N+1) basis
so the identity never reads past the allocated rows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .errors import DegenerateJumpError, InvalidStateError, ValidationError
from .fock2d import TruncatedState

_DEGENERATE_NORM2_RATIO = 1e-12


@dataclass(frozen=True)
class EmissionDirection:
    """Unit vector of an emitted photon; eps_* are its direction cosines."""

    theta: float
    phi: float

    @property
    def eps_x(self) -> float:
        return math.sin(self.theta) * math.cos(self.phi)

    @property
    def eps_y(self) -> float:
        return math.sin(self.theta) * math.sin(self.phi)

    @property
    def eps_z(self) -> float:
        return math.cos(self.theta)


def theta_from_uniform(eps: float) -> float:
    """Quantile function of the (3/8)(1 + cos^2 t) sin t polar density."""
    u = 2.0 - 4.0 * eps + math.sqrt(5.0 - 16.0 * eps + 16.0 * eps * eps)
    c = np.cbrt(u) - 1.0 / np.cbrt(u)
    return math.acos(min(1.0, max(-1.0, float(c))))


def sample_direction(rng: np.random.Generator) -> EmissionDirection:
    """Draw one emission direction (phi first, then the polar variate)."""
    phi = 2.0 * math.pi * rng.random()
    theta = theta_from_uniform(rng.random())
    return EmissionDirection(theta=theta, phi=phi)


@dataclass(frozen=True)
class JumpKick:
    """Recoil kick parameters for one emission event."""

    mu: float
    beta: float
    direction: EmissionDirection

    @property
    def b_x(self) -> float:
        return self.mu * self.direction.eps_x

    @property
    def b_y(self) -> float:
        return self.mu * self.direction.eps_y

    @property
    def kappa_x(self) -> float:
        return self.b_x * math.sqrt(self.beta / 2.0)

    @property
    def kappa_y(self) -> float:
        return self.b_y * math.sqrt(self.beta / 2.0)


@lru_cache(maxsize=None)
def _displacement_plan(N: int):
    """Index arrays for the terminating G sum on an N x N matrix."""
    lg = gammaln(np.arange(2 * N + 1, dtype=float) + 1.0)
    m_idx, n_idx, powers, const = [], [], [], []
    for m in range(N):
        for n in range(N):
            lo, hi = min(m, n), max(m, n)
            for j in range(lo + 1):
                m_idx.append(m)
                n_idx.append(n)
                powers.append(hi + lo - 2 * j)
                const.append(
                    0.5 * (lg[hi] - lg[lo])
                    + lg[lo] - lg[j] - lg[lo - j]  # log C(lo, j)
                    - lg[hi - j]
                )
    return (
        np.array(m_idx),
        np.array(n_idx),
        np.array(powers),
        np.array(const),
    )


def displacement_matrix(b: float, beta: float, N: int) -> np.ndarray:
    """G(m, n, b) = <m|e^(i b X)|n> for m, n < N."""
    if not math.isfinite(b):
        raise ValidationError(f"b must be finite, got {b}")
    if b == 0.0:
        return np.eye(N, dtype=np.complex128)
    kappa = b * math.sqrt(beta / 2.0)
    m_idx, n_idx, powers, const = _displacement_plan(N)
    # (i kappa)^p split into magnitude (log space) and exact unit phases
    phase_table = (1j * math.copysign(1.0, kappa)) ** np.arange(2 * N + 1)
    terms = np.exp(const + powers * math.log(abs(kappa))) * phase_table[powers]
    G = np.zeros((N, N), dtype=np.complex128)
    np.add.at(G, (m_idx, n_idx), terms)
    G *= math.exp(-0.5 * kappa * kappa)
    return G


def kick_position_matrix(b: float, beta: float, N: int) -> np.ndarray:
    """F(m, n, b) = <m| X e^(i b X) |n> via the ladder identity."""
    G_ext = displacement_matrix(b, beta, N + 1)
    return _position_weighted(G_ext, beta, N)


def _position_weighted(G_ext: np.ndarray, beta: float, N: int) -> np.ndarray:
    m = np.arange(N)
    F = np.sqrt(m + 1.0)[:, None] * G_ext[1 : N + 1, :N]
    F[1:] += np.sqrt(m[1:])[:, None] * G_ext[: N - 1, :N]
    return math.sqrt(beta / 2.0) * F


@dataclass(frozen=True)
class JumpMatrices:
    """Per-event displacement (G) and position-weighted (F) matrices.

    All four are N x N; the F's are assembled from G's built on an
    (N+1) basis so the ladder identity never reads past the cutoff.
    """

    Gx: np.ndarray
    Gy: np.ndarray
    Fx: np.ndarray
    Fy: np.ndarray


def jump_matrices(kick: JumpKick, N: int) -> JumpMatrices:
    """Matrices for one emission event.

    Built fresh per event: b varies continuously with the direction, so
    caching across directions would be wrong.
    """
    Gx_ext = displacement_matrix(kick.b_x, kick.beta, N + 1)
    Gy_ext = displacement_matrix(kick.b_y, kick.beta, N + 1)
    return JumpMatrices(
        Gx=Gx_ext[:N, :N],
        Gy=Gy_ext[:N, :N],
        Fx=_position_weighted(Gx_ext, kick.beta, N),
        Fy=_position_weighted(Gy_ext, kick.beta, N),
    )


def apply_jump(state: TruncatedState, kick: JumpKick) -> TruncatedState:
    """Apply the jump operator and renormalize.

    B = Fx A Gy^T + i Gx A Fy^T is the separable realization of
    (X + iY) e^(i mu (eps_x X + eps_y Y)).  A post-jump squared norm
    below 1e-12 of the incoming one means the state was annihilated at
    the truncation boundary.
    """
    pre2 = state.norm2
    if pre2 <= 0.0:
        raise InvalidStateError("cannot jump a zero-norm state")
    m = jump_matrices(kick, state.cutoff)
    B = m.Fx @ state.coeffs @ m.Gy.T + 1j * (m.Gx @ state.coeffs @ m.Fy.T)
    post2 = float(np.vdot(B, B).real)
    if post2 <= _DEGENERATE_NORM2_RATIO * pre2:
        raise DegenerateJumpError(
            f"jump annihilated the state (norm^2 ratio {post2 / pre2:.3e}); "
            "the trajectory should be flagged"
        )
    return state.with_coeffs(B / math.sqrt(post2))
