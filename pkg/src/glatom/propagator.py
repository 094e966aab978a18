"""Analytic non-unitary propagator between jumps, via SU(1,1) disentangling.

Per mode the generator is quadratic,

    U(tau) = exp(-i tau [(1 - delta) a+a - (delta/2)(a+^2 + a^2)]),

with delta = i*beta*eta.  Writing the exponent as a0 K0 + a+ K+ + a- K-
over the SU(1,1) basis K0 = (a+a + 1/2)/2, K+ = a+^2/2, K- = a^2/2
(which absorbs a zero-point phase, restored below) gives the ordered
product

    exp(g+ K+) exp(g0 K0) exp(g- K-).

With the su(1,1) algebra [K0, K+-] = +-K+-, [K+, K-] = -2 K0, the
disentangling flow equations are

    dg+/de = a+ + a0 g+ + a- g+^2,  dg0/de = a0 + 2 a- g+,
    dg-/de = a- e^(g0),

integrated from g(0) = 0 to e = 1, whose closed-form solution is

    g+- = a+- tan(gamma) / (gamma - (a0/2) tan(gamma))
    g0  = -2 log[cos(gamma) - (a0/(2 gamma)) sin(gamma)]
    gamma^2 = (1 - 2 delta) tau^2,
    a0 = -2i tau (1 - delta),  a+ = a- = i tau delta.

The number-basis element of the ordered product is a terminating sum
(evaluated here per term in log space),

    <m|U|n> = e^(g0/4) sqrt(n! m!) sum_j  (g-/2)^j (g+/2)^k e^(g0 l / 2)
                                          / (j! k! l!),

with Delta = (n - m)/2, k = j - Delta >= 0, l = n - 2j >= 0: j counts
lowering pairs taken from the ket, k raising pairs landing on the bra.
Elements with n - m odd vanish (parity conservation), and g+ = g- for
this generator makes the matrix symmetric.  The stored per-mode matrix
carries the extra e^(+i tau (1-delta)/2) so that it equals the plain
matrix exponential above; the single 2D prefactor e^(-i tau (1-delta))
(which carries the real decay e^(-tau beta eta)) is kept separately and
applied once per application to a two-mode state.

The log in g0 is branch-sensitive (e^(g0/4) appears); it is unwrapped by
continuity in tau from g0(0) = 0.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from .errors import (
    InternalConsistencyError,
    NumericRangeError,
    SingularPropagatorError,
    ValidationError,
)
from .fock2d import DimensionlessParams, TruncatedState

_SINGULARITY_FLOOR = 1e-12


@dataclass(frozen=True)
class DisentangledCoeffs:
    """Ordered-product coefficients for one (tau, delta)."""

    tau: float
    delta: complex
    gamma: complex
    g_plus: complex
    g_minus: complex
    g_zero: complex


def disentangle(tau: float, delta: complex) -> DisentangledCoeffs:
    """Disentangling coefficients, continuous in tau from the identity."""
    if tau < 0:
        raise ValidationError(f"tau must be nonnegative, got {tau}")
    if tau == 0.0:
        return DisentangledCoeffs(0.0, delta, 0.0 + 0.0j, 0j, 0j, 0j)

    s = cmath.sqrt(1.0 - 2.0 * delta)  # gamma = s * tau
    gamma = s * tau
    a_pm = 1j * tau * delta
    ratio = -1j * (1.0 - delta) / s  # a0 / (2 gamma), independent of tau

    # Walk tau in steps small enough to unwrap the argument of the log.
    n_steps = 1 + int(abs(gamma))
    taus = tau * np.arange(1, n_steps + 1) / n_steps
    gammas = s * taus
    w_path = np.cos(gammas) - ratio * np.sin(gammas)
    if np.min(np.abs(w_path)) < _SINGULARITY_FLOOR:
        bad = taus[int(np.argmin(np.abs(w_path)))]
        raise SingularPropagatorError(
            f"focal singularity: cos(gamma) - (a0/(2 gamma)) sin(gamma) "
            f"vanishes near tau = {bad:.6g} (delta = {delta})"
        )
    args = np.unwrap(np.concatenate(([0.0], np.angle(w_path))))
    w = w_path[-1]
    g_zero = -2.0 * complex(math.log(abs(w)), args[-1])

    sing = cmath.sin(gamma) / gamma if abs(gamma) > 1e-6 else 1.0 - gamma * gamma / 6.0
    g_pm = a_pm * sing / w  # a tan(g)/(g - (a0/2) tan(g)) without the tan blow-up
    return DisentangledCoeffs(tau, delta, gamma, g_pm, g_pm, g_zero)


@dataclass(frozen=True)
class PropagatorMatrix:
    """Per-mode matrix U_mn plus the single 2D prefactor."""

    cutoff: int
    tau: float
    delta: complex
    elements: np.ndarray = field(repr=False)
    global_phase: complex = 1.0 + 0.0j

    def __post_init__(self):
        self.elements.flags.writeable = False


@lru_cache(maxsize=None)
def _term_plan(N: int):
    """Flattened (pair, j)-term index arrays for the matrix-element sum.

    Only pairs with m <= n and even n - m are enumerated; the matrix is
    symmetric (a+ and a- enter with the same coefficient).
    """
    lg = gammaln(np.arange(4 * N + 1, dtype=float) + 1.0)
    out_m, out_n, js, ks, ls, const = [], [], [], [], [], []
    for n in range(N):
        for m in range(n % 2, n + 1, 2):
            d = (n - m) // 2
            for j in range(d, n // 2 + 1):
                k = j - d
                l = n - 2 * j
                out_m.append(m)
                out_n.append(n)
                js.append(j)
                ks.append(k)
                ls.append(l)
                const.append(0.5 * (lg[n] + lg[m]) - lg[j] - lg[k] - lg[l])
    return (
        np.array(out_m),
        np.array(out_n),
        np.array(js, dtype=float),
        np.array(ks, dtype=float),
        np.array(ls, dtype=float),
        np.array(const),
    )


def propagator_matrix(coeffs: DisentangledCoeffs, N: int) -> PropagatorMatrix:
    """Per-mode N x N matrix realizing the ordered-product element."""
    if N < 2:
        raise ValidationError(f"cutoff must be >= 2, got {N}")
    tau, delta = coeffs.tau, coeffs.delta
    pref = cmath.exp(1j * tau * (1.0 - delta) / 2.0 + coeffs.g_zero / 4.0)
    half_g0 = coeffs.g_zero / 2.0

    if abs(coeffs.g_plus) == 0.0 and abs(coeffs.g_minus) == 0.0:
        # Harmonic (delta = 0) limit: diagonal phases only.
        diag = pref * np.exp(half_g0 * np.arange(N))
        elements = np.diag(diag)
    else:
        m_idx, n_idx, js, ks, ls, const = _term_plan(N)
        log_minus = cmath.log(coeffs.g_minus / 2.0)
        log_plus = cmath.log(coeffs.g_plus / 2.0)
        terms = np.exp(const + js * log_minus + ks * log_plus + ls * half_g0)
        elements = np.zeros((N, N), dtype=np.complex128)
        np.add.at(elements, (m_idx, n_idx), terms)
        elements *= pref
        # g+ = g- makes the matrix symmetric; mirror the m <= n triangle.
        lower = np.tril_indices(N, -1)
        elements[lower] = elements.T[lower]

    if not np.isfinite(elements).all():
        raise NumericRangeError(
            f"propagator elements overflowed at tau = {tau}, delta = {delta}"
        )
    phase2 = cmath.exp(-1j * tau * (1.0 - delta))
    return PropagatorMatrix(N, tau, delta, elements, phase2)


def propagator_for(tau: float, delta: complex, N: int) -> PropagatorMatrix:
    return propagator_matrix(disentangle(tau, delta), N)


def apply(U: PropagatorMatrix, state: TruncatedState) -> TruncatedState:
    """Two-mode application B = phase * (U A U^T)."""
    if U.cutoff != state.cutoff:
        raise ValidationError(
            f"cutoff mismatch: propagator {U.cutoff}, state {state.cutoff}"
        )
    B = U.global_phase * (U.elements @ state.coeffs @ U.elements.T)
    return state.with_coeffs(B)


def evolved_norm2(U: PropagatorMatrix, coeffs: np.ndarray) -> float:
    """Squared norm of (phase * U A U^T) without building a state object."""
    B = U.elements @ coeffs @ U.elements.T
    return float(np.vdot(B, B).real) * abs(U.global_phase) ** 2


class PropagatorCache:
    """Memoized propagators for one (delta, N), keyed by quantized tau.

    Intended for the repeated lattice segment lengths of the trajectory
    loop; arbitrary root-search times should use propagator_for directly.
    Reads dominate; inserts are idempotent, so sharing across workers is
    safe.
    """

    def __init__(self, delta: complex, N: int):
        self.delta = delta
        self.N = N
        self._store: dict[float, PropagatorMatrix] = {}

    @staticmethod
    def _key(tau: float) -> float:
        return round(tau, 12)

    def get(self, tau: float) -> PropagatorMatrix:
        key = self._key(tau)
        U = self._store.get(key)
        if U is None:
            U = propagator_for(tau, self.delta, self.N)
            self._store[key] = U
        return U


def waiting_time(
    state: TruncatedState,
    zeta: float,
    params: DimensionlessParams,
    tau_max: float,
    convention: str = "standard",
    rtol: float = 1e-8,
) -> float | None:
    """Time at which the decaying survival probability crosses zeta.

    survival(tau) = <Psi|U+U|Psi> with the state normalized at entry;
    the "literal" convention reads the threshold as survival^2 = zeta.
    Returns None when no crossing occurs before tau_max.
    """
    if not 0.0 < zeta < 1.0:
        raise ValidationError(f"zeta must lie in (0, 1), got {zeta}")
    if convention not in ("standard", "literal"):
        raise ValidationError(f"unknown survival convention {convention!r}")
    n2 = state.norm2
    if abs(n2 - 1.0) > 1e-9:
        raise ValidationError(
            f"waiting_time requires a normalized state, norm^2 = {n2:.12g}"
        )
    thr = zeta if convention == "standard" else math.sqrt(zeta)
    delta, N = params.delta, state.cutoff
    A = state.coeffs

    def survival(tau: float) -> float:
        s = evolved_norm2(propagator_for(tau, delta, N), A)
        if s > 1.0 + 1e-9:
            raise InternalConsistencyError(
                f"survival {s:.12g} exceeds 1 at tau = {tau:.6g}; "
                "norm decay is not monotone"
            )
        return s

    s_end = survival(tau_max)
    if s_end > thr:
        return None
    if s_end == thr:
        return tau_max
    return float(
        brentq(lambda t: survival(t) - thr, 0.0, tau_max, rtol=rtol, xtol=1e-14)
    )
