"""Two-mode truncated Fock space: states, operators, observables.

Conventions (dimensionless, beta is the rescaled Planck constant):

    X = sqrt(beta/2) (a + a+)        P = i sqrt(beta/2) (a+ - a)
    [X, P] = i beta                  L = i beta (a_x a_y+ - a_x+ a_y)

A two-mode state is stored as a complex coefficient matrix A[n_x, n_y]
over Fock levels 0..N-1 per mode.  Single-mode operators act on the x
index by left multiplication and on the y index by right multiplication
with the transpose, so (P_x tensor Q_y) A = P @ A @ Q.T.

All operators here are the truncated N x N matrices; Hermiticity (and
hence variance nonnegativity) is exact under truncation because the
truncated matrix of a+ is the conjugate transpose of the truncated a.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import InvalidStateError, TruncationError, ValidationError

_NORM_DEFICIT_MAX = 1e-4  # coherent preparation rejected beyond this


@dataclass(frozen=True)
class DimensionlessParams:
    """The dimensionless control set: beta, eta, mu (delta derived)."""

    beta: float
    eta: float
    mu: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if self.eta < 0:
            raise ValidationError(f"eta must be nonnegative, got {self.eta}")
        if self.mu < 0:
            raise ValidationError(f"mu must be nonnegative, got {self.mu}")

    @property
    def delta(self) -> complex:
        """Complex dissipation parameter, delta = i*beta*eta exactly."""
        return 1j * self.beta * self.eta


@dataclass(frozen=True)
class TruncatedState:
    """Two-mode state A[n_x, n_y] with cutoff N and scale beta."""

    cutoff: int
    beta: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.cutoff < 2:
            raise ValidationError(f"cutoff must be >= 2, got {self.cutoff}")
        if self.beta <= 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        a = np.array(self.coeffs, dtype=np.complex128, order="C")
        if a.shape != (self.cutoff, self.cutoff):
            raise ValidationError(
                f"coeffs shape {a.shape} does not match cutoff {self.cutoff}"
            )
        if not np.isfinite(a).all():
            raise InvalidStateError("state has non-finite coefficients")
        a.flags.writeable = False
        object.__setattr__(self, "coeffs", a)

    @property
    def norm2(self) -> float:
        """Squared norm sum |A|^2 (decays under non-unitary evolution)."""
        return float(np.vdot(self.coeffs, self.coeffs).real)

    def normalized(self) -> "TruncatedState":
        n2 = self.norm2
        if n2 <= 0.0:
            raise InvalidStateError("cannot normalize a zero-norm state")
        return TruncatedState(self.cutoff, self.beta, self.coeffs / math.sqrt(n2))

    def with_coeffs(self, coeffs: np.ndarray) -> "TruncatedState":
        return TruncatedState(self.cutoff, self.beta, coeffs)


@dataclass(frozen=True)
class ObservableRecord:
    """Means/variances of X, Y, Px, Py, L at one sample time."""

    tau: float
    mean_x: float
    mean_y: float
    mean_px: float
    mean_py: float
    var_x: float
    var_y: float
    var_px: float
    var_py: float
    mean_L: float
    mean_L2: float
    var_L: float
    jump_count: int = 0


@lru_cache(maxsize=None)
def lowering(N: int) -> np.ndarray:
    """Truncated single-mode lowering operator a, shape (N, N)."""
    a = np.zeros((N, N))
    n = np.arange(1, N)
    a[n - 1, n] = np.sqrt(n)
    a.flags.writeable = False
    return a


def position_op(N: int, beta: float) -> np.ndarray:
    a = lowering(N)
    return math.sqrt(beta / 2.0) * (a + a.T)


def momentum_op(N: int, beta: float) -> np.ndarray:
    a = lowering(N)
    return 1j * math.sqrt(beta / 2.0) * (a.T - a)


def coherent_amplitudes(x0: float, y0: float, px0: float, py0: float, beta: float):
    """Per-mode coherent amplitudes alpha = (pos + i*mom)/sqrt(2*beta)."""
    s = math.sqrt(2.0 * beta)
    return complex(x0, px0) / s, complex(y0, py0) / s


def _coherent_column(alpha: complex, N: int) -> np.ndarray:
    # c_n = e^{-|a|^2/2} a^n / sqrt(n!), built by the stable running product
    c = np.empty(N, dtype=np.complex128)
    c[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, N):
        c[n] = c[n - 1] * alpha / math.sqrt(n)
    return c


def make_coherent(
    x0: float,
    y0: float,
    px0: float,
    py0: float,
    params: DimensionlessParams,
    N: int,
) -> TruncatedState:
    """Product coherent state centered at (x0, y0) with momenta (px0, py0).

    Raises TruncationError when the cutoff loses more than 1e-4 of the
    norm; warns when |alpha|^2 is not well below N.
    """
    if N < 2:
        raise ValidationError(f"cutoff must be >= 2, got {N}")
    ax, ay = coherent_amplitudes(x0, y0, px0, py0, params.beta)
    for label, a in (("x", ax), ("y", ay)):
        if abs(a) ** 2 > N / 4.0:
            warnings.warn(
                f"|alpha_{label}|^2 = {abs(a) ** 2:.3g} is not small versus "
                f"cutoff N = {N}; truncation error may be significant",
                stacklevel=2,
            )
    coeffs = np.outer(_coherent_column(ax, N), _coherent_column(ay, N))
    deficit = 1.0 - float(np.vdot(coeffs, coeffs).real)
    if deficit > _NORM_DEFICIT_MAX:
        raise TruncationError(
            f"coherent state loses {deficit:.3e} of its norm at cutoff {N}; "
            "increase N or reduce the amplitude"
        )
    return TruncatedState(N, params.beta, coeffs)


def _apply_x(op: np.ndarray, A: np.ndarray) -> np.ndarray:
    return op @ A


def _apply_y(op: np.ndarray, A: np.ndarray) -> np.ndarray:
    return A @ op.T


def apply_L(state_coeffs: np.ndarray, beta: float) -> np.ndarray:
    """Apply L = i*beta*(a_x a_y+ - a_x+ a_y) to a coefficient matrix."""
    N = state_coeffs.shape[0]
    a = lowering(N)
    return 1j * beta * (a @ state_coeffs @ a - (a.T @ state_coeffs) @ a.T)


def angular_momentum_dense(N: int, beta: float) -> np.ndarray:
    """L as an N^2 x N^2 matrix on the kron(x, y) product basis."""
    a = lowering(N)
    eye = np.eye(N)
    ax = np.kron(a, eye)
    ay = np.kron(eye, a)
    return 1j * beta * (ax @ ay.conj().T - ax.conj().T @ ay)


def _mean_and_square(A: np.ndarray, OA: np.ndarray) -> tuple[float, float]:
    # <O> and <O^2> = ||O psi||^2 for Hermitian truncated O, unit-norm A
    mean = np.vdot(A, OA)
    second = np.vdot(OA, OA).real
    return mean.real, float(second)


def expectations(
    state: TruncatedState, tau: float = 0.0, jump_count: int = 0
) -> ObservableRecord:
    """Means and variances of X, Y, Px, Py, L on the normalized state."""
    n2 = state.norm2
    if n2 <= 0.0:
        raise InvalidStateError("expectations of a zero-norm state")
    A = state.coeffs / math.sqrt(n2)
    N, beta = state.cutoff, state.beta
    X = position_op(N, beta)
    P = momentum_op(N, beta)

    mx, x2 = _mean_and_square(A, _apply_x(X, A))
    my, y2 = _mean_and_square(A, _apply_y(X, A))
    mpx, px2 = _mean_and_square(A, _apply_x(P, A))
    mpy, py2 = _mean_and_square(A, _apply_y(P, A))
    LA = apply_L(A, beta)
    mL = np.vdot(A, LA).real
    L2 = float(np.vdot(LA, LA).real)

    def var(second: float, mean: float) -> float:
        return max(second - mean * mean, 0.0)

    return ObservableRecord(
        tau=tau,
        mean_x=mx,
        mean_y=my,
        mean_px=mpx,
        mean_py=mpy,
        var_x=var(x2, mx),
        var_y=var(y2, my),
        var_px=var(px2, mpx),
        var_py=var(py2, mpy),
        mean_L=mL,
        mean_L2=L2,
        var_L=var(L2, mL),
        jump_count=jump_count,
    )


def top_shell_probability(state: TruncatedState, shells: int = 2) -> float:
    """Probability in the top `shells` levels of either mode (normalized).

    This is the truncation-leakage sentinel: large values mean the
    cutoff is being felt.
    """
    n2 = state.norm2
    if n2 <= 0.0:
        raise InvalidStateError("top-shell probability of a zero-norm state")
    p = np.abs(state.coeffs) ** 2 / n2
    k = state.cutoff - shells
    return float(p[k:, :].sum() + p[:k, k:].sum())


def oscillator_eigenfunctions(q: np.ndarray, N: int, beta: float) -> np.ndarray:
    """psi_n(q) for n = 0..N-1, shape (N, len(q)).

    Normalized oscillator eigenfunctions with width set by beta:
    psi_n(q) = (pi*beta)^(-1/4) (2^n n!)^(-1/2) H_n(q/sqrt(beta)) e^(-q^2/(2 beta)).
    Evaluated by the stable recurrence on the normalized functions.
    """
    q = np.asarray(q, dtype=float)
    x = q / math.sqrt(beta)
    out = np.empty((N, q.size))
    out[0] = math.pi ** (-0.25) * np.exp(-0.5 * x * x)
    if N > 1:
        out[1] = math.sqrt(2.0) * x * out[0]
    for n in range(2, N):
        out[n] = x * math.sqrt(2.0 / n) * out[n - 1] - math.sqrt(
            (n - 1) / n
        ) * out[n - 2]
    return out * beta ** (-0.25)


def position_density(
    state: TruncatedState, x_grid: np.ndarray, y_grid: np.ndarray
) -> np.ndarray:
    """|Psi(x, y)|^2 on the grid, rows indexed by x, columns by y."""
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)
    if not (np.all(np.isfinite(x_grid)) and np.all(np.isfinite(y_grid))):
        raise ValidationError("grid must be finite")
    A = state.normalized().coeffs
    hx = oscillator_eigenfunctions(x_grid, state.cutoff, state.beta)
    hy = oscillator_eigenfunctions(y_grid, state.cutoff, state.beta)
    psi = hx.T @ A @ hy
    return np.abs(psi) ** 2
