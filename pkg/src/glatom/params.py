"""Physical-to-dimensionless parameter conversion for the beam trap.

The dimensionless set (beta, eta, mu) fully controls the rescaled
dynamics; the physical route exists to connect lab numbers to it and is
deliberately diagnostic-heavy, because the benchmark Cs numbers are
mutually inconsistent (see derive()).  Formulas:

    omega_s^2 = 2 hbar Omega0^2 / (m Delta |nu|^2 w^2),  |nu|^2 = 1 + Gamma^2/(2 Delta^2)
    alpha_x   = sqrt(hbar / (beta m omega_s))
    alpha_p   = sqrt(hbar m omega_s / beta)
    eta       = Gamma / (4 Delta beta)
    mu        = k alpha_x,  k = 2 pi / lambda
    dP_r      = sqrt(beta) sqrt(hbar k^2 / (m omega_s))   (= mu * beta exactly)
    dX_r      = beta / (2 dP_r)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ValidationError
from .fock2d import DimensionlessParams

HBAR = 1.054571817e-34  # J s

# Benchmark dimensionless set used by both reference simulations.
BENCHMARK_BETA = 0.25
BENCHMARK_ETA = 0.0125
BENCHMARK_MU = 2.310


@dataclass(frozen=True)
class PhysicalParams:
    """Atom/beam inputs in SI units; beta is the chosen dimensionless scale."""

    mass: float  # kg
    wavelength: float  # m
    linewidth: float  # rad/s (Gamma)
    detuning: float  # rad/s (Delta)
    rabi: float  # rad/s (Omega_0)
    waist: float  # m
    beta: float

    def __post_init__(self):
        for name in ("mass", "wavelength", "linewidth", "detuning", "rabi", "waist", "beta"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                raise ValidationError(f"{name} must be positive and finite, got {v}")

    @property
    def wavenumber(self) -> float:
        return 2.0 * math.pi / self.wavelength

    @property
    def nu2(self) -> float:
        """|nu|^2 = 1 + Gamma^2 / (2 Delta^2)."""
        return 1.0 + self.linewidth**2 / (2.0 * self.detuning**2)

    def regime_warnings(self) -> list[str]:
        """Large-detuning sanity flags (warnings, never rejections)."""
        out = []
        if self.detuning < self.linewidth:
            out.append(
                f"detuning {self.detuning:.4g} rad/s below linewidth "
                f"{self.linewidth:.4g} rad/s: far-detuned limit is marginal"
            )
        if self.detuning < self.rabi:
            out.append(
                f"detuning {self.detuning:.4g} rad/s below Rabi frequency "
                f"{self.rabi:.4g} rad/s: adiabatic elimination is marginal"
            )
        return out


@dataclass(frozen=True)
class DerivedScales:
    """Everything derive() computes, plus human-readable diagnostics."""

    omega_s: float  # rad/s
    alpha_x: float  # m
    alpha_p: float  # kg m/s
    eta: float
    mu: float
    recoil_dp: float  # dimensionless momentum kick dP_r
    recoil_dx: float  # matching minimum-uncertainty width dX_r
    diagnostics: list[str] = field(default_factory=list)

    def report(self) -> str:
        lines = [
            f"omega_s        = {self.omega_s:.6g} rad/s  (omega_s/2pi = {self.omega_s / (2 * math.pi):.6g} Hz)",
            f"alpha_x        = {self.alpha_x:.6g} m",
            f"alpha_p        = {self.alpha_p:.6g} kg m/s",
            f"eta            = {self.eta:.6g}",
            f"mu             = {self.mu:.6g}",
            f"recoil dP_r    = {self.recoil_dp:.6g}  (= mu*beta)",
            f"recoil dX_r    = {self.recoil_dx:.6g}",
        ]
        if self.diagnostics:
            lines.append("diagnostics:")
            lines.extend(f"  - {d}" for d in self.diagnostics)
        return "\n".join(lines)


def cs_preset(beta: float = BENCHMARK_BETA) -> PhysicalParams:
    """The cesium benchmark block.

    Uses the physical Cs-133 mass 2.2069e-25 kg.  The benchmark tables
    quote 0.665e-25 kg, which is calcium's mass and is inconsistent with
    the quoted orbital frequency (derive() reports this when fed that
    mass).
    """
    gamma = 2.0 * math.pi * 5.3e6
    return PhysicalParams(
        mass=2.2069e-25,
        wavelength=657e-9,
        linewidth=gamma,
        detuning=3.0 * gamma,
        rabi=2.0 * math.pi * 5e6,
        waist=2e-5,
        beta=beta,
    )


def derive(
    physical: PhysicalParams,
    overrides: DimensionlessParams | None = None,
) -> DerivedScales:
    """Derive the trap scales and dimensionless set from physical inputs.

    When `overrides` is given (the dimensionless set the run will
    actually use), the diagnostics compare it against the derived
    values; an override always wins for simulation purposes.
    """
    p = physical
    omega_s = math.sqrt(
        2.0 * HBAR * p.rabi**2 / (p.mass * p.detuning * p.nu2 * p.waist**2)
    )
    alpha_x = math.sqrt(HBAR / (p.beta * p.mass * omega_s))
    alpha_p = math.sqrt(HBAR * p.mass * omega_s / p.beta)
    eta = p.linewidth / (4.0 * p.detuning * p.beta)
    mu = p.wavenumber * alpha_x
    recoil_dp = math.sqrt(p.beta) * math.sqrt(
        HBAR * p.wavenumber**2 / (p.mass * omega_s)
    )
    recoil_dx = p.beta / (2.0 * recoil_dp)

    diags = list(p.regime_warnings())
    _benchmark_diagnostics(p, omega_s, eta, mu, diags)
    if overrides is not None:
        for name, derived, chosen in (
            ("eta", eta, overrides.eta),
            ("mu", mu, overrides.mu),
        ):
            if not math.isclose(derived, chosen, rel_tol=0.05):
                diags.append(
                    f"override {name} = {chosen:.6g} differs from the derived "
                    f"{name} = {derived:.6g}; the override is used"
                )
        if overrides.beta != p.beta:
            diags.append(
                f"override beta = {overrides.beta:.6g} differs from the physical "
                f"block's beta = {p.beta:.6g}; the override is used"
            )

    return DerivedScales(
        omega_s=omega_s,
        alpha_x=alpha_x,
        alpha_p=alpha_p,
        eta=eta,
        mu=mu,
        recoil_dp=recoil_dp,
        recoil_dx=recoil_dx,
        diagnostics=diags,
    )


def _is_cs_block(p: PhysicalParams) -> bool:
    return math.isclose(p.wavelength, 657e-9, rel_tol=0.02) and math.isclose(
        p.linewidth, 2.0 * math.pi * 5.3e6, rel_tol=0.02
    )


def _benchmark_diagnostics(
    p: PhysicalParams, omega_s: float, eta: float, mu: float, diags: list[str]
) -> None:
    """Flag the documented inconsistencies of the benchmark Cs numbers."""
    if not _is_cs_block(p):
        return
    if not math.isclose(eta, BENCHMARK_ETA, rel_tol=0.2):
        diags.append(
            f"derived eta = Gamma/(4*Delta*beta) = {eta:.4g} contradicts the "
            f"benchmark eta = {BENCHMARK_ETA}; the benchmark dissipation rate "
            "cannot be reproduced from this Gamma, Delta, beta"
        )
    if not math.isclose(mu, BENCHMARK_MU, rel_tol=0.2):
        alpha_x = mu / p.wavenumber
        diags.append(
            f"derived mu = k*alpha_x = {mu:.4g} contradicts the benchmark "
            f"mu = {BENCHMARK_MU}; the benchmark recoil scale corresponds to a "
            f"wavelength of {2 * math.pi * alpha_x / BENCHMARK_MU:.3g} m, "
            f"not {p.wavelength:.3g} m"
        )
    if math.isclose(p.mass, 0.665e-25, rel_tol=0.02):
        f_hz = omega_s / (2.0 * math.pi)
        diags.append(
            f"mass {p.mass:.4g} kg is the calcium mass, not cesium's "
            "2.2069e-25 kg; with it the orbital frequency comes out "
            f"{f_hz:.4g} Hz instead of the benchmark ~774 Hz"
        )


def direct(beta: float, eta: float, mu: float) -> DimensionlessParams:
    """Dimensionless set passed through unchanged; delta = i*beta*eta."""
    return DimensionlessParams(beta=beta, eta=eta, mu=mu)


def benchmark_params() -> DimensionlessParams:
    """The dimensionless set both reference simulations use."""
    return direct(BENCHMARK_BETA, BENCHMARK_ETA, BENCHMARK_MU)
