"""Acceptance suite: one test per criterion, each printing PASS/FAIL.

Heavy ensembles are shared through module-scoped fixtures.  The full
figure-level run (N=40, tau <= 80, 300 trajectories) takes about a
minute on two cores and can be skipped with GLATOM_SKIP_FULL=1; the
reduced variant always runs.

Two sub-criteria are expected to fail at the pinned benchmark
dissipation eta = 0.0125, and the failures are reported honestly rather
than papered over; see the assertion messages and the companion
evidence tests, which demonstrate that both encode true statements
about the model that only manifest at the stronger dissipation
eta = Gamma/(4 Delta beta) = 1/3 implied by the quoted atomic numbers
(figure-level interior maximum) or hold exactly but below Monte-Carlo
resolution (analytic-variance bound).
"""

import math
import os

import numpy as np
import pytest
from scipy.stats import chisquare, spearmanr

from glatom.caldeira_leggett import CLParams, cl_variance
from glatom.engine import EnsembleConfig, run_ensemble, run_trajectory
from glatom.fock2d import DimensionlessParams, expectations, make_coherent
from glatom.params import benchmark_params, cs_preset, derive
from glatom.propagator import propagator_for
from glatom.recoil import displacement_matrix, kick_position_matrix, sample_direction, theta_from_uniform
from oracles import MasterEquationOracle, displacement_expm, mode_propagator_expm

BENCH = benchmark_params()  # beta=0.25, eta=0.0125, mu=2.310
SKIP_FULL = os.environ.get("GLATOM_SKIP_FULL") == "1"


def report(criterion: str, passed: bool, detail: str):
    print(f"\nACCEPTANCE {criterion}: {'PASS' if passed else 'FAIL'} - {detail}")


def series(res, field):
    return np.array([getattr(r, field) for r in res.series])


# ---------------------------------------------------------------- fixtures

@pytest.fixture(scope="module")
def sim1_reduced_50():
    cfg = EnsembleConfig(
        params=BENCH, cutoff=24, n_traj=50, tau_max=40.0, sample_dt=0.25, seed=2024
    )
    return cfg, run_ensemble(cfg, threads=2)


@pytest.fixture(scope="module")
def sim1_reduced_300():
    cfg = EnsembleConfig(
        params=BENCH, cutoff=24, n_traj=300, tau_max=40.0, sample_dt=0.25, seed=420
    )
    return cfg, run_ensemble(cfg, threads=2)


@pytest.fixture(scope="module")
def sim1_full():
    if SKIP_FULL:
        pytest.skip("full figure-level run disabled by GLATOM_SKIP_FULL=1")
    cfg = EnsembleConfig(
        params=BENCH, cutoff=40, n_traj=300, tau_max=80.0, sample_dt=0.25, seed=2024
    )
    return cfg, run_ensemble(cfg, threads=2)


@pytest.fixture(scope="module")
def unraveling():
    params = DimensionlessParams(beta=0.25, eta=0.05, mu=0.5)
    cfg = EnsembleConfig(
        params=params,
        cutoff=8,
        n_traj=2000,
        tau_max=5.0,
        sample_dt=0.25,
        seed=20240801,
    )
    res = run_ensemble(cfg, threads=2, keep_per_trajectory=True)
    oracle = MasterEquationOracle(params, 8)
    vac = make_coherent(0, 0, 0, 0, params, 8)
    rho0 = np.outer(vac.coeffs.reshape(-1), vac.coeffs.reshape(-1).conj())
    rhos = oracle.evolve(rho0, cfg.sample_times)
    return cfg, res, oracle, rhos


# ---------------------------------------------------------------- criteria

def test_propagator_oracle_equivalence():
    """N=16, delta=0.003125i, tau in {0.05, 0.1, 0.5, 1.0}: |U - expm| < 1e-6."""
    delta = BENCH.delta
    worst = 0.0
    for tau in (0.05, 0.1, 0.5, 1.0):
        U = propagator_for(tau, delta, 16).elements
        worst = max(worst, np.abs(U - mode_propagator_expm(tau, delta, 16, pad=8)).max())
    report("propagator-oracle", worst < 1e-6, f"max elementwise error {worst:.3e} (tol 1e-6)")
    assert worst < 1e-6


def test_unitary_limit():
    """eta=0: norm conserved to 1e-10 over tau=50; <X>(tau) = cos(tau) to 1e-6."""
    params = DimensionlessParams(beta=0.25, eta=0.0, mu=0.0)
    cfg = EnsembleConfig(
        params=params,
        cutoff=16,
        n_traj=1,
        tau_max=50.0,
        sample_dt=0.25,
        initial=(1.0, 0.0, 0.0, 0.0),
        seed=1,
    )
    tr = run_trajectory(cfg, 0)
    norm_err = abs(tr.final_norm2 - 1.0)
    mean_x = np.array([r.mean_x for r in tr.records])
    x_err = np.abs(mean_x - np.cos(cfg.sample_times)).max()
    ok = norm_err < 1e-10 and x_err < 1e-6 and len(tr.jump_times) == 0
    report(
        "unitary-limit",
        ok,
        f"norm drift {norm_err:.2e} (tol 1e-10), max |<X> - cos tau| {x_err:.2e} (tol 1e-6)",
    )
    assert ok


def test_jump_matrix_oracles():
    """100 random (m, n, b), |b| <= 3, N=32: G vs expm and F vs derivative, 1e-7."""
    beta = BENCH.beta
    rng = np.random.default_rng(61)
    worst_g = worst_f = 0.0
    h = 1e-5
    for _ in range(100):
        b = rng.uniform(-3, 3)
        m, n = rng.integers(0, 32, size=2)
        G = displacement_matrix(b, beta, 32)
        worst_g = max(worst_g, abs(G[m, n] - displacement_expm(b, beta, 32)[m, n]))
        F = kick_position_matrix(b, beta, 32)
        Fd = (
            -1j
            * (displacement_matrix(b + h, beta, 32) - displacement_matrix(b - h, beta, 32))
            / (2 * h)
        )
        worst_f = max(worst_f, abs((F - Fd)[m, n]))
    ok = worst_g < 1e-7 and worst_f < 1e-7
    report(
        "jump-matrix-oracles",
        ok,
        f"G vs expm {worst_g:.3e}, F vs finite-difference {worst_f:.3e} (tol 1e-7)",
    )
    assert ok


def test_momentum_kick_law():
    """exp(i mu eps_x X) shifts <Px> by 0.5775 eps_x, tol 1e-4."""
    worst = 0.0
    for eps_x in (1.0, -1.0, 0.5, -0.25, 0.1):
        s = make_coherent(0.3, -0.4, 0.2, 0.5, BENCH, 32)
        G = displacement_matrix(BENCH.mu * eps_x, BENCH.beta, 32)
        before = expectations(s).mean_px
        after = expectations(s.with_coeffs(G @ s.coeffs)).mean_px
        worst = max(worst, abs(after - before - 0.5775 * eps_x))
    report("momentum-kick", worst < 1e-4, f"max |shift - 0.5775 eps| = {worst:.2e} (tol 1e-4)")
    assert worst < 1e-4


def test_emission_sampler():
    """<cos^2 theta> = 0.400 +- 0.002 over 1e6 draws; chi^2 p > 0.001; quantiles."""
    q_err = max(
        abs(theta_from_uniform(0.0) - 0.0),
        abs(theta_from_uniform(0.5) - math.pi / 2),
        abs(theta_from_uniform(1.0) - math.pi),
    )
    rng = np.random.default_rng(424242)
    thetas = np.array([sample_direction(rng).theta for _ in range(10**6)])
    c2 = float(np.mean(np.cos(thetas) ** 2))
    edges = np.linspace(0.0, math.pi, 51)
    observed, _ = np.histogram(thetas, bins=edges)
    c = np.cos(edges)
    expected = np.diff(0.5 - (3 * c + c**3) / 8.0) * thetas.size
    _, pval = chisquare(observed, expected)
    ok = abs(c2 - 0.400) <= 0.002 and pval > 0.001 and q_err < 1e-7
    report(
        "emission-sampler",
        ok,
        f"<cos^2> = {c2:.4f} (0.400 +- 0.002), chi2 p = {pval:.3f} (> 0.001), "
        f"quantile error {q_err:.1e}",
    )
    assert ok


def test_unraveling_equivalence(unraveling):
    """2000 trajectories vs density-matrix integrator: 5 channels within 3 SE."""
    cfg, res, oracle, rhos = unraveling
    n = res.n_traj_effective
    worst = 0.0
    worst_at = ""
    for c in ("x", "y", "px", "py", "L"):
        means = res.per_traj_means[c]
        seconds = res.per_traj_seconds[c]
        mean_hat = means.mean(axis=0)
        var_hat = seconds.mean(axis=0) - mean_hat**2
        se_mean = means.std(axis=0, ddof=1) / math.sqrt(n)
        batches = np.array_split(np.arange(n), 20)
        var_b = np.array(
            [seconds[b].mean(axis=0) - means[b].mean(axis=0) ** 2 for b in batches]
        )
        se_var = var_b.std(axis=0, ddof=1) / math.sqrt(len(batches))
        om = np.array([oracle.observables(r)[f"mean_{c}"] for r in rhos])
        ov = np.array([oracle.observables(r)[f"var_{c}"] for r in rhos])
        zm = np.abs(mean_hat - om)[1:] / np.maximum(se_mean[1:], 1e-12)
        zv = np.abs(var_hat - ov)[1:] / np.maximum(se_var[1:], 1e-12)
        for z, kind in ((zm.max(), "mean"), (zv.max(), "var")):
            if z > worst:
                worst, worst_at = z, f"{kind}_{c}"
    report(
        "unraveling-equivalence",
        worst < 3.0,
        f"worst |simulated - oracle| = {worst:.2f} SE at {worst_at} (tol 3 SE), "
        f"{n} trajectories, {len(rhos)} sample times",
    )
    assert worst < 3.0


def test_unraveling_error_scales_like_root_n(unraveling):
    """RMS deviation from the oracle shrinks ~ 1/sqrt(n_traj)."""
    cfg, res, oracle, rhos = unraveling
    om = {
        c: np.array([oracle.observables(r)[f"mean_{c}"] for r in rhos])
        for c in ("x", "y", "px", "py", "L")
    }

    def rms_error(n):
        errs = []
        for c in om:
            errs.append(res.per_traj_means[c][:n].mean(axis=0)[1:] - om[c][1:])
        return float(np.sqrt(np.mean(np.square(errs))))

    ratio = rms_error(250) / rms_error(2000)
    print(f"\nMC scaling: rms(250)/rms(2000) = {ratio:.2f} (sqrt(8) = 2.83)")
    assert 1.3 < ratio < 6.0


class TestFigureLevelReduced:
    """Mandated quick variant: N=24, tau <= 40, 50 trajectories."""

    def test_a_symmetry(self, sim1_reduced_50):
        cfg, res = sim1_reduced_50
        worst = max(
            np.max(
                np.abs(series(res, f"mean_{c}")[1:])
                / np.maximum(res.stderr_mean[c][1:], 1e-15)
            )
            for c in ("x", "y")
        )
        report("figure-reduced-a", worst <= 4.0, f"max |<X or Y>| = {worst:.2f} SE (tol 4)")
        assert worst <= 4.0

    def test_d_variance_dominates(self, sim1_reduced_50):
        cfg, res = sim1_reduced_50
        mL = series(res, "mean_L")
        dL = np.sqrt(series(res, "var_L"))
        frac = float(np.mean(dL[1:] > mL[1:]))
        report(
            "figure-reduced-d",
            frac == 1.0,
            f"dL > <L> at {frac:.0%} of sample times tau > 0 "
            "(tau = 0 is the exact vacuum where both vanish identically)",
        )
        assert frac == 1.0


@pytest.mark.skipif(SKIP_FULL, reason="GLATOM_SKIP_FULL=1")
class TestFigureLevelFull:
    """Benchmark-scale run: N=40, tau <= 80, 300 trajectories."""

    def test_a_symmetry(self, sim1_full):
        cfg, res = sim1_full
        worst = max(
            np.max(
                np.abs(series(res, f"mean_{c}")[1:])
                / np.maximum(res.stderr_mean[c][1:], 1e-15)
            )
            for c in ("x", "y")
        )
        report("figure-full-a", worst <= 4.0, f"max |<X or Y>| = {worst:.2f} SE (tol 4)")
        assert worst <= 4.0

    def test_b_heating(self, sim1_full):
        cfg, res = sim1_full
        dx = np.sqrt(series(res, "var_x"))
        rho, pval = spearmanr(cfg.sample_times, dx)
        flagged = int((res.truncation_series > 1e-3).sum())
        ok = dx[-1] > dx[0] and rho > 0.8 and pval < 1e-6
        report(
            "figure-full-b",
            ok,
            f"dX(80) = {dx[-1]:.4f} > dX(0) = {dx[0]:.4f}, Spearman rho = {rho:.3f} "
            f"(p = {pval:.1e}); {flagged} sample times above the 1e-3 "
            "truncation sentinel",
        )
        assert ok

    def test_c_angular_momentum_turnover(self, sim1_full):
        cfg, res = sim1_full
        mL = series(res, "mean_L")
        taus = cfg.sample_times
        i = int(np.argmax(mL))
        w = max(1, len(taus) // 10)
        final = float(mL[-w:].mean())
        interior = 0 < i < len(taus) - 1
        ok = interior and final < 0.5 * mL[i]
        report(
            "figure-full-c",
            ok,
            f"<L> max {mL[i]:.4f} at tau = {taus[i]:.2f} (interior: {interior}), "
            f"final-window mean {final:.4f} (needs < {0.5 * mL[i]:.4f})",
        )
        assert ok, (
            "No interior maximum with late decay at the pinned eta = 0.0125: the "
            "exact dynamics give d<L>/dtau = 2*eta*beta*<X^2+Y^2> >= 0, so <L> "
            "grows monotonically while the cutoff is unsaturated (top-two-shell "
            f"occupation stayed below {res.truncation_metric:.1e} here). The "
            "reference turnover emerges only at the dissipation the quoted atomic "
            "numbers imply, eta = Gamma/(4*Delta*beta) = 1/3, where the basis "
            "saturates; see "
            "test_evidence_interior_maximum_emerges_at_strong_dissipation."
        )

    def test_d_variance_dominates(self, sim1_full):
        cfg, res = sim1_full
        mL = series(res, "mean_L")
        dL = np.sqrt(series(res, "var_L"))
        frac = float(np.mean(dL[1:] > mL[1:]))
        report(
            "figure-full-d",
            frac == 1.0,
            f"dL > <L> at {frac:.0%} of sample times tau > 0",
        )
        assert frac == 1.0


class TestCaldeiraLeggett:
    def test_initial_variance_exact(self):
        p = CLParams(sigma_bar=0.35, eta_bar=0.0125, beta=0.25)
        ok = cl_variance(0.0, p) == 0.35**2
        report("caldeira-leggett-initial", ok, "cl_variance(0) == sigma_bar^2 bitwise")
        assert ok

    def test_analytic_below_simulated(self, sim1_reduced_300):
        cfg, res = sim1_reduced_300
        p = CLParams(sigma_bar=0.35, eta_bar=0.0125, beta=0.25)
        taus = cfg.sample_times
        mask = taus > 5.0
        sim_dx = np.sqrt(series(res, "var_x")[mask])
        ana_dx = np.sqrt(cl_variance(taus[mask], p))
        gap = sim_dx - ana_dx
        violations = int((gap < 0).sum())
        ok = violations == 0
        report(
            "caldeira-leggett-bound",
            ok,
            f"min(simulated - analytic) dX = {gap.min():+.4f} over tau > 5, "
            f"{violations} violation(s) of {mask.sum()} sample times "
            f"({res.n_traj_effective} trajectories)",
        )
        assert ok, (
            "The bound holds for the exact dynamics but with margins (+1.5e-4 "
            "to +2e-2 in dX; see test_evidence_exact_dynamics_dominate_analytic) "
            "far below Monte-Carlo resolution at the pinned eta = 0.0125: the "
            f"ensemble standard error here is ~4e-3 with {res.n_traj_effective} "
            "trajectories, so finite ensembles dip below the analytic curve "
            "near its breathing peaks (tau ~ 5-8) for any affordable ensemble "
            "size. At the dissipation implied by the quoted atomic numbers "
            "(eta = 1/3) the simulated variance exceeds the analytic curve "
            "thirty-fold and the bound is unambiguous."
        )


def test_parameter_diagnostics():
    """Cs block reproduces omega_s/2pi ~ 774 Hz within 5% and flags eta, mu."""
    scales = derive(cs_preset(), overrides=BENCH)
    f_hz = scales.omega_s / (2 * math.pi)
    rel = abs(f_hz - 774.0) / 774.0
    has_eta = any("eta" in d for d in scales.diagnostics)
    has_mu = any("mu" in d for d in scales.diagnostics)
    ok = rel < 0.05 and has_eta and has_mu
    report(
        "parameter-diagnostics",
        ok,
        f"omega_s/2pi = {f_hz:.1f} Hz ({rel:.1%} from 774), eta flagged: {has_eta}, "
        f"mu flagged: {has_mu}",
    )
    assert ok


# ------------------------------------------------------------------ evidence
# Not acceptance criteria: these demonstrate that the two red criteria
# above encode true statements that are only visible away from the
# pinned benchmark dissipation (turnover) or below MC resolution (bound).

@pytest.mark.skipif(SKIP_FULL, reason="GLATOM_SKIP_FULL=1")
def test_evidence_interior_maximum_emerges_at_strong_dissipation():
    params = DimensionlessParams(beta=0.25, eta=1.0 / 3.0, mu=2.310)
    cfg = EnsembleConfig(
        params=params, cutoff=40, n_traj=100, tau_max=80.0, sample_dt=0.5, seed=7
    )
    res = run_ensemble(cfg, threads=2)
    mL = series(res, "mean_L")
    taus = cfg.sample_times
    i = int(np.argmax(mL))
    w = len(taus) // 10
    final = float(mL[-w:].mean())
    interior = 0 < i < len(taus) - 1
    print(
        f"\nEVIDENCE turnover at eta=1/3: <L> max {mL[i]:.2f} at tau = {taus[i]:.1f}, "
        f"final-window mean {final:.2f}, truncation metric {res.truncation_metric:.2f}"
    )
    assert interior and final < 0.5 * mL[i]
    assert res.truncation_metric > 0.1  # the cutoff saturates, unlike eta=0.0125


def test_evidence_exact_dynamics_dominate_analytic():
    """Density-matrix (not MC) variance stays above the analytic curve."""
    orc = MasterEquationOracle(BENCH, 8)
    vac = make_coherent(0, 0, 0, 0, BENCH, 8)
    rho0 = np.outer(vac.coeffs.reshape(-1), vac.coeffs.reshape(-1).conj())
    times = np.linspace(0.0, 40.0, 161)
    rhos = orc.evolve(rho0, times)
    vx = np.array([orc.observables(r)["var_x"] for r in rhos])
    ana = cl_variance(times, CLParams(0.35, 0.0125, 0.25))
    mask = times > 5.0
    gap = np.sqrt(vx[mask]) - np.sqrt(ana[mask])
    print(
        f"\nEVIDENCE exact bound: min(exact - analytic) dX = {gap.min():+.5f} "
        f"at tau = {times[mask][np.argmin(gap)]:.2f}"
    )
    assert gap.min() > 0.0
