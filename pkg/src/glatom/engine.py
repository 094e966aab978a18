"""Quantum-trajectory loop and ensemble statistics.

Each trajectory alternates analytic non-unitary evolution with sampled
recoil jumps: draw a uniform threshold zeta, evolve until the decaying
squared norm (the survival probability since the last jump) crosses it,
apply a jump in a sampled direction, renormalize, repeat.  Observables
are recorded on a normalized copy at fixed sample times; the stored
state keeps its decaying norm between jumps because that norm *is* the
waiting-time clock.

Evolution segments never straddle sample times, so the full-segment
propagator is built once per trajectory and reused from a cache.

Trajectory k's random stream is a pure function of (seed, k) via a
counter-based generator, so ensembles are reproducible under any
scheduling.  Ensemble reduction runs over fixed-size index chunks,
summed in index order, making results independent of worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateJumpError, EnsembleFailureError, ValidationError
from .fock2d import (
    DimensionlessParams,
    ObservableRecord,
    TruncatedState,
    expectations,
    make_coherent,
    position_density,
    top_shell_probability,
)
from .propagator import PropagatorCache, apply, propagator_for, waiting_time
from .recoil import JumpKick, apply_jump, sample_direction

CHANNELS = ("x", "y", "px", "py", "L")
_CHUNK = 16  # trajectories per reduction chunk, fixed for determinism


@dataclass(frozen=True)
class EnsembleConfig:
    params: DimensionlessParams
    cutoff: int
    n_traj: int
    tau_max: float
    sample_dt: float
    initial: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)
    seed: int = 0
    survival_convention: str = "standard"
    jump_bin_width: float = 5.0

    def __post_init__(self):
        if self.sample_dt <= 0:
            raise ValidationError(f"sample_dt must be positive, got {self.sample_dt}")
        if self.n_traj < 1:
            raise ValidationError(f"n_traj must be >= 1, got {self.n_traj}")
        if self.tau_max <= 0:
            raise ValidationError(f"tau_max must be positive, got {self.tau_max}")
        n = round(self.tau_max / self.sample_dt)
        if abs(n * self.sample_dt - self.tau_max) > 1e-9 * max(1.0, self.tau_max):
            raise ValidationError(
                f"tau_max = {self.tau_max} is not an integer multiple of "
                f"sample_dt = {self.sample_dt}"
            )
        if self.survival_convention not in ("standard", "literal"):
            raise ValidationError(
                f"unknown survival convention {self.survival_convention!r}"
            )
        if self.jump_bin_width <= 0:
            raise ValidationError("jump_bin_width must be positive")

    @property
    def n_steps(self) -> int:
        return round(self.tau_max / self.sample_dt)

    @property
    def sample_times(self) -> np.ndarray:
        return self.sample_dt * np.arange(self.n_steps + 1)


@dataclass
class TrajectoryResult:
    records: list[ObservableRecord]
    jump_times: np.ndarray
    top_shell: np.ndarray
    degenerate: bool = False
    final_norm2: float = float("nan")  # survival since the last jump


def _trajectory_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))
    )


def _draw_threshold(rng: np.random.Generator, convention: str) -> float:
    """Uniform zeta mapped to the squared-norm crossing level."""
    zeta = rng.random()
    while zeta == 0.0:
        zeta = rng.random()
    return zeta if convention == "standard" else math.sqrt(zeta)


def run_trajectory(
    config: EnsembleConfig,
    trajectory_index: int,
    on_sample=None,
    cache: PropagatorCache | None = None,
) -> TrajectoryResult:
    """One trajectory; a deterministic function of (config.seed, index).

    on_sample(step, state) is called at every sample time with the
    stored (unnormalized) state, for density accumulation.
    """
    params = config.params
    delta = params.delta
    N = config.cutoff
    dt = config.sample_dt
    rng = _trajectory_rng(config.seed, trajectory_index)
    if cache is None:
        cache = PropagatorCache(delta, N)

    state = make_coherent(*config.initial, params, N).normalized()
    threshold = _draw_threshold(rng, config.survival_convention)
    jump_times: list[float] = []
    records = [expectations(state, 0.0, 0)]
    tops = [top_shell_probability(state)]
    if on_sample is not None:
        on_sample(0, state)

    for step in range(1, config.n_steps + 1):
        t0 = (step - 1) * dt
        remaining = dt
        while True:
            U = cache.get(remaining) if remaining == dt else propagator_for(
                remaining, delta, N
            )
            cand = apply(U, state)
            if cand.norm2 > threshold:
                state = cand
                break
            # The crossing lies inside this segment: locate it, jump, go on.
            survival_now = state.norm2
            psi = state.normalized()
            rel = threshold / survival_now
            tau_j = waiting_time(psi, rel, params, remaining)
            if tau_j is None:  # rounding put the crossing at the boundary
                tau_j = remaining
            at_jump = apply(propagator_for(tau_j, delta, N), psi)
            direction = sample_direction(rng)
            try:
                state = apply_jump(
                    at_jump, JumpKick(params.mu, params.beta, direction)
                )
            except DegenerateJumpError:
                return TrajectoryResult(
                    records, np.array(jump_times), np.array(tops), degenerate=True
                )
            jump_times.append(t0 + (dt - remaining) + tau_j)
            threshold = _draw_threshold(rng, config.survival_convention)
            remaining = max(remaining - tau_j, 0.0)
        records.append(expectations(state, step * dt, len(jump_times)))
        tops.append(top_shell_probability(state))
        if on_sample is not None:
            on_sample(step, state)

    return TrajectoryResult(
        records, np.array(jump_times), np.array(tops), final_norm2=state.norm2
    )


@dataclass
class EnsembleResult:
    """Pooled ensemble statistics at the sample times."""

    config: EnsembleConfig
    series: list[ObservableRecord]
    stderr_mean: dict[str, np.ndarray]
    jump_histogram: np.ndarray
    jump_bin_edges: np.ndarray
    jumps_per_sample: np.ndarray
    truncation_series: np.ndarray
    truncation_metric: float
    n_traj_effective: int
    n_traj_degenerate: int
    per_traj_means: dict[str, np.ndarray] | None = None
    per_traj_seconds: dict[str, np.ndarray] | None = None


def _record_arrays(records: list[ObservableRecord]):
    """(means, seconds) per channel for one trajectory, arrays over time."""
    means = {
        "x": np.array([r.mean_x for r in records]),
        "y": np.array([r.mean_y for r in records]),
        "px": np.array([r.mean_px for r in records]),
        "py": np.array([r.mean_py for r in records]),
        "L": np.array([r.mean_L for r in records]),
    }
    seconds = {
        "x": np.array([r.var_x + r.mean_x**2 for r in records]),
        "y": np.array([r.var_y + r.mean_y**2 for r in records]),
        "px": np.array([r.var_px + r.mean_px**2 for r in records]),
        "py": np.array([r.var_py + r.mean_py**2 for r in records]),
        "L": np.array([r.mean_L2 for r in records]),
    }
    return means, seconds


def _new_accumulator(config: EnsembleConfig, keep: bool):
    nt = config.n_steps + 1
    n_bins = math.ceil(config.tau_max / config.jump_bin_width - 1e-9)
    return {
        "sum_mean": {c: np.zeros(nt) for c in CHANNELS},
        "sum_mean_sq": {c: np.zeros(nt) for c in CHANNELS},
        "sum_second": {c: np.zeros(nt) for c in CHANNELS},
        "hist": np.zeros(n_bins),
        "per_sample_jumps": np.zeros(nt),
        "top_sum": np.zeros(nt),
        "top_max": 0.0,
        "n_eff": 0,
        "n_degen": 0,
        "kept_means": {c: [] for c in CHANNELS} if keep else None,
        "kept_seconds": {c: [] for c in CHANNELS} if keep else None,
    }


def _merge_trajectory(acc, config: EnsembleConfig, tr: TrajectoryResult):
    if tr.degenerate:
        acc["n_degen"] += 1
        return
    means, seconds = _record_arrays(tr.records)
    for c in CHANNELS:
        acc["sum_mean"][c] += means[c]
        acc["sum_mean_sq"][c] += means[c] ** 2
        acc["sum_second"][c] += seconds[c]
        if acc["kept_means"] is not None:
            acc["kept_means"][c].append(means[c])
            acc["kept_seconds"][c].append(seconds[c])
    if tr.jump_times.size:
        edges = np.arange(acc["hist"].size + 1) * config.jump_bin_width
        acc["hist"] += np.histogram(tr.jump_times, bins=edges)[0]
        sample_edges = config.sample_dt * np.arange(config.n_steps + 1)
        acc["per_sample_jumps"][1:] += np.histogram(tr.jump_times, bins=sample_edges)[0]
    acc["top_sum"] += tr.top_shell
    acc["top_max"] = max(acc["top_max"], float(tr.top_shell.max()))
    acc["n_eff"] += 1


def _merge_accumulators(target, other):
    for c in CHANNELS:
        target["sum_mean"][c] += other["sum_mean"][c]
        target["sum_mean_sq"][c] += other["sum_mean_sq"][c]
        target["sum_second"][c] += other["sum_second"][c]
        if target["kept_means"] is not None:
            target["kept_means"][c].extend(other["kept_means"][c])
            target["kept_seconds"][c].extend(other["kept_seconds"][c])
    target["hist"] += other["hist"]
    target["per_sample_jumps"] += other["per_sample_jumps"]
    target["top_sum"] += other["top_sum"]
    target["top_max"] = max(target["top_max"], other["top_max"])
    target["n_eff"] += other["n_eff"]
    target["n_degen"] += other["n_degen"]


def _run_chunk(config: EnsembleConfig, k0: int, k1: int, keep: bool):
    acc = _new_accumulator(config, keep)
    cache = PropagatorCache(config.params.delta, config.cutoff)
    for k in range(k0, k1):
        _merge_trajectory(acc, config, run_trajectory(config, k, cache=cache))
    return acc


def run_ensemble(
    config: EnsembleConfig,
    threads: int = 1,
    keep_per_trajectory: bool = False,
) -> EnsembleResult:
    """Run the full ensemble and pool the statistics.

    Variances are the mixed-state (density-matrix) ones: mean over
    trajectories of <O^2> minus the square of the mean of <O>.
    """
    chunks = [
        (k0, min(k0 + _CHUNK, config.n_traj))
        for k0 in range(0, config.n_traj, _CHUNK)
    ]
    total = _new_accumulator(config, keep_per_trajectory)
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    _run_chunk,
                    [config] * len(chunks),
                    [c[0] for c in chunks],
                    [c[1] for c in chunks],
                    [keep_per_trajectory] * len(chunks),
                )
            )
    else:
        parts = [_run_chunk(config, k0, k1, keep_per_trajectory) for k0, k1 in chunks]
    for part in parts:  # fixed chunk order: deterministic reduction
        _merge_accumulators(total, part)

    n_eff = total["n_eff"]
    if n_eff == 0:
        raise EnsembleFailureError("all trajectories ended in degenerate jumps")

    series = []
    cum_jumps = np.cumsum(total["per_sample_jumps"])
    mean = {c: total["sum_mean"][c] / n_eff for c in CHANNELS}
    second = {c: total["sum_second"][c] / n_eff for c in CHANNELS}
    var = {c: np.maximum(second[c] - mean[c] ** 2, 0.0) for c in CHANNELS}
    times = config.sample_times
    for i, tau in enumerate(times):
        series.append(
            ObservableRecord(
                tau=float(tau),
                mean_x=mean["x"][i],
                mean_y=mean["y"][i],
                mean_px=mean["px"][i],
                mean_py=mean["py"][i],
                var_x=var["x"][i],
                var_y=var["y"][i],
                var_px=var["px"][i],
                var_py=var["py"][i],
                mean_L=mean["L"][i],
                mean_L2=second["L"][i],
                var_L=var["L"][i],
                jump_count=int(cum_jumps[i]),
            )
        )
    stderr = {
        c: np.sqrt(
            np.maximum(total["sum_mean_sq"][c] / n_eff - mean[c] ** 2, 0.0) / n_eff
        )
        for c in CHANNELS
    }
    kept_m = kept_s = None
    if keep_per_trajectory:
        kept_m = {c: np.array(total["kept_means"][c]) for c in CHANNELS}
        kept_s = {c: np.array(total["kept_seconds"][c]) for c in CHANNELS}
    return EnsembleResult(
        config=config,
        series=series,
        stderr_mean=stderr,
        jump_histogram=total["hist"],
        jump_bin_edges=np.arange(total["hist"].size + 1) * config.jump_bin_width,
        jumps_per_sample=total["per_sample_jumps"],
        truncation_series=total["top_sum"] / n_eff,
        truncation_metric=total["top_max"],
        n_traj_effective=n_eff,
        n_traj_degenerate=total["n_degen"],
        per_traj_means=kept_m,
        per_traj_seconds=kept_s,
    )


def _density_chunk(config, k0, k1, step_indices, x_grid, y_grid):
    sums = np.zeros((len(step_indices), x_grid.size, y_grid.size))
    count = 0
    cache = PropagatorCache(config.params.delta, config.cutoff)
    lookup = {s: i for i, s in enumerate(step_indices)}
    for k in range(k0, k1):
        buf = np.zeros_like(sums)

        def on_sample(step, state, _buf=buf):
            pos = lookup.get(step)
            if pos is not None:
                _buf[pos] += position_density(state, x_grid, y_grid)

        tr = run_trajectory(config, k, on_sample=on_sample, cache=cache)
        if not tr.degenerate:
            sums += buf
            count += 1
    return sums, count


def snapshot_density(
    config: EnsembleConfig,
    tau_list,
    x_grid: np.ndarray,
    y_grid: np.ndarray,
    threads: int = 1,
):
    """Ensemble-averaged position densities at the requested sample times.

    Runs the same deterministic trajectories as run_ensemble would,
    accumulating |Psi|^2 of the normalized state at each requested time;
    no states are stored.
    """
    times = config.sample_times
    step_indices = []
    for tau in tau_list:
        i = int(round(tau / config.sample_dt))
        if i < 0 or i > config.n_steps or abs(times[i] - tau) > 1e-9 * max(1.0, tau):
            raise ValidationError(
                f"requested density time {tau} is not on the sampling lattice"
            )
        if i in step_indices:
            raise ValidationError(f"duplicate density time {tau}")
        step_indices.append(i)
    x_grid = np.asarray(x_grid, dtype=float)
    y_grid = np.asarray(y_grid, dtype=float)

    chunks = [
        (k0, min(k0 + _CHUNK, config.n_traj))
        for k0 in range(0, config.n_traj, _CHUNK)
    ]
    if threads > 1 and len(chunks) > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(
                pool.map(
                    _density_chunk,
                    [config] * len(chunks),
                    [c[0] for c in chunks],
                    [c[1] for c in chunks],
                    [step_indices] * len(chunks),
                    [x_grid] * len(chunks),
                    [y_grid] * len(chunks),
                )
            )
    else:
        parts = [
            _density_chunk(config, k0, k1, step_indices, x_grid, y_grid)
            for k0, k1 in chunks
        ]
    total = np.zeros((len(step_indices), x_grid.size, y_grid.size))
    n_eff = 0
    for sums, count in parts:
        total += sums
        n_eff += count
    if n_eff == 0:
        raise EnsembleFailureError("all trajectories ended in degenerate jumps")
    return [total[i] / n_eff for i in range(len(step_indices))]
