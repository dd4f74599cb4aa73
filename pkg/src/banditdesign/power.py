"""Monte-Carlo power analysis for adaptive experiment designs.

Each replication draws true arm means from a design prior, runs the batched
experiment, and estimates the pooled null parameter from its own data. A
small number of representative null parameters (an equally spaced grid over
the estimated range) are calibrated by simulation; every replication then
uses thresholds linearly interpolated at its own estimate. Type-II error is
averaged over the replications (and comparisons) that meet the minimum
effect size, while mean reward is averaged over all replications.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import engine
from .calibration import (
    GAUSSIAN_SCALE_FLOOR,
    NullEstimate,
    calibration_sample,
    empirical_threshold,
    fold,
    pooled_null_theta,
    randomized_threshold,
    reject_randomized,
    art_pvalues,
)
from .rng import (
    STAGE_CALIBRATION,
    STAGE_EVAL,
    STAGE_MAIN,
    STAGE_POST,
    STAGE_PRIOR,
    STAGE_RESAMPLE,
    derive_stream,
)
from .simcore import Policy, RewardKernel, RewardKind
from .stattests import TestKind, TestSpec, classical_threshold, stat_matrix


class PriorKind(str, Enum):
    BETA_IID = "beta_iid"
    GAUSSIAN_IID = "gaussian_iid"
    FIXED = "fixed"


@dataclass(frozen=True)
class PriorSpec:
    """Distribution over true arm means used for power analysis.

    BETA_IID draws each arm mean from Beta(a, b) with Bernoulli rewards;
    GAUSSIAN_IID draws arm means from Normal(loc, scale) with Gaussian
    rewards of standard deviation reward_scale; FIXED uses an explicit mean
    vector with either reward kind.
    """

    kind: PriorKind
    k: int
    a: float = 1.0
    b: float = 1.0
    loc: float = 0.0
    scale: float = 1.0
    reward_scale: float = 0.0
    means: tuple[float, ...] = ()
    reward_kind: RewardKind = RewardKind.BERNOULLI

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("K must be >= 2")
        if self.kind == PriorKind.BETA_IID and (self.a <= 0 or self.b <= 0):
            raise ValueError("Beta prior needs a, b > 0")
        if self.kind == PriorKind.GAUSSIAN_IID and self.reward_scale <= 0:
            raise ValueError("Gaussian prior needs reward_scale > 0")
        if self.kind == PriorKind.FIXED:
            if len(self.means) != self.k:
                raise ValueError("FIXED prior needs a means vector of length K")
            if self.reward_kind == RewardKind.GAUSSIAN and self.reward_scale <= 0:
                raise ValueError("Gaussian rewards need reward_scale > 0")

    @property
    def observed_kind(self) -> RewardKind:
        if self.kind == PriorKind.BETA_IID:
            return RewardKind.BERNOULLI
        if self.kind == PriorKind.GAUSSIAN_IID:
            return RewardKind.GAUSSIAN
        return self.reward_kind

    def draw_means(self, m_reps: int, rng: np.random.Generator) -> np.ndarray:
        if self.kind == PriorKind.BETA_IID:
            return rng.beta(self.a, self.b, size=(m_reps, self.k))
        if self.kind == PriorKind.GAUSSIAN_IID:
            return self.loc + self.scale * rng.standard_normal((m_reps, self.k))
        return np.tile(np.asarray(self.means, dtype=np.float64), (m_reps, 1))

    def scales_for(self, means: np.ndarray) -> np.ndarray | None:
        if self.observed_kind == RewardKind.BERNOULLI:
            return None
        return np.full_like(means, self.reward_scale)


@dataclass
class PowerCurve:
    """Estimated Type-II error and mean reward per experiment step."""

    horizon: int
    time_grid: np.ndarray
    beta_grid: np.ndarray
    mean_reward_grid: np.ndarray
    beta_t: np.ndarray
    mean_reward_t: np.ndarray
    m_reps: int
    m_effective: int
    fpr_estimate: float | None = None

    def minimal_horizon(self, beta_target: float) -> int | None:
        """Smallest t with estimated Type-II error at or below the target."""
        ok = np.flatnonzero(self.beta_t <= beta_target)
        return int(ok[0]) + 1 if ok.size else None

    def mean_reward_at(self, t: int) -> float:
        return float(self.mean_reward_t[t - 1])

    def write_csv(self, fp) -> None:
        fp.write("t,beta,mean_reward\n")
        for t in range(1, self.horizon + 1):
            fp.write(f"{t},{self.beta_t[t - 1]:.6g},{self.mean_reward_t[t - 1]:.10g}\n")

    def to_dict(self) -> dict:
        return {
            "horizon": self.horizon,
            "time_grid": self.time_grid.tolist(),
            "beta_grid": np.round(self.beta_grid, 6).tolist(),
            "mean_reward_grid": np.round(self.mean_reward_grid, 8).tolist(),
            "m_reps": self.m_reps,
            "m_effective": self.m_effective,
            "fpr_estimate": self.fpr_estimate,
        }


def _null_kernel(kind: RewardKind, theta: float, scale: float) -> RewardKernel:
    if kind == RewardKind.BERNOULLI:
        return RewardKernel(kind, min(max(theta, 0.0), 1.0))
    return RewardKernel(kind, theta, max(scale, GAUSSIAN_SCALE_FLOOR))


def calibration_thetas(spec: TestSpec, theta_hat: np.ndarray) -> np.ndarray:
    """Null parameters the calibration simulates at.

    Tests whose null leaves the common distribution free calibrate at each
    replication's pooled estimate; the fixed-baseline test's null is pinned
    at the baseline itself, so there is nothing to estimate.
    """
    if spec.kind == TestKind.T_CONSTANT:
        return np.full_like(theta_hat, spec.baseline)
    return theta_hat


def calibrate_grid(
    kind: RewardKind,
    k: int,
    spec: TestSpec,
    policy: Policy,
    alpha: float,
    horizon: int,
    thetas: np.ndarray,
    scale_hint: float,
    grid_points: int,
    null_reps: int,
    seed: int,
    runner: str,
    collect_times: np.ndarray,
    progress=None,
    grid_override: np.ndarray | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Calibrate thresholds at representative null parameters.

    Returns (grid (B,), thresholds (B, len(collect_times))). ``grid_override``
    bypasses the equally spaced construction (used for per-replication
    calibration, where every replication is its own grid point).
    """
    if grid_override is not None:
        grid = np.asarray(grid_override, dtype=np.float64)
    else:
        lo, hi = float(np.min(thetas)), float(np.max(thetas))
        if hi - lo < 1e-12:
            grid = np.array([(lo + hi) / 2.0])
        else:
            grid = np.linspace(lo, hi, grid_points)
    q = np.empty((len(grid), len(collect_times)))
    for b, theta in enumerate(grid):
        kernel = _null_kernel(kind, float(theta), scale_hint)
        rng = derive_stream(seed, b, STAGE_CALIBRATION)
        means = np.full((null_reps, k), kernel.mean)
        scales = np.full((null_reps, k), kernel.scale)
        ci = 0
        for t, pulls, rsum, r2sum in engine.iter_population(kind, means, scales, policy, horizon, rng, runner):
            if ci < len(collect_times) and t == collect_times[ci]:
                q[b, ci] = empirical_threshold(calibration_sample(spec, pulls, rsum, r2sum), alpha)
                ci += 1
        if progress is not None:
            progress((b + 1) / len(grid))
    return grid, q


def interp_thresholds(grid: np.ndarray, q: np.ndarray, thetas: np.ndarray) -> np.ndarray:
    """Linear interpolation of threshold rows at each replication's estimate.

    Exact at grid points, clamped beyond the grid range; +inf thresholds
    dominate any mixture they enter.
    """
    if len(grid) == 1:
        return np.broadcast_to(q[0], (len(thetas), q.shape[1])).copy()
    idx = np.clip(np.searchsorted(grid, thetas, side="right"), 1, len(grid) - 1)
    lo = grid[idx - 1]
    hi = grid[idx]
    w = np.clip((thetas - lo) / (hi - lo), 0.0, 1.0)[:, None]
    q_lo = q[idx - 1]
    q_hi = q[idx]
    with np.errstate(invalid="ignore"):
        mix = q_lo * (1.0 - w) + q_hi * w
    out = np.where(w == 0.0, q_lo, np.where(w == 1.0, q_hi, mix))
    return out


def qualifying_units(spec: TestSpec, true_means: np.ndarray):
    """Mask of (replication) or (replication, comparison) units meeting the minimum effect.

    A minimum effect of 0 disables the filter. For the best-arm test the
    condition is replication-level: the true best arm exceeds every other arm
    by the minimum effect.
    """
    m, k = true_means.shape
    d0 = spec.min_effect
    if spec.kind == TestKind.TWO_SAMPLE_T:
        if d0 == 0:
            return np.ones(m, dtype=bool)
        i, j = spec.pair
        return np.abs(true_means[:, i] - true_means[:, j]) > d0
    if spec.kind == TestKind.ANOVA:
        if d0 == 0:
            return np.ones(m, dtype=bool)
        return true_means.max(axis=1) - true_means.min(axis=1) > d0
    if spec.kind == TestKind.T_CONSTANT:
        if d0 == 0:
            return np.ones((m, k), dtype=bool)
        return true_means - spec.baseline > d0
    if spec.kind == TestKind.T_CONTROL:
        others = [a for a in range(k) if a != spec.control_arm]
        if d0 == 0:
            return np.ones((m, k - 1), dtype=bool)
        return np.abs(true_means[:, others] - true_means[:, [spec.control_arm]]) > d0
    if spec.kind == TestKind.TUKEY_BEST:
        best = np.argmax(true_means, axis=1)
        rows = np.arange(m)
        gaps = true_means[rows, best][:, None] - true_means
        gaps[rows, best] = np.inf
        if d0 == 0:
            return np.ones(m, dtype=bool)
        return np.all(gaps > d0, axis=1)
    raise ValueError(f"no qualification rule for {spec.kind}")


def power_events(spec: TestSpec, scalar, per, best, q, true_means):
    """Rejection indicators at the granularity of the power definition.

    Scalar tests reject per replication; the best-arm test additionally
    requires identifying the true best arm; per-comparison tests reject each
    comparison against the shared threshold.
    """
    if spec.kind in (TestKind.TWO_SAMPLE_T, TestKind.ANOVA, TestKind.LRT):
        with np.errstate(invalid="ignore"):
            return fold(scalar, spec) > q
    if spec.kind == TestKind.TUKEY_BEST:
        true_best = np.argmax(true_means, axis=1)
        with np.errstate(invalid="ignore"):
            return (best == true_best) & (scalar > q)
    with np.errstate(invalid="ignore"):
        return fold(per, spec) > q[:, None]


def fpr_events(spec: TestSpec, scalar, per, q):
    """Null rejection indicators: the family event, or per-comparison events."""
    if per is not None and not spec.family_wise:
        with np.errstate(invalid="ignore"):
            return fold(per, spec) > q[:, None]
    with np.errstate(invalid="ignore"):
        return fold(scalar, spec) > q


def power_analysis(
    k: int,
    prior: PriorSpec,
    horizon: int,
    policy: Policy,
    spec: TestSpec,
    alpha: float,
    m_reps: int,
    grid_points: int,
    seed: int,
    *,
    threshold_source: str = "ait",
    runner: str = "batched",
    null_reps: int | None = None,
    per_replication_calibration: bool = False,
    stat_stride: int | None = None,
    progress=None,
) -> PowerCurve:
    """Estimate the per-step Type-II error and mean reward of a design.

    ``threshold_source`` is "ait" (grid-calibrated thresholds interpolated at
    each replication's pooled null estimate) or "classical" (uncorrected
    asymptotic critical values). ``null_reps`` is the calibration budget per
    grid point (default m_reps // grid_points). ``stat_stride`` thins the
    statistic-evaluation grid (auto: every 10th step for long exact runs).
    """
    if horizon < 2:
        raise ValueError("horizon must be >= 2")
    if not per_replication_calibration and not m_reps >= grid_points >= 2:
        raise ValueError("need m_reps >= grid_points >= 2")
    kind = prior.observed_kind
    true_means = prior.draw_means(m_reps, derive_stream(seed, 0, STAGE_PRIOR))
    if kind == RewardKind.BERNOULLI:
        true_means = np.clip(true_means, 0.0, 1.0)
    scales = prior.scales_for(true_means)

    if stat_stride is None:
        stat_stride = 10 if (runner == "exact" and horizon > 600) else 1
    grid = engine.time_grid(horizon, runner, stat_stride)
    n_grid = len(grid)
    scalar_g = np.empty((n_grid, m_reps), dtype=np.float64)
    per_g = None
    best_g = None
    reward_g = np.empty(n_grid)
    theta = scale_hat = None
    gi = 0
    rng_main = derive_stream(seed, 0, STAGE_MAIN)
    for t, pulls, rsum, r2sum in engine.iter_population(kind, true_means, scales, policy, horizon, rng_main, runner):
        if gi >= n_grid or t != grid[gi]:
            continue
        scalar, per, best = stat_matrix(spec, pulls, rsum, r2sum)
        scalar_g[gi] = scalar
        if per is not None:
            if per_g is None:
                per_g = np.empty((n_grid, m_reps, per.shape[1]), dtype=np.float32)
            per_g[gi] = per
        if best is not None:
            if best_g is None:
                best_g = np.empty((n_grid, m_reps), dtype=np.int64)
            best_g[gi] = best
        reward_g[gi] = float(np.mean(rsum.sum(axis=1) / t))
        if t == horizon:
            theta, scale_hat = pooled_null_theta(kind, pulls, rsum, r2sum)
        gi += 1
        if progress is not None and gi % 32 == 0:
            progress(0.5 * gi / n_grid)

    if threshold_source == "classical":
        q_by_rep = np.tile(
            np.array([classical_threshold(spec, int(t), alpha, k) for t in grid]), (m_reps, 1)
        )
    elif threshold_source == "ait":
        if null_reps is None:
            null_reps = max(100, m_reps // max(grid_points, 1))
        scale_hint = float(np.mean(scale_hat))
        cal_theta = calibration_thetas(spec, theta)
        if per_replication_calibration:
            _, q_rows = calibrate_grid(
                kind, k, spec, policy, alpha, horizon, cal_theta, scale_hint,
                grid_points, null_reps, seed, runner, grid,
                grid_override=cal_theta,
            )
            q_by_rep = q_rows
        else:
            theta_grid, q_grid = calibrate_grid(
                kind, k, spec, policy, alpha, horizon, cal_theta, scale_hint,
                grid_points, null_reps, seed, runner, grid,
                progress=(lambda f: progress(0.5 + 0.45 * f)) if progress else None,
            )
            q_by_rep = interp_thresholds(theta_grid, q_grid, cal_theta)
    else:
        raise ValueError(f"unknown threshold_source {threshold_source!r}")

    qualify = qualifying_units(spec, true_means)
    n_qual = int(qualify.sum())
    if n_qual == 0:
        raise ValueError("prior incompatible with minimum effect: no replication passes the d0 filter")

    beta_grid = np.empty(n_grid)
    for g in range(n_grid):
        per = None if per_g is None else per_g[g].astype(np.float64)
        best = None if best_g is None else best_g[g]
        rej = power_events(spec, scalar_g[g], per, best, q_by_rep[:, g], true_means)
        beta_grid[g] = 1.0 - float(np.mean(rej[qualify]))

    beta_t = engine.expand_to_steps(grid, beta_grid, horizon, fill=1.0)
    reward_t = engine.expand_to_steps(grid, reward_g, horizon, fill=np.nan)
    if progress is not None:
        progress(1.0)
    return PowerCurve(
        horizon=horizon,
        time_grid=grid,
        beta_grid=beta_grid,
        mean_reward_grid=reward_g,
        beta_t=beta_t,
        mean_reward_t=reward_t,
        m_reps=m_reps,
        m_effective=n_qual,
    )


def fpr_analysis(
    k: int,
    null: NullEstimate | RewardKernel,
    horizon: int,
    policy: Policy,
    spec: TestSpec,
    threshold_source: str,
    m_reps: int,
    seed: int,
    *,
    alpha: float,
    runner: str = "batched",
    grid_points: int = 10,
    null_reps: int | None = None,
) -> float:
    """Empirical rejection rate at the horizon with all arms at the null kernel."""
    kernel = null.kernel if isinstance(null, NullEstimate) else null
    kind = kernel.kind
    means = np.full((m_reps, k), kernel.mean)
    scales = np.full((m_reps, k), kernel.scale)
    stats = engine.final_totals(kind, means, scales, policy, horizon, derive_stream(seed, 0, STAGE_MAIN), runner)
    pulls, rsum, r2sum = stats
    scalar, per, best = stat_matrix(spec, pulls, rsum, r2sum)

    if threshold_source == "classical":
        q = np.full(m_reps, classical_threshold(spec, horizon, alpha, k))
    else:
        theta, scale_hat = pooled_null_theta(kind, pulls, rsum, r2sum)
        theta = calibration_thetas(spec, theta)
        if null_reps is None:
            null_reps = max(100, m_reps // max(grid_points, 1))
        theta_grid, q_grid = calibrate_grid(
            kind, k, spec, policy, alpha, horizon, theta, float(np.mean(scale_hat)),
            grid_points, null_reps, seed, runner, np.array([horizon]),
        )
        q = interp_thresholds(theta_grid, q_grid, theta)[:, 0]

    events = fpr_events(spec, scalar, per, q)
    return float(np.mean(events))


def power_comparison(
    policies: list[tuple[str, Policy]],
    spec: TestSpec,
    environment_means: tuple[float, ...],
    horizon: int,
    alpha: float,
    m_reps: int,
    seed: int,
    *,
    reward_kind: RewardKind = RewardKind.BERNOULLI,
    reward_scale: float = 0.0,
    art_resamples: int = 500,
    art_rule: str = "calibrated",
    art_runs: int | None = None,
    art_fpr: bool = True,
    null_eval_reps: int | None = None,
    art_cal_reps: int | None = None,
    grid_points: int = 10,
    ait_cal_reps: int | None = None,
    null_mean: float | None = None,
    progress=None,
) -> list[dict]:
    """Power and FPR of the calibrated test versus the randomization baseline.

    Both corrections are evaluated on shared exact-mode observed runs in the
    given environment; false positive rates come from fresh null runs with all
    arms at ``null_mean`` (default: the environment's average mean). The
    "calibrated" ART rule sets its p-value cutoff (with boundary
    randomization) from simulated null p-values so deterministic policies
    still attain the level; "plain" rejects at p <= alpha directly.
    """
    k = len(environment_means)
    env = np.asarray(environment_means, dtype=np.float64)
    if null_mean is None:
        null_mean = float(env.mean())
    null_eval_reps = null_eval_reps or m_reps
    art_cal_reps = art_cal_reps or null_eval_reps
    art_runs = art_runs or m_reps
    ait_cal_reps = ait_cal_reps or m_reps

    rows = []
    for pi, (label, policy) in enumerate(policies):
        def run_set(means_vec, stage, n_runs):
            rng = derive_stream(seed, pi, stage)
            means = np.tile(means_vec, (n_runs, 1))
            scales = np.full((n_runs, k), reward_scale)
            arms_seq, rewards, (pulls, rsum, r2sum) = engine.run_exact_recorded(
                reward_kind, means, scales, policy, horizon, rng
            )
            scalar, per, best = stat_matrix(spec, pulls, rsum, r2sum)
            theta, _ = pooled_null_theta(reward_kind, pulls, rsum, r2sum)
            return rewards, fold(scalar, spec), theta

        null_vec = np.full(k, null_mean)
        alt_rewards, s_alt, theta_alt = run_set(env, STAGE_MAIN, m_reps)
        null_rewards, s_null, theta_null = run_set(null_vec, STAGE_EVAL, null_eval_reps)

        # calibrated thresholds at the final horizon, interpolated per run
        cal_alt = calibration_thetas(spec, theta_alt)
        cal_null = calibration_thetas(spec, theta_null)
        thetas = np.concatenate([cal_alt, cal_null])
        theta_grid, q_grid = calibrate_grid(
            reward_kind, k, spec, policy, alpha, horizon, thetas, reward_scale,
            grid_points, max(100, ait_cal_reps // grid_points), seed * 7 + pi, "exact",
            np.array([horizon]),
        )
        q_alt = interp_thresholds(theta_grid, q_grid, cal_alt)[:, 0]
        q_null = interp_thresholds(theta_grid, q_grid, cal_null)[:, 0]
        with np.errstate(invalid="ignore"):
            ait_power = float(np.mean(s_alt > q_alt))
            ait_fpr = float(np.mean(s_null > q_null))

        # randomization-test legs
        rng_art = derive_stream(seed, pi, STAGE_RESAMPLE)
        p_alt = art_pvalues(
            alt_rewards[:art_runs], s_alt[:art_runs], spec, policy, k, art_resamples, rng_art, reward_kind
        )
        if art_rule == "plain":
            art_power = float(np.mean(p_alt <= alpha))
            art_fpr_val = None
            if art_fpr:
                p_ne = art_pvalues(
                    null_rewards[:art_runs], s_null[:art_runs], spec, policy, k,
                    art_resamples, rng_art, reward_kind,
                )
                art_fpr_val = float(np.mean(p_ne <= alpha))
        elif art_rule == "calibrated":
            cal_rewards, s_cal, _ = run_set(null_vec, STAGE_CALIBRATION, art_cal_reps)
            p_cal = art_pvalues(cal_rewards, s_cal, spec, policy, k, art_resamples, rng_art, reward_kind)
            c, gamma = randomized_threshold(-p_cal, alpha)
            rng_gamma = derive_stream(seed, pi, STAGE_POST)
            art_power = float(np.mean(reject_randomized(-p_alt, c, gamma, rng_gamma)))
            art_fpr_val = None
            if art_fpr:
                p_ne = art_pvalues(
                    null_rewards, s_null, spec, policy, k, art_resamples, rng_art, reward_kind
                )
                art_fpr_val = float(np.mean(reject_randomized(-p_ne, c, gamma, rng_gamma)))
        else:
            raise ValueError(f"unknown art_rule {art_rule!r}")

        rows.append(
            {
                "policy": label,
                "ait_power": ait_power,
                "art_power": art_power,
                "ait_fpr": ait_fpr,
                "art_fpr": art_fpr_val,
            }
        )
        if progress is not None:
            progress((pi + 1) / len(policies))
    return rows
