"""Vectorized experiment runners.

Power analysis and calibration need millions of bandit runs, so this module
executes N independent experiments in lockstep with numpy. The batch
structure of the batched process depends only on elapsed draws, never on
data, so every run shares the same entry boundaries; consumers receive one
snapshot of running per-arm totals per boundary and a final snapshot
truncated exactly at the requested horizon (the entry that crosses the
horizon is down-weighted proportionally).

Snapshots yield views into working buffers: reduce them immediately, do not
store references across iterations.
"""

from __future__ import annotations

import numpy as np

from .simcore import ArmVector, CompressedHistory, Policy, PolicyKind, RewardKind, batch_schedule


def batch_plan(horizon: int, mode: str) -> list[tuple[int, int]]:
    """(n_actions, reps_per_action) for every batch of a run of given horizon."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    if mode == "exact":
        return [(1, 1)] * horizon
    if mode != "batched":
        raise ValueError(f"unknown mode {mode!r}")
    plan = []
    t = 0
    while t < horizon:
        sched = batch_schedule(t)
        plan.append((sched.n_actions, sched.reps_per_action))
        t += sched.draws
    return plan


def time_grid(horizon: int, mode: str, stride: int = 1) -> np.ndarray:
    """Entry-boundary times below the horizon, then the horizon itself.

    ``stride`` keeps every stride-th boundary (plus the horizon), thinning
    the evaluation grid for long exact-mode runs where per-step statistics
    would dominate the cost.
    """
    times = []
    cum = 0
    for n_actions, reps in batch_plan(horizon, mode):
        for _ in range(n_actions):
            cum += reps
            if cum < horizon:
                times.append(cum)
    times = times[stride - 1 :: stride] if stride > 1 else times
    times.append(horizon)
    return np.asarray(times, dtype=np.int64)


def expand_to_steps(grid: np.ndarray, values: np.ndarray, horizon: int, fill=np.nan) -> np.ndarray:
    """Expand per-grid-point values to a per-step array for t = 1..horizon.

    Each step reads the last grid point at or before it; steps before the
    first grid point read ``fill``.
    """
    idx = np.searchsorted(grid, np.arange(1, horizon + 1), side="right") - 1
    out = np.where(idx >= 0, np.asarray(values, dtype=np.float64)[np.maximum(idx, 0)], fill)
    return out


class _Selector:
    """Frozen-state arm selection for a population of runs.

    Built once per batch from the pre-batch totals; each ``draw`` performs one
    independent selection per run. Derived parameters are fresh arrays, so
    in-batch updates to the running totals never leak into selection.
    """

    def __init__(self, policy: Policy, kind: RewardKind, pulls, rsum, r2sum, rng: np.random.Generator):
        self.policy = policy
        self.kind = kind
        self.n, self.k = pulls.shape
        p = policy.kind
        self._rows = np.arange(self.n)
        if p in (PolicyKind.TS, PolicyKind.EPS_TS):
            if kind == RewardKind.BERNOULLI:
                a0, b0 = policy.beta_prior
                self._a = a0 + rsum
                self._b = b0 + (pulls - rsum)
            else:
                mu0, kappa0, alpha0, beta0 = policy.nig_prior
                self._kn = kappa0 + pulls
                self._mun = (kappa0 * mu0 + rsum) / self._kn
                self._alphan = alpha0 + pulls / 2.0
                with np.errstate(divide="ignore", invalid="ignore"):
                    xbar = np.where(pulls > 0, rsum / np.maximum(pulls, 1.0), 0.0)
                ss = np.maximum(r2sum - pulls * xbar**2, 0.0)
                self._betan = beta0 + 0.5 * ss + kappa0 * pulls * (xbar - mu0) ** 2 / (2.0 * self._kn)
        elif p == PolicyKind.EPS_GREEDY:
            # frozen exploit arm per batch; exact ties split uniformly at random
            with np.errstate(divide="ignore", invalid="ignore"):
                means = np.where(pulls > 0, rsum / np.maximum(pulls, 1.0), -np.inf)
            u = rng.random((self.n, self.k))
            tie_pick = np.argmax(np.where(means == means.max(axis=1, keepdims=True), u, -1.0), axis=1)
            unpulled = pulls == 0
            self._exploit = np.where(unpulled.any(axis=1), np.argmax(unpulled, axis=1), tie_pick)
        elif p == PolicyKind.UCB:
            total = pulls.sum(axis=1, keepdims=True)
            with np.errstate(divide="ignore", invalid="ignore"):
                score = np.where(
                    pulls > 0,
                    rsum / np.maximum(pulls, 1.0)
                    + policy.ucb_c * np.sqrt(np.log(np.maximum(total, 1.0)) / np.maximum(pulls, 1.0)),
                    np.inf,
                )
            self._arm = np.argmax(score, axis=1)

    def _ts_draw(self, rng) -> np.ndarray:
        if self.kind == RewardKind.BERNOULLI:
            samples = rng.beta(self._a, self._b)
        else:
            var = self._betan / rng.gamma(self._alphan)
            samples = self._mun + rng.standard_normal((self.n, self.k)) * np.sqrt(var / self._kn)
        return np.argmax(samples, axis=1)

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        p = self.policy.kind
        if p == PolicyKind.UR:
            return rng.integers(0, self.k, self.n)
        if p == PolicyKind.TS:
            return self._ts_draw(rng)
        if p == PolicyKind.EPS_TS:
            if self.policy.epsilon == 0.0:
                return self._ts_draw(rng)
            explore = rng.random(self.n) < self.policy.epsilon
            alt = rng.integers(0, self.k, self.n)
            return np.where(explore, alt, self._ts_draw(rng))
        if p == PolicyKind.EPS_GREEDY:
            if self.policy.epsilon == 0.0:
                return self._exploit
            explore = rng.random(self.n) < self.policy.epsilon
            alt = rng.integers(0, self.k, self.n)
            return np.where(explore, alt, self._exploit)
        if p == PolicyKind.UCB:
            return self._arm
        raise ValueError(f"unknown policy kind {p}")


def draw_rewards(kind: RewardKind, means, scales, arms, reps: int, rng):
    """(sum, sum of squares) of ``reps`` i.i.d. rewards from each run's chosen arm.

    Aggregates are sampled directly from their exact sampling distributions
    (binomial counts; normal sum plus an independent chi-square for the
    within-sample scatter), so the cost of a batch entry is independent of
    ``reps``.
    """
    rows = np.arange(arms.shape[0])
    if kind == RewardKind.BERNOULLI:
        r = rng.binomial(reps, means[rows, arms]).astype(np.float64)
        return r, r.copy()
    mu = means[rows, arms]
    sd = scales[rows, arms]
    r = reps * mu + np.sqrt(reps) * sd * rng.standard_normal(arms.shape[0])
    if reps > 1:
        ss = sd**2 * rng.chisquare(reps - 1, arms.shape[0])
    else:
        ss = 0.0
    return r, ss + r**2 / reps


class Recorder:
    """Optional per-entry capture for history building and resampling tests."""

    def __init__(self, record_rewards: bool = False):
        self.arms: list[np.ndarray] = []
        self.reward_sum: list[np.ndarray] = []
        self.reward_sq_sum: list[np.ndarray] = []
        self.draws: list[int] = []
        self.record_rewards = record_rewards

    def entry(self, arms, r, r2, reps):
        self.arms.append(arms.copy())
        self.reward_sum.append(r.copy())
        self.reward_sq_sum.append(r2.copy())
        self.draws.append(reps)


def iter_population(
    kind: RewardKind,
    means: np.ndarray,
    scales: np.ndarray | None,
    policy: Policy,
    horizon: int,
    rng: np.random.Generator,
    mode: str = "batched",
    recorder: Recorder | None = None,
):
    """Run N experiments in lockstep, yielding (t, pulls, rsum, r2sum) snapshots.

    One snapshot per entry boundary strictly below the horizon, then a final
    snapshot exactly at the horizon with the crossing entry down-weighted.
    Array arguments: means (N, K); scales (N, K) or None for Bernoulli.
    """
    means = np.asarray(means, dtype=np.float64)
    n_runs, k = means.shape
    if scales is None:
        scales = np.zeros_like(means)
    pulls = np.zeros((n_runs, k))
    rsum = np.zeros((n_runs, k))
    r2sum = np.zeros((n_runs, k))
    rows = np.arange(n_runs)
    cum = 0
    done = False
    for n_actions, reps in batch_plan(horizon, mode):
        selector = _Selector(policy, kind, pulls, rsum, r2sum, rng)
        for _ in range(n_actions):
            arms = selector.draw(rng)
            r, r2 = draw_rewards(kind, means, scales, arms, reps, rng)
            pulls[rows, arms] += reps
            rsum[rows, arms] += r
            r2sum[rows, arms] += r2
            if recorder is not None:
                recorder.entry(arms, r, r2, reps)
            prev = cum
            cum += reps
            if not done:
                if cum < horizon:
                    yield cum, pulls, rsum, r2sum
                else:
                    frac = (horizon - prev) / reps
                    t_pulls = pulls.copy()
                    t_rsum = rsum.copy()
                    t_r2sum = r2sum.copy()
                    if frac < 1.0:
                        t_pulls[rows, arms] -= (1.0 - frac) * reps
                        t_rsum[rows, arms] -= (1.0 - frac) * r
                        t_r2sum[rows, arms] -= (1.0 - frac) * r2
                    done = True
                    yield horizon, t_pulls, t_rsum, t_r2sum


def final_totals(kind, means, scales, policy, horizon, rng, mode="batched"):
    """Per-arm totals truncated exactly at the horizon (the last snapshot)."""
    out = None
    for t, pulls, rsum, r2sum in iter_population(kind, means, scales, policy, horizon, rng, mode):
        if t == horizon:
            out = (pulls, rsum, r2sum)
    return out


def run_history(arms: ArmVector, horizon: int, policy: Policy, rng: np.random.Generator, mode: str) -> CompressedHistory:
    """Single-run wrapper producing a CompressedHistory from the same engine."""
    rec = Recorder()
    means = arms.means[None, :]
    scales = arms.scales[None, :]
    for _ in iter_population(arms.kind, means, scales, policy, horizon, rng, mode, recorder=rec):
        pass
    return CompressedHistory(
        k=arms.k,
        arms=np.array([a[0] for a in rec.arms], dtype=np.int64),
        reward_sum=np.array([r[0] for r in rec.reward_sum]),
        reward_sq_sum=np.array([r[0] for r in rec.reward_sq_sum]),
        draws=np.array(rec.draws, dtype=np.int64),
        horizon_reached=int(sum(rec.draws)),
    )


def run_exact_recorded(kind, means, scales, policy, horizon, rng):
    """Exact-mode population run that also captures per-step arms and rewards.

    Returns (arms_seq (N, T) int, rewards (N, T), totals at T). Used by the
    randomization-test baseline, which must replay the observed time-indexed
    reward sequence.
    """
    rec = Recorder()
    totals = None
    for t, pulls, rsum, r2sum in iter_population(kind, means, scales, policy, horizon, rng, "exact", recorder=rec):
        if t == horizon:
            totals = (pulls.copy(), rsum.copy(), r2sum.copy())
    arms_seq = np.stack(rec.arms, axis=1)
    rewards = np.stack(rec.reward_sum, axis=1)
    return arms_seq, rewards, totals


def is_selection_deterministic(policy: Policy) -> bool:
    """True when arm selection consumes no randomness given the history.

    Only UCB qualifies: the greedy policies randomize exact ties.
    """
    return policy.kind == PolicyKind.UCB


def resample_on_rewards(policy: Policy, kind: RewardKind, rewards: np.ndarray, k: int,
                        n_resamples: int, rng: np.random.Generator, chunk_runs: int = 0):
    """Re-run arm selection from scratch against fixed time-indexed rewards.

    For each of the N observed runs, performs ``n_resamples`` independent
    replays in which the policy chooses arms but step t's reward is the
    observed ``rewards[i, t]`` regardless of the chosen arm. Yields
    (run_slice, reps_used, pulls, rsum, r2sum) with arrays of shape
    (chunk * reps_used, k), resamples varying fastest within each run.

    Deterministic policies replay identically every time, so a single replay
    per run (reps_used = 1) is performed and stands for all resamples exactly.
    """
    n_runs, horizon = rewards.shape
    reps = 1 if is_selection_deterministic(policy) else n_resamples
    if chunk_runs <= 0:
        chunk_runs = max(1, int(2_000_000 // max(reps, 1)))
    for lo in range(0, n_runs, chunk_runs):
        hi = min(lo + chunk_runs, n_runs)
        c = hi - lo
        n_sims = c * reps
        rows = np.arange(n_sims)
        pulls = np.zeros((n_sims, k))
        rsum = np.zeros((n_sims, k))
        r2sum = np.zeros((n_sims, k))
        block = rewards[lo:hi]
        for t in range(horizon):
            selector = _Selector(policy, kind, pulls, rsum, r2sum, rng)
            arms = selector.draw(rng)
            r = np.repeat(block[:, t], reps)
            pulls[rows, arms] += 1.0
            rsum[rows, arms] += r
            r2sum[rows, arms] += r * r
        yield slice(lo, hi), reps, pulls, rsum, r2sum
