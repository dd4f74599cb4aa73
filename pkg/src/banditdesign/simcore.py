"""Reward models, bandit policies, and adaptive-experiment runners.

The exact runner updates the policy after every draw. The batched runner
grows step sizes geometrically, samples a cube-root number of actions per
batch against the frozen pre-batch state, aggregates each action's rewards
into (sum, sum-of-squares, count) entries, and updates the policy once per
batch. Both produce a :class:`CompressedHistory`.

All `round` calls use round-half-to-even (Python's built-in rule) so ports
to other languages can agree bit-for-bit on schedules.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np


class RewardKind(str, Enum):
    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"


@dataclass(frozen=True)
class RewardKernel:
    """A single arm's reward distribution: Bernoulli(mean) or Gaussian(mean, scale)."""

    kind: RewardKind
    mean: float
    scale: float = 0.0

    def __post_init__(self):
        if self.kind == RewardKind.BERNOULLI:
            if not 0.0 <= self.mean <= 1.0:
                raise ValueError(f"Bernoulli mean must lie in [0, 1], got {self.mean}")
        elif self.kind == RewardKind.GAUSSIAN:
            if not self.scale > 0.0:
                raise ValueError(f"Gaussian scale must be > 0, got {self.scale}")

    def sample(self, rng: np.random.Generator, size=None):
        if self.kind == RewardKind.BERNOULLI:
            return rng.binomial(1, self.mean, size=size).astype(np.float64)
        return rng.normal(self.mean, self.scale, size=size)


@dataclass(frozen=True)
class ArmVector:
    """Ordered reward kernels for all arms of an experiment."""

    kernels: tuple[RewardKernel, ...]

    def __post_init__(self):
        if len(self.kernels) < 2:
            raise ValueError("an experiment needs at least 2 arms")
        kinds = {k.kind for k in self.kernels}
        if len(kinds) != 1:
            raise ValueError("all arms must share the same reward kind")

    @property
    def k(self) -> int:
        return len(self.kernels)

    @property
    def kind(self) -> RewardKind:
        return self.kernels[0].kind

    @property
    def means(self) -> np.ndarray:
        return np.array([k.mean for k in self.kernels])

    @property
    def scales(self) -> np.ndarray:
        return np.array([k.scale for k in self.kernels])

    @staticmethod
    def bernoulli(means) -> "ArmVector":
        return ArmVector(tuple(RewardKernel(RewardKind.BERNOULLI, float(m)) for m in means))

    @staticmethod
    def gaussian(means, scale: float) -> "ArmVector":
        return ArmVector(tuple(RewardKernel(RewardKind.GAUSSIAN, float(m), float(scale)) for m in means))


class PolicyKind(str, Enum):
    UR = "ur"
    TS = "ts"
    EPS_TS = "eps_ts"
    EPS_GREEDY = "eps_greedy"
    UCB = "ucb"


@dataclass(frozen=True)
class Policy:
    """A bandit policy and its hyperparameters.

    - UR: uniform randomization.
    - TS: Thompson sampling; Beta(a, b) prior for Bernoulli rewards,
      Normal-Inverse-Gamma(mu0, kappa0, alpha0, beta0) for Gaussian rewards.
    - EPS_TS / EPS_GREEDY: uniform arm with probability epsilon, otherwise the
      TS draw / the empirical-mean argmax.
    - UCB: any unpulled arm first, else argmax of mean + ucb_c * sqrt(ln(t) / pulls).

    The greedy argmax breaks exact ties uniformly at random from the policy's
    stream (reproducible given the seed); UCB and TS break toward the lowest
    arm index, keeping UCB fully deterministic given the history.
    """

    kind: PolicyKind
    epsilon: float = 0.0
    ucb_c: float = 1.0
    beta_prior: tuple[float, float] = (1.0, 1.0)
    nig_prior: tuple[float, float, float, float] = (0.0, 1e-3, 0.5, 0.1)

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError(f"epsilon must lie in [0, 1], got {self.epsilon}")

    @property
    def label(self) -> str:
        if self.kind == PolicyKind.EPS_TS:
            return f"eps_ts({self.epsilon:g})"
        if self.kind == PolicyKind.EPS_GREEDY:
            return f"eps_greedy({self.epsilon:g})"
        return self.kind.value


@dataclass
class PolicyState:
    """Per-arm sufficient statistics a policy conditions on."""

    pulls: np.ndarray
    reward_sum: np.ndarray
    reward_sq_sum: np.ndarray

    @staticmethod
    def zeros(k: int) -> "PolicyState":
        return PolicyState(np.zeros(k), np.zeros(k), np.zeros(k))

    @property
    def k(self) -> int:
        return len(self.pulls)

    @property
    def total_t(self) -> float:
        return float(self.pulls.sum())

    def update(self, arm: int, reward_sum: float, reward_sq_sum: float, draws: float) -> None:
        self.pulls[arm] += draws
        self.reward_sum[arm] += reward_sum
        self.reward_sq_sum[arm] += reward_sq_sum


@dataclass(frozen=True)
class BatchSchedule:
    """Step size, number of batched actions, and reward repetitions per action."""

    step_size: int
    n_actions: int
    reps_per_action: int

    @property
    def draws(self) -> int:
        return self.n_actions * self.reps_per_action


def batch_schedule(t: int) -> BatchSchedule:
    """Schedule for the batch starting at time t (t >= 0 draws already taken).

    step_size = round(1 + 0.05 t), n_actions = round(step_size^(1/3)),
    reps_per_action = max(1, round(step_size / n_actions)). The realized batch
    size is n_actions * reps_per_action, which may differ from step_size by
    the rounding.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    s = int(round(1.0 + 0.05 * t))
    n = max(1, int(round(s ** (1.0 / 3.0))))
    m = max(1, int(round(s / n)))
    return BatchSchedule(s, n, m)


@dataclass
class CompressedHistory:
    """Batch-aggregated experiment record.

    Entries are parallel arrays: entry i recorded arm ``arms[i]`` receiving
    ``draws[i]`` reward draws with sum ``reward_sum[i]`` and sum of squares
    ``reward_sq_sum[i]``. ``horizon_reached`` is the total draw count and may
    overshoot the requested horizon by at most one batch.
    """

    k: int
    arms: np.ndarray
    reward_sum: np.ndarray
    reward_sq_sum: np.ndarray
    draws: np.ndarray
    horizon_reached: int

    @property
    def entries(self) -> list[tuple[int, float, float, int]]:
        return [
            (int(a), float(r), float(r2), int(m))
            for a, r, r2, m in zip(self.arms, self.reward_sum, self.reward_sq_sum, self.draws)
        ]

    def per_arm_totals(self, t: int | None = None, fractional: bool = False):
        """Per-arm (draws, reward sum, squared-reward sum) using data up to t.

        With ``fractional=False`` only entries whose cumulative draw count is
        <= t contribute (the step-function reading used on the regular time
        grid). With ``fractional=True`` the entry that crosses t contributes
        proportionally, which is how the final test truncates an overshot
        horizon exactly at t.
        """
        if t is None:
            t = self.horizon_reached
        if t > self.horizon_reached:
            raise ValueError(f"t={t} exceeds horizon_reached={self.horizon_reached}")
        n = np.zeros(self.k)
        rs = np.zeros(self.k)
        r2s = np.zeros(self.k)
        cum = 0
        for a, r, r2, m in zip(self.arms, self.reward_sum, self.reward_sq_sum, self.draws):
            if cum + m <= t:
                n[a] += m
                rs[a] += r
                r2s[a] += r2
                cum += m
                if cum == t:
                    break
            else:
                if fractional and t > cum:
                    f = (t - cum) / m
                    n[a] += f * m
                    rs[a] += f * r
                    r2s[a] += f * r2
                break
        return n, rs, r2s

    def replay_state(self) -> PolicyState:
        """Reconstruct the final PolicyState by replaying all entries."""
        state = PolicyState.zeros(self.k)
        for a, r, r2, m in zip(self.arms, self.reward_sum, self.reward_sq_sum, self.draws):
            state.update(int(a), float(r), float(r2), float(m))
        return state


def policy_select(policy: Policy, state: PolicyState, rng: np.random.Generator) -> int:
    """Select the next arm for a single experiment given the current state."""
    k = state.k
    kind = policy.kind
    if kind == PolicyKind.UR:
        return int(rng.integers(0, k))

    if kind == PolicyKind.EPS_TS:
        if policy.epsilon > 0.0 and rng.random() < policy.epsilon:
            return int(rng.integers(0, k))
        kind = PolicyKind.TS

    if kind == PolicyKind.TS:
        samples = _ts_samples(policy, state.pulls, state.reward_sum, state.reward_sq_sum, rng)
        return int(np.argmax(samples))

    if kind == PolicyKind.EPS_GREEDY:
        if policy.epsilon > 0.0 and rng.random() < policy.epsilon:
            return int(rng.integers(0, k))
        unpulled = np.flatnonzero(state.pulls == 0)
        if unpulled.size:
            return int(unpulled[0])
        means = state.reward_sum / state.pulls
        ties = np.flatnonzero(means == means.max())
        if ties.size == 1:
            return int(ties[0])
        return int(ties[rng.integers(0, ties.size)])

    if kind == PolicyKind.UCB:
        unpulled = np.flatnonzero(state.pulls == 0)
        if unpulled.size:
            return int(unpulled[0])
        means = state.reward_sum / state.pulls
        bonus = policy.ucb_c * np.sqrt(math.log(state.total_t) / state.pulls)
        return int(np.argmax(means + bonus))

    raise ValueError(f"unknown policy kind {policy.kind}")


def _ts_samples(policy: Policy, pulls, reward_sum, reward_sq_sum, rng, bernoulli: bool | None = None):
    """Posterior draws of per-arm mean rewards for Thompson sampling.

    Bernoulli arms use a Beta posterior on integer success counts; Gaussian
    arms use the Normal-Inverse-Gamma conjugate update. Arms without pulls
    sample from the prior, whose near-flat hyperparameters make them win the
    argmax almost surely (the initialization rule).
    """
    if bernoulli is None:
        bernoulli = bool(np.all(reward_sq_sum == reward_sum))
    if bernoulli:
        a0, b0 = policy.beta_prior
        return rng.beta(a0 + reward_sum, b0 + (pulls - reward_sum))
    mu0, kappa0, alpha0, beta0 = policy.nig_prior
    kn = kappa0 + pulls
    mun = (kappa0 * mu0 + reward_sum) / kn
    alphan = alpha0 + pulls / 2.0
    with np.errstate(divide="ignore", invalid="ignore"):
        xbar = np.where(pulls > 0, reward_sum / np.maximum(pulls, 1.0), 0.0)
    ss = np.maximum(reward_sq_sum - pulls * xbar**2, 0.0)
    betan = beta0 + 0.5 * ss + kappa0 * pulls * (xbar - mu0) ** 2 / (2.0 * kn)
    var = betan / rng.gamma(alphan)
    return mun + rng.standard_normal(np.shape(pulls)) * np.sqrt(var / kn)


def run_exact(arms: ArmVector, horizon: int, policy: Policy, rng: np.random.Generator) -> CompressedHistory:
    """Run the regular adaptive experiment: one draw per step, policy updated every step."""
    from . import engine

    return engine.run_history(arms, horizon, policy, rng, mode="exact")


def run_batched(arms: ArmVector, horizon: int, policy: Policy, rng: np.random.Generator) -> CompressedHistory:
    """Run the batched adaptive experiment (geometric batches, frozen in-batch state)."""
    from . import engine

    return engine.run_history(arms, horizon, policy, rng, mode="batched")
