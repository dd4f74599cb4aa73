"""Test statistics over compressed histories, and classical critical values.

Pairwise statistics default to the classical pooled-variance two-sample t
(a size-1 group contributes zero degrees of freedom to the pooled variance,
as in the textbook definition); the Welch unequal-variance form is available
per spec. The pooled form is what reproduces the published behavior of naive
thresholds under adaptive sampling: the starved arm's frozen mean inflates
the numerator while the well-sampled arm anchors the variance estimate.

Multi-comparison tests reduce to a scalar "minimum over comparisons"
statistic so that one-dimensional right-tail calibration covers the
all-comparisons rejection event; the per-comparison values are kept
alongside for per-comparison power reporting.

Undefined statistics are represented as NaN. NaN never compares true against
a threshold, so an undefined statistic can never reject.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from statistics import NormalDist

import numpy as np

from .simcore import ArmVector, CompressedHistory


class TestKind(str, Enum):
    TWO_SAMPLE_T = "two_sample_t"
    T_CONSTANT = "t_constant"
    T_CONTROL = "t_control"
    ANOVA = "anova"
    TUKEY_BEST = "tukey_best"
    LRT = "lrt"


class Sidedness(str, Enum):
    ONE_SIDED_RIGHT = "one_sided_right"
    TWO_SIDED = "two_sided"


_FIXED_SIDEDNESS = {
    TestKind.T_CONSTANT: Sidedness.ONE_SIDED_RIGHT,
    TestKind.T_CONTROL: Sidedness.TWO_SIDED,
    TestKind.ANOVA: Sidedness.ONE_SIDED_RIGHT,
    TestKind.TUKEY_BEST: Sidedness.ONE_SIDED_RIGHT,
    TestKind.LRT: Sidedness.ONE_SIDED_RIGHT,
}


@dataclass(frozen=True)
class TestSpec:
    """A hypothesis test: statistic kind, sidedness, and test parameters.

    ``family_wise`` selects the error event for multi-comparison tests:
    True calibrates the all-comparisons (minimum) statistic, False treats the
    comparisons as independent per-comparison tests sharing one marginal
    threshold. ``pair`` names the compared arms for the two-sample t.
    ``min_effect`` is the smallest true mean difference at which power is
    evaluated (0 disables the filter).
    """

    kind: TestKind
    sidedness: Sidedness | None = None
    baseline: float = 0.5
    control_arm: int = 0
    min_effect: float = 0.0
    pair: tuple[int, int] = (0, 1)
    family_wise: bool = True
    variance_form: str = "pooled"
    lrt_null: ArmVector | None = None
    lrt_alt: ArmVector | None = None

    def __post_init__(self):
        if self.variance_form not in ("pooled", "welch"):
            raise ValueError("variance_form must be 'pooled' or 'welch'")
        fixed = _FIXED_SIDEDNESS.get(self.kind)
        if fixed is not None:
            if self.sidedness is not None and self.sidedness != fixed:
                raise ValueError(f"{self.kind.value} is {fixed.value}; cannot override")
            object.__setattr__(self, "sidedness", fixed)
        elif self.sidedness is None:
            object.__setattr__(self, "sidedness", Sidedness.TWO_SIDED)
        if self.min_effect < 0:
            raise ValueError("min_effect must be >= 0")
        if self.kind == TestKind.LRT and (self.lrt_null is None or self.lrt_alt is None):
            raise ValueError("LRT requires lrt_null and lrt_alt arm vectors")

    @property
    def two_sided(self) -> bool:
        return self.sidedness == Sidedness.TWO_SIDED


@dataclass
class StatValue:
    """A scalar statistic value (NaN when undefined) plus per-comparison detail."""

    value: float
    per_comparison: list[tuple[tuple, float]] | None = None
    best_arm: int | None = None

    @property
    def defined(self) -> bool:
        return not math.isnan(self.value)


# ---------------------------------------------------------------------------
# Vectorized statistics over population totals (N runs x K arms).
# ---------------------------------------------------------------------------

def summaries_matrix(pulls, rsum, r2sum):
    """Per-arm means and sample variances; NaN where fewer than 2 effective draws."""
    with np.errstate(divide="ignore", invalid="ignore"):
        means = np.where(pulls >= 1.0, rsum / np.maximum(pulls, 1.0), np.nan)
        var = (r2sum - pulls * np.square(np.where(pulls >= 1.0, means, 0.0))) / (pulls - 1.0)
    var = np.where(pulls >= 2.0, np.maximum(var, 0.0), np.nan)
    return means, var


def _welch(mean_i, var_i, n_i, mean_j, var_j, n_j):
    with np.errstate(divide="ignore", invalid="ignore"):
        den = var_i / n_i + var_j / n_j
        t = (mean_i - mean_j) / np.sqrt(den)
    return np.where(den == 0.0, np.nan, t)


def _within_ss(pulls, rsum, r2sum):
    """Within-group sums of squares and dof; a size-1 group contributes zero dof."""
    with np.errstate(divide="ignore", invalid="ignore"):
        mean = np.where(pulls >= 1.0, rsum / np.maximum(pulls, 1.0), np.nan)
    ss = np.where(pulls >= 2.0, np.maximum(r2sum - pulls * np.where(pulls >= 1.0, mean, 0.0) ** 2, 0.0), 0.0)
    dof = np.where(pulls >= 2.0, pulls - 1.0, 0.0)
    return mean, ss, dof


def _pooled_pair(mean_i, ss_i, dof_i, n_i, mean_j, ss_j, dof_j, n_j):
    dof = dof_i + dof_j
    with np.errstate(divide="ignore", invalid="ignore"):
        sp2 = (ss_i + ss_j) / dof
        se = np.sqrt(sp2 * (1.0 / n_i + 1.0 / n_j))
        t = (mean_i - mean_j) / se
    t = np.where((dof < 1.0) | (se == 0.0), np.nan, t)
    return np.where((n_i < 1.0) | (n_j < 1.0), np.nan, t)


def stat_matrix(spec: TestSpec, pulls, rsum, r2sum):
    """Scalar statistic per run, plus per-comparison values where applicable.

    Returns (scalar (N,), per_comparison (N, C) or None, best_arm (N,) or None).
    """
    means, var = summaries_matrix(pulls, rsum, r2sum)
    n = pulls
    k = pulls.shape[1]
    pooled = spec.variance_form == "pooled" and spec.kind != TestKind.T_CONSTANT
    if pooled:
        p_mean, p_ss, p_dof = _within_ss(pulls, rsum, r2sum)

    def pair(i_sel, j_sel):
        """Pair statistic between gathered columns (fancy index or column list)."""
        if pooled:
            return _pooled_pair(
                p_mean[i_sel], p_ss[i_sel], p_dof[i_sel], n[i_sel],
                p_mean[j_sel], p_ss[j_sel], p_dof[j_sel], n[j_sel],
            )
        return _welch(means[i_sel], var[i_sel], n[i_sel], means[j_sel], var[j_sel], n[j_sel])

    if spec.kind == TestKind.TWO_SAMPLE_T:
        i, j = spec.pair
        t = pair((slice(None), i), (slice(None), j))
        return t, None, None

    if spec.kind == TestKind.T_CONSTANT:
        per = _welch(means, var, n, spec.baseline, 0.0, 1.0)
        return np.min(per, axis=1), per, None

    if spec.kind == TestKind.T_CONTROL:
        c = spec.control_arm
        others = [a for a in range(k) if a != c]
        per = np.stack([pair((slice(None), a), (slice(None), c)) for a in others], axis=1)
        return np.min(np.abs(per), axis=1), per, None

    if spec.kind == TestKind.ANOVA:
        total_n = n.sum(axis=1)
        grand = rsum.sum(axis=1) / total_n
        between = np.sum(n * (means - grand[:, None]) ** 2, axis=1) / (k - 1)
        within = np.sum((n - 1.0) * var, axis=1) / (total_n - k)
        with np.errstate(divide="ignore", invalid="ignore"):
            f = between / within
        f = np.where((within == 0.0) & (between > 0.0), np.inf, f)
        f = np.where((within == 0.0) & (between == 0.0), np.nan, f)
        f = np.where(np.any(n < 2.0, axis=1), np.nan, f)
        return f, None, None

    if spec.kind == TestKind.TUKEY_BEST:
        safe_means = np.where(np.isnan(means), -np.inf, means)
        best = np.argmax(safe_means, axis=1)
        rows = np.arange(pulls.shape[0])
        # standardized gap of the empirical best arm over each other arm,
        # comparisons ordered by the other arm's index
        stacked = np.stack(
            [pair((rows, best), (slice(None), a)) for a in range(k)],
            axis=1,
        )
        keep = np.arange(k)[None, :] != best[:, None]
        per_out = stacked[keep].reshape(pulls.shape[0], k - 1)
        scalar = np.min(per_out, axis=1)
        return scalar, per_out, best

    raise ValueError(f"stat_matrix does not handle {spec.kind}")


def lrt_matrix(spec: TestSpec, arms_seq: np.ndarray, rewards: np.ndarray) -> np.ndarray:
    """Log likelihood ratio per run from exact per-step (arm, reward) sequences."""
    null_lp = _log_pdf_by_arm(spec.lrt_null, arms_seq, rewards)
    alt_lp = _log_pdf_by_arm(spec.lrt_alt, arms_seq, rewards)
    if np.any(np.isneginf(null_lp)):
        raise ValueError("null-support violation: null kernel assigns zero likelihood to an observed reward")
    return (alt_lp - null_lp).sum(axis=1)


def _log_pdf_by_arm(arm_vec: ArmVector, arms_seq, rewards):
    from .simcore import RewardKind

    means = arm_vec.means[arms_seq]
    if arm_vec.kind == RewardKind.BERNOULLI:
        with np.errstate(divide="ignore"):
            return np.where(rewards > 0.5, np.log(means), np.log1p(-means))
    scales = arm_vec.scales[arms_seq]
    return -0.5 * np.log(2.0 * np.pi * scales**2) - (rewards - means) ** 2 / (2.0 * scales**2)


# ---------------------------------------------------------------------------
# Scalar operations on a CompressedHistory (thin wrappers over the array path).
# ---------------------------------------------------------------------------

def arm_summaries(history: CompressedHistory, t: int | None = None, fractional: bool = False):
    """Per-arm (n, mean, variance) using entries up to time t.

    Arms with no draws report NaN mean and variance; a single draw reports a
    defined mean but NaN variance.
    """
    n, rs, r2s = history.per_arm_totals(t, fractional=fractional)
    means, var = summaries_matrix(n[None, :], rs[None, :], r2s[None, :])
    return n, means[0], var[0]


def _scalar_stat(spec: TestSpec, history: CompressedHistory, t: int | None) -> StatValue:
    n, rs, r2s = history.per_arm_totals(t)
    scalar, per, best = stat_matrix(spec, n[None, :], rs[None, :], r2s[None, :])
    per_list = None
    if per is not None:
        per_list = _label_comparisons(spec, per[0], None if best is None else int(best[0]), history.k)
    return StatValue(float(scalar[0]), per_list, None if best is None else int(best[0]))


def _label_comparisons(spec: TestSpec, values, best: int | None, k: int):
    if spec.kind == TestKind.T_CONSTANT:
        return [((a,), float(v)) for a, v in enumerate(values)]
    if spec.kind == TestKind.T_CONTROL:
        others = [a for a in range(k) if a != spec.control_arm]
        return [((a, spec.control_arm), float(v)) for a, v in zip(others, values)]
    if spec.kind == TestKind.TUKEY_BEST:
        others = [a for a in range(k) if a != best]
        return [((best, a), float(v)) for a, v in zip(others, values)]
    return None


def two_sample_t(history: CompressedHistory, t: int | None = None, pair: tuple[int, int] = (0, 1)) -> StatValue:
    """Welch two-sample t statistic between the paired arms."""
    if pair[0] == pair[1]:
        raise ValueError("two_sample_t needs two distinct arms")
    spec = TestSpec(TestKind.TWO_SAMPLE_T, pair=pair)
    return _scalar_stat(spec, history, t)


def t_constant_stat(history: CompressedHistory, t: int | None = None, spec: TestSpec | None = None) -> StatValue:
    """Per-arm one-sample statistics against a fixed baseline; scalar = minimum."""
    spec = spec or TestSpec(TestKind.T_CONSTANT)
    if spec.kind != TestKind.T_CONSTANT:
        raise ValueError("spec.kind must be T_CONSTANT")
    return _scalar_stat(spec, history, t)


def t_control_stat(history: CompressedHistory, t: int | None = None, spec: TestSpec | None = None) -> StatValue:
    """Per-arm Welch statistics against the control arm; scalar = min |statistic|."""
    spec = spec or TestSpec(TestKind.T_CONTROL)
    if spec.kind != TestKind.T_CONTROL:
        raise ValueError("spec.kind must be T_CONTROL")
    return _scalar_stat(spec, history, t)


def anova_f(history: CompressedHistory, t: int | None = None) -> StatValue:
    """One-way ANOVA F statistic across all arms."""
    return _scalar_stat(TestSpec(TestKind.ANOVA), history, t)


def tukey_best_stat(history: CompressedHistory, t: int | None = None) -> StatValue:
    """Best-arm-versus-rest statistics; scalar = min standardized gap from the best."""
    return _scalar_stat(TestSpec(TestKind.TUKEY_BEST), history, t)


def lrt_stat(history: CompressedHistory, t: int | None = None, spec: TestSpec | None = None) -> StatValue:
    """Log likelihood ratio between two fully specified arm vectors.

    Defined only on exact (one draw per entry) histories; the value is
    invariant to reordering of the entries. Requires at least one draw on
    every arm.
    """
    if spec is None or spec.kind != TestKind.LRT:
        raise ValueError("lrt_stat requires an LRT spec")
    if np.any(history.draws != 1):
        raise ValueError("lrt_stat is defined on exact (m=1) histories only")
    if t is None:
        t = history.horizon_reached
    arms_seq = history.arms[None, :t]
    rewards = history.reward_sum[None, :t]
    pulls, _, _ = history.per_arm_totals(t)
    if np.any(pulls < 1.0):
        return StatValue(math.nan)
    return StatValue(float(lrt_matrix(spec, arms_seq, rewards)[0]))


def classical_threshold(spec: TestSpec, t: int, alpha: float, k: int | None = None) -> float:
    """Uncorrected asymptotic critical value used by naive designs.

    Normal quantiles for the t family (on the scalar statistic), the F
    quantile for ANOVA, and the studentized-range value for the best-arm
    test. ``t`` is the total sample size; ``k`` the number of arms (needed
    for ANOVA and the best-arm test).
    """
    if spec.kind in (TestKind.TWO_SAMPLE_T, TestKind.T_CONSTANT, TestKind.T_CONTROL):
        if spec.two_sided:
            return NormalDist().inv_cdf(1.0 - alpha / 2.0)
        return NormalDist().inv_cdf(1.0 - alpha)
    if spec.kind == TestKind.ANOVA:
        from scipy import stats

        if k is None:
            raise ValueError("ANOVA threshold needs the number of arms k")
        return float(stats.f.ppf(1.0 - alpha, k - 1, max(t - k, 1)))
    if spec.kind == TestKind.TUKEY_BEST:
        from scipy import stats

        if k is None:
            raise ValueError("best-arm threshold needs the number of arms k")
        return float(stats.studentized_range.ppf(1.0 - alpha, k, max(t - k, 1)) / math.sqrt(2.0))
    raise ValueError(f"no classical threshold for {spec.kind}")
