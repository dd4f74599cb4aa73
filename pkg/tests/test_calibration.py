import io
import math

import numpy as np
import pytest

from banditdesign import (
    ArmVector,
    Policy,
    PolicyKind,
    RewardKernel,
    RewardKind,
    TestKind,
    TestSpec,
    Sidedness,
    ait_calibrate,
    art_calibrate,
    estimate_null,
    run_exact,
)
from banditdesign.calibration import (
    empirical_threshold,
    lrt_most_powerful_check,
    randomized_threshold,
    reject_randomized,
)
from banditdesign.rng import derive_stream
from banditdesign.simcore import CompressedHistory

ONE_SIDED_T = TestSpec(TestKind.TWO_SAMPLE_T, sidedness=Sidedness.ONE_SIDED_RIGHT)


def test_estimate_null_pooled_mean():
    h = CompressedHistory(
        k=2, arms=np.array([0, 1]), reward_sum=np.array([3.0, 0.0]),
        reward_sq_sum=np.array([3.0, 0.0]), draws=np.array([3, 1]), horizon_reached=4,
    )
    est = estimate_null(h, RewardKind.BERNOULLI)
    assert est.theta == pytest.approx(0.75)
    assert est.kernel.mean == pytest.approx(0.75)


def test_estimate_null_gaussian_degenerate_scale_floored():
    h = CompressedHistory(
        k=2, arms=np.array([0, 1]), reward_sum=np.array([2.0, 2.0]),
        reward_sq_sum=np.array([2.0, 2.0]), draws=np.array([2, 2]), horizon_reached=4,
    )
    est = estimate_null(h, RewardKind.GAUSSIAN)
    assert est.kernel.mean == pytest.approx(1.0)
    assert est.kernel.scale == pytest.approx(1e-6)


def test_estimate_null_symmetric_two_arms():
    h = CompressedHistory(
        k=2, arms=np.array([0, 1]), reward_sum=np.array([60.0, 40.0]),
        reward_sq_sum=np.array([60.0, 40.0]), draws=np.array([100, 100]), horizon_reached=200,
    )
    assert estimate_null(h, RewardKind.BERNOULLI).theta == pytest.approx(0.5)


def test_estimate_null_empty_errors():
    h = CompressedHistory(k=2, arms=np.array([], dtype=int), reward_sum=np.array([]),
                          reward_sq_sum=np.array([]), draws=np.array([], dtype=int), horizon_reached=0)
    with pytest.raises(ValueError):
        estimate_null(h, RewardKind.BERNOULLI)


def test_empirical_threshold_median_and_monotonicity():
    rng = derive_stream(3)
    x = rng.standard_normal(1001)
    med = empirical_threshold(x, 0.5)
    assert med == pytest.approx(np.median(x), abs=1e-12)
    # order statistics of the same sample: larger alpha, smaller threshold
    qs = [empirical_threshold(x, a) for a in (0.01, 0.05, 0.1, 0.25, 0.5)]
    assert all(a >= b for a, b in zip(qs, qs[1:]))


def test_empirical_threshold_undefined_handling():
    # when the order statistic itself falls on an undefined value, rejection
    # must be impossible at that step
    x = np.array([np.nan] * 19 + [1.0])
    assert math.isinf(empirical_threshold(x, 0.05))
    # a minority of undefined values leaves the quantile on defined ground
    assert empirical_threshold(np.array([np.nan, np.nan, np.nan, 1.0]), 0.05) == pytest.approx(1.0)
    x2 = np.array([np.nan, 0.5, 1.0, 2.0])
    # rank ceil(0.5 * 4) = 2 of the ascending sort with NaN ranked lowest
    assert empirical_threshold(x2, 0.5) == pytest.approx(0.5)


def test_randomized_threshold_hits_level_on_lattice():
    rng = derive_stream(4)
    null = rng.integers(0, 5, 40_000).astype(float)  # atoms 0..4
    q, gamma = randomized_threshold(null, 0.05)
    fresh = rng.integers(0, 5, 40_000).astype(float)
    rej = reject_randomized(fresh, q, gamma, derive_stream(5))
    assert abs(rej.mean() - 0.05) < 0.01


def test_ait_calibrate_recovers_classical_under_ur():
    # UR leaves the classical test valid, so the calibrated final threshold
    # must approach the asymptotic z value
    from banditdesign.calibration import NullEstimate

    est = NullEstimate(RewardKernel(RewardKind.BERNOULLI, 0.5), 0.5)
    sched = ait_calibrate(2, 200, est, ONE_SIDED_T, Policy(PolicyKind.UR), 0.05, 10_000, derive_stream(6))
    assert sched.at(200) == pytest.approx(1.645, abs=0.05)


def test_ait_calibrate_median_at_half_alpha():
    from banditdesign.calibration import NullEstimate

    est = NullEstimate(RewardKernel(RewardKind.BERNOULLI, 0.5), 0.5)
    sched = ait_calibrate(2, 60, est, ONE_SIDED_T, Policy(PolicyKind.UR), 0.5, 2_000, derive_stream(7))
    # at the median, roughly half of fresh null statistics exceed the threshold
    assert -0.3 < sched.at(60) < 0.3


def test_ait_calibrate_deterministic():
    from banditdesign.calibration import NullEstimate

    est = NullEstimate(RewardKernel(RewardKind.BERNOULLI, 0.4), 0.4)
    a = ait_calibrate(2, 80, est, ONE_SIDED_T, Policy(PolicyKind.TS), 0.05, 500, derive_stream(8))
    b = ait_calibrate(2, 80, est, ONE_SIDED_T, Policy(PolicyKind.TS), 0.05, 500, derive_stream(8))
    np.testing.assert_array_equal(a.thresholds, b.thresholds)


def test_ait_early_steps_unrejectable():
    from banditdesign.calibration import NullEstimate

    est = NullEstimate(RewardKernel(RewardKind.BERNOULLI, 0.5), 0.5)
    sched = ait_calibrate(2, 50, est, ONE_SIDED_T, Policy(PolicyKind.UR), 0.05, 300, derive_stream(9))
    # with at most one draw per arm the statistic is undefined: +inf threshold
    assert math.isinf(sched.at(1))


def test_batched_vs_exact_threshold_agreement():
    # design contract: batched null calibration matches exact calibration
    # within 0.05 at the benchmark horizon for TS
    from banditdesign.calibration import NullEstimate

    est = NullEstimate(RewardKernel(RewardKind.BERNOULLI, 0.5), 0.5)
    pol = Policy(PolicyKind.TS)
    qb = ait_calibrate(2, 200, est, ONE_SIDED_T, pol, 0.05, 6_000, derive_stream(10), runner="batched")
    qe = ait_calibrate(2, 200, est, ONE_SIDED_T, pol, 0.05, 6_000, derive_stream(11), runner="exact")
    assert abs(qb.at(200) - qe.at(200)) < 0.05


def test_alpha_quantile_monotone_in_alpha_same_sample():
    from banditdesign.calibration import NullEstimate

    est = NullEstimate(RewardKernel(RewardKind.BERNOULLI, 0.5), 0.5)
    s1 = ait_calibrate(2, 60, est, ONE_SIDED_T, Policy(PolicyKind.UR), 0.02, 1_000, derive_stream(12))
    s2 = ait_calibrate(2, 60, est, ONE_SIDED_T, Policy(PolicyKind.UR), 0.10, 1_000, derive_stream(12))
    defined = np.isfinite(s1.thresholds) & np.isfinite(s2.thresholds)
    assert np.all(s1.thresholds[defined] >= s2.thresholds[defined])


def test_schedule_csv_export():
    from banditdesign.calibration import NullEstimate

    est = NullEstimate(RewardKernel(RewardKind.BERNOULLI, 0.5), 0.5)
    spec = TestSpec(TestKind.TWO_SAMPLE_T)  # two-sided
    sched = ait_calibrate(2, 20, est, spec, Policy(PolicyKind.UR), 0.05, 200, derive_stream(13))
    buf = io.StringIO()
    sched.write_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0].startswith("# sided=abs_two_sided")
    assert lines[1] == "t,q_t"
    assert len(lines) == 22


def test_art_deterministic_policy_never_rejects():
    arms = ArmVector.bernoulli([0.6, 0.4])
    h = run_exact(arms, 60, Policy(PolicyKind.UCB), derive_stream(14))
    p = art_calibrate(h, ONE_SIDED_T, Policy(PolicyKind.UCB), 0.05, 200, derive_stream(15))
    assert p == 1.0


def test_art_undefined_statistic_p_one():
    h = CompressedHistory(
        k=2, arms=np.array([0, 0, 0]), reward_sum=np.array([1.0, 0.0, 1.0]),
        reward_sq_sum=np.array([1.0, 0.0, 1.0]), draws=np.array([1, 1, 1]), horizon_reached=3,
    )
    p = art_calibrate(h, ONE_SIDED_T, Policy(PolicyKind.TS), 0.05, 50, derive_stream(16))
    assert p == 1.0


def test_art_requires_exact_history():
    h = CompressedHistory(
        k=2, arms=np.array([0]), reward_sum=np.array([2.0]),
        reward_sq_sum=np.array([2.0]), draws=np.array([4]), horizon_reached=4,
    )
    with pytest.raises(ValueError, match="exact"):
        art_calibrate(h, ONE_SIDED_T, Policy(PolicyKind.TS), 0.05, 50, derive_stream(17))


def test_art_pvalues_subuniform_under_null():
    # the randomization p-value is valid: P(p <= alpha) <= alpha + MC slack
    from banditdesign import engine
    from banditdesign.calibration import art_pvalues, fold
    from banditdesign.stattests import stat_matrix

    n = 400
    means = np.full((n, 2), 0.5)
    arms_seq, rewards, (pulls, rsum, r2sum) = engine.run_exact_recorded(
        RewardKind.BERNOULLI, means, None, Policy(PolicyKind.TS), 60, derive_stream(18)
    )
    scalar, _, _ = stat_matrix(ONE_SIDED_T, pulls, rsum, r2sum)
    p = art_pvalues(rewards, fold(scalar, ONE_SIDED_T), ONE_SIDED_T, Policy(PolicyKind.TS), 2, 99, derive_stream(19))
    assert np.mean(p <= 0.05) < 0.05 + 0.03
    assert np.mean(p <= 0.25) < 0.25 + 0.06


def test_lrt_check_null_equals_alternative_gives_alpha_power():
    nu = ArmVector.bernoulli([0.5, 0.5])
    rows = lrt_most_powerful_check(nu, nu, Policy(PolicyKind.EPS_GREEDY, epsilon=0.1), 40, 0.05, 2_000,
                                   [ONE_SIDED_T], seed=21)
    for row in rows:
        assert abs(row["power"] - 0.05) < 0.03
        assert abs(row["fpr"] - 0.05) < 0.03


def test_lrt_power_nondecreasing_in_horizon():
    nu0 = ArmVector.bernoulli([0.5, 0.5])
    nu1 = ArmVector.bernoulli([0.6, 0.4])
    powers = []
    for horizon in (30, 60, 120):
        rows = lrt_most_powerful_check(nu0, nu1, Policy(PolicyKind.EPS_GREEDY, epsilon=0.1),
                                       horizon, 0.05, 4_000, [], seed=33)
        powers.append(rows[0]["power"])
    assert powers[1] >= powers[0] - 0.03
    assert powers[2] >= powers[1] - 0.03


def test_lrt_beats_t_at_benchmark():
    # simple-hypotheses optimality: the calibrated likelihood ratio dominates
    # the calibrated t statistic at matched empirical level
    nu0 = ArmVector.bernoulli([0.5, 0.5])
    nu1 = ArmVector.bernoulli([0.6, 0.4])
    rows = lrt_most_powerful_check(nu0, nu1, Policy(PolicyKind.EPS_GREEDY, epsilon=0.1),
                                   50, 0.05, 6_000, [ONE_SIDED_T], seed=34)
    by = {r["test"]: r for r in rows}
    assert by["lrt"]["power"] >= by["two_sample_t"]["power"] - 0.02
