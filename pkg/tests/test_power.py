import numpy as np
import pytest

from banditdesign import Policy, PolicyKind, RewardKernel, RewardKind, TestKind, TestSpec, Sidedness
from banditdesign.power import (
    PriorKind,
    PriorSpec,
    calibration_thetas,
    fpr_analysis,
    interp_thresholds,
    power_analysis,
    qualifying_units,
)
from banditdesign.rng import derive_stream

TWO_SIDED_T = TestSpec(TestKind.TWO_SAMPLE_T)
ONE_SIDED_T = TestSpec(TestKind.TWO_SAMPLE_T, sidedness=Sidedness.ONE_SIDED_RIGHT)


def test_prior_spec_validation():
    with pytest.raises(ValueError):
        PriorSpec(PriorKind.BETA_IID, k=1)
    with pytest.raises(ValueError):
        PriorSpec(PriorKind.BETA_IID, k=2, a=0.0)
    with pytest.raises(ValueError):
        PriorSpec(PriorKind.FIXED, k=3, means=(0.5, 0.5))
    with pytest.raises(ValueError):
        PriorSpec(PriorKind.GAUSSIAN_IID, k=2, reward_scale=0.0)


def test_prior_draws():
    rng = derive_stream(1)
    beta = PriorSpec(PriorKind.BETA_IID, k=3, a=5.0, b=5.0)
    m = beta.draw_means(5_000, rng)
    assert m.shape == (5_000, 3)
    assert abs(m.mean() - 0.5) < 0.01
    fixed = PriorSpec(PriorKind.FIXED, k=2, means=(0.7, 0.2))
    np.testing.assert_array_equal(fixed.draw_means(3, rng), [[0.7, 0.2]] * 3)


def test_interp_exact_at_grid_points_and_clamped():
    grid = np.array([0.2, 0.5, 0.8])
    q = np.array([[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]])
    out = interp_thresholds(grid, q, np.array([0.2, 0.5, 0.8, 0.35, 0.0, 1.0]))
    np.testing.assert_array_equal(out[0], [1.0, 10.0])  # exact at grid
    np.testing.assert_array_equal(out[1], [2.0, 20.0])
    np.testing.assert_array_equal(out[2], [3.0, 30.0])
    np.testing.assert_allclose(out[3], [1.5, 15.0])  # linear between
    np.testing.assert_array_equal(out[4], [1.0, 10.0])  # clamped below
    np.testing.assert_array_equal(out[5], [3.0, 30.0])  # clamped above


def test_interp_handles_infinite_thresholds():
    grid = np.array([0.2, 0.8])
    q = np.array([[np.inf], [2.0]])
    out = interp_thresholds(grid, q, np.array([0.2, 0.5, 0.8]))
    assert np.isinf(out[0, 0])
    assert np.isinf(out[1, 0])  # any mixture with +inf stays +inf
    assert out[2, 0] == 2.0


def test_qualifying_units_by_kind():
    means = np.array([[0.5, 0.62, 0.7], [0.5, 0.55, 0.58]])
    t_const = TestSpec(TestKind.T_CONSTANT, baseline=0.5, min_effect=0.1)
    np.testing.assert_array_equal(
        qualifying_units(t_const, means), [[False, True, True], [False, False, False]]
    )
    t_ctrl = TestSpec(TestKind.T_CONTROL, control_arm=0, min_effect=0.1)
    np.testing.assert_array_equal(
        qualifying_units(t_ctrl, means), [[True, True], [False, False]]
    )
    tukey = TestSpec(TestKind.TUKEY_BEST, min_effect=0.05)
    np.testing.assert_array_equal(qualifying_units(tukey, means), [True, False])
    anova = TestSpec(TestKind.ANOVA, min_effect=0.1)
    np.testing.assert_array_equal(qualifying_units(anova, means), [True, False])
    # a zero minimum effect disables every filter
    spec0 = TestSpec(TestKind.TWO_SAMPLE_T, min_effect=0.0)
    assert qualifying_units(spec0, np.array([[0.5, 0.5]])).all()


def test_calibration_thetas_pinned_for_baseline_test():
    theta = np.array([0.3, 0.6])
    spec = TestSpec(TestKind.T_CONSTANT, baseline=0.5)
    np.testing.assert_array_equal(calibration_thetas(spec, theta), [0.5, 0.5])
    np.testing.assert_array_equal(calibration_thetas(TWO_SIDED_T, theta), theta)


def test_power_analysis_null_setting_beta_matches_alpha():
    # all arms equal with no effect filter: rejection rate equals the FPR
    prior = PriorSpec(PriorKind.FIXED, k=2, means=(0.5, 0.5))
    curve = power_analysis(2, prior, 150, Policy(PolicyKind.UR), TWO_SIDED_T, 0.05, 2_000, 5, 99)
    assert curve.beta_t[-1] == pytest.approx(0.95, abs=0.02)
    assert curve.m_effective == 2_000


def test_power_analysis_effect_filter_error():
    prior = PriorSpec(PriorKind.FIXED, k=2, means=(0.5, 0.5))
    spec = TestSpec(TestKind.TWO_SAMPLE_T, min_effect=0.3)
    with pytest.raises(ValueError, match="minimum effect"):
        power_analysis(2, prior, 50, Policy(PolicyKind.UR), spec, 0.05, 500, 5, 99)


def test_power_curve_monotone_up_to_noise():
    prior = PriorSpec(PriorKind.FIXED, k=2, means=(0.7, 0.3))
    curve = power_analysis(2, prior, 200, Policy(PolicyKind.UR), TWO_SIDED_T, 0.05, 3_000, 5, 7)
    # 20-point moving average of beta decreases monotonically
    window = np.convolve(curve.beta_t, np.ones(20) / 20, mode="valid")
    assert np.all(np.diff(window) <= 1e-9)


def test_power_analysis_reward_tracks_environment():
    prior = PriorSpec(PriorKind.FIXED, k=2, means=(1.0, 1.0))
    curve = power_analysis(2, prior, 60, Policy(PolicyKind.TS),
                           TestSpec(TestKind.TWO_SAMPLE_T), 0.5, 500, 5, 7)
    np.testing.assert_allclose(curve.mean_reward_t[np.isfinite(curve.mean_reward_t)], 1.0)


def test_power_analysis_classical_source():
    prior = PriorSpec(PriorKind.FIXED, k=2, means=(0.7, 0.3))
    c = power_analysis(2, prior, 120, Policy(PolicyKind.UR), TWO_SIDED_T, 0.05, 1_000, 5, 7,
                       threshold_source="classical")
    assert c.minimal_horizon(0.2) is not None


def test_fpr_classical_valid_under_ur():
    kern = RewardKernel(RewardKind.BERNOULLI, 0.5)
    fpr = fpr_analysis(2, kern, 150, Policy(PolicyKind.UR), TWO_SIDED_T, "classical", 8_000, 5, alpha=0.05)
    assert abs(fpr - 0.05) < 0.012


def test_fpr_ait_controls_adaptive_policy():
    kern = RewardKernel(RewardKind.BERNOULLI, 0.5)
    fpr = fpr_analysis(2, kern, 150, Policy(PolicyKind.TS), ONE_SIDED_T, "ait", 6_000, 5, alpha=0.05)
    assert abs(fpr - 0.05) < 0.015


def test_mc_scaling_of_beta_standard_error():
    # quadrupling replications roughly halves the spread of the estimate
    prior = PriorSpec(PriorKind.FIXED, k=2, means=(0.65, 0.35))

    def betas(m, base_seed):
        out = []
        for s in range(6):
            c = power_analysis(2, prior, 100, Policy(PolicyKind.UR), TWO_SIDED_T, 0.05, m, 5,
                               base_seed + 1000 * s, null_reps=400)
            out.append(c.beta_t[-1])
        return np.std(out, ddof=1)

    sd_small = betas(300, 11)
    sd_big = betas(1200, 17)
    assert sd_big < sd_small  # directional check; the ratio is noisy at 6 runs
    assert sd_small / max(sd_big, 1e-9) > 1.2


def test_grid_count_insensitivity_minimal_horizon():
    # the grid-binned approximation is insensitive to the number of grid
    # points at fixed per-grid calibration budget
    prior = PriorSpec(PriorKind.BETA_IID, k=2, a=8.0, b=4.0)
    spec = TestSpec(TestKind.TWO_SAMPLE_T, min_effect=0.1)
    t_by_b = []
    for b in (5, 20):
        c = power_analysis(2, prior, 260, Policy(PolicyKind.UR), spec, 0.05, 2_000, b, 23,
                           null_reps=500)
        t_by_b.append(c.minimal_horizon(0.2))
    assert abs(t_by_b[0] - t_by_b[1]) <= 0.05 * max(t_by_b)


def test_per_replication_calibration_agrees_with_grid():
    # per-replication thresholds (the expensive exact reading) agree with the
    # B=10 grid interpolation on minimal horizon within 5%
    prior = PriorSpec(PriorKind.BETA_IID, k=2, a=8.0, b=4.0)
    spec = TestSpec(TestKind.TWO_SAMPLE_T, min_effect=0.1)
    grid_c = power_analysis(2, prior, 260, Policy(PolicyKind.UR), spec, 0.05, 400, 10, 31,
                            null_reps=400)
    per_c = power_analysis(2, prior, 260, Policy(PolicyKind.UR), spec, 0.05, 400, 10, 31,
                           null_reps=400, per_replication_calibration=True)
    t1, t2 = grid_c.minimal_horizon(0.2), per_c.minimal_horizon(0.2)
    # scaled-down proxy of the full-budget agreement claim; at 400
    # replications the minimal-horizon estimates themselves jitter ~10 steps
    assert abs(t1 - t2) <= max(0.12 * max(t1, t2), 30)


@pytest.mark.parametrize(
    "policy,spec",
    [
        (Policy(PolicyKind.EPS_TS, epsilon=0.2), TestSpec(TestKind.ANOVA)),
        (Policy(PolicyKind.UCB), ONE_SIDED_T),
        (Policy(PolicyKind.EPS_GREEDY, epsilon=0.1), TestSpec(TestKind.T_CONTROL, family_wise=False)),
        (Policy(PolicyKind.TS), TestSpec(TestKind.T_CONSTANT, baseline=0.5, family_wise=False)),
        (Policy(PolicyKind.TS), TestSpec(TestKind.TUKEY_BEST)),
    ],
)
def test_fpr_control_across_policy_test_pairs(policy, spec):
    # calibrated rejection holds its level for every shipped (policy, test) pair
    k = 2 if spec.kind == TestKind.TWO_SAMPLE_T else 3
    kern = RewardKernel(RewardKind.BERNOULLI, 0.5)
    fpr = fpr_analysis(k, kern, 150, policy, spec, "ait", 4_000, 61, alpha=0.05, null_reps=1500)
    assert abs(fpr - 0.05) < 0.015, f"{policy.label} x {spec.kind.value}: fpr {fpr:.3f}"
