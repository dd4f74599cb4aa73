"""Benchmark presets: configurations, published reference values, and runners.

Each ``reproduce_*`` function runs one built-in benchmark at a configurable
replication budget and returns rows pairing our estimates with the published
reference values plus per-tolerance pass flags. The CLI and the acceptance
suite both call these, so there is exactly one definition of every preset.

Replication counts below the published 10,000 are supported for desk-scale
runs (the acceptance defaults are noted per table); tolerances follow the
widened values documented for reduced budgets.
"""

from __future__ import annotations

from .objective import DesignRecommendation, ecp, obj_opt, post_experiment_eval, sensitivity_sweep
from .power import PriorKind, PriorSpec, fpr_analysis, power_analysis, power_comparison
from .simcore import Policy, PolicyKind, RewardKernel, RewardKind
from .stattests import Sidedness, TestKind, TestSpec

EPS_GRID = [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 1.0]

# six-arm Gaussian study: pairwise two-sided comparisons against a control
EMPIRICAL_PRIOR = PriorSpec(PriorKind.GAUSSIAN_IID, k=6, loc=0.81, scale=0.015, reward_scale=0.1)
EMPIRICAL_SPEC = TestSpec(TestKind.T_CONTROL, control_arm=0, min_effect=0.025, family_wise=False)
EMPIRICAL_W = 0.01
EMPIRICAL_T_MAX = 6000
EMPIRICAL_REALIZED_MEANS = (0.810, 0.806, 0.819, 0.778, 0.827, 0.813)
EMPIRICAL_REWARD_SCALE = 0.1

# three-arm Bernoulli study with a Beta(5, 5) prior over arm means
BETA_PRIOR = PriorSpec(PriorKind.BETA_IID, k=3, a=5.0, b=5.0)
BETA_W = 0.1
BETA_T_MAX = 4000
BETA_SPECS = {
    "anova": TestSpec(TestKind.ANOVA, min_effect=0.1),
    "t_constant": TestSpec(TestKind.T_CONSTANT, baseline=0.5, min_effect=0.1, family_wise=False),
    "t_control": TestSpec(TestKind.T_CONTROL, control_arm=0, min_effect=0.1, family_wise=False),
    "tukey": TestSpec(TestKind.TUKEY_BEST, min_effect=0.1),
}

# two-arm Bernoulli benchmark used by the power-comparison tables
BENCH_MEANS = (0.6, 0.4)
BENCH_HORIZON = 200
BENCH_SPEC_ONE_SIDED = TestSpec(TestKind.TWO_SAMPLE_T, sidedness=Sidedness.ONE_SIDED_RIGHT)
BENCH_SPEC_TWO_SIDED = TestSpec(TestKind.TWO_SAMPLE_T, sidedness=Sidedness.TWO_SIDED)

TABLE1_MUS = (0.1, 0.3, 0.5, 0.7, 0.9)
TABLE1_REF_AIT = (0.052, 0.050, 0.050, 0.049, 0.050)
TABLE1_REF_NAIVE = (0.071, 0.086, 0.099, 0.108, 0.132)

TABLE2_POLICIES = (
    ("ts", Policy(PolicyKind.TS)),
    ("eps_greedy(0.1)", Policy(PolicyKind.EPS_GREEDY, epsilon=0.1)),
    ("ucb", Policy(PolicyKind.UCB)),
)
TABLE2_REF = {
    "ts": {"ait_power": 0.520, "art_power": 0.434, "ait_fpr": 0.053, "art_fpr": 0.052},
    "eps_greedy(0.1)": {"ait_power": 0.490, "art_power": 0.443, "ait_fpr": 0.057, "art_fpr": 0.057},
    "ucb": {"ait_power": 0.781, "art_power": 0.050, "ait_fpr": 0.054, "art_fpr": 0.050},
}

APPENDIX_B_EPS = (0.0, 0.1, 0.2, 0.4, 0.8)
APPENDIX_B_REF_ART = (0.434, 0.607, 0.704, 0.810, 0.871)
APPENDIX_B_REF_AIT = (0.520, 0.675, 0.750, 0.827, 0.878)

TABLE3_REF = {
    "ur": {"fpr": 0.050, "steps": 906, "reward": 0.8100, "ecp": 0.7419, "post_reward": 0.8053, "post_ecp": 0.7372},
    "ts_naive": {"fpr": 0.072, "steps": 2767},
    "ts_ait": {"fpr": 0.050, "steps": 4186, "reward": 0.8251, "ecp": 0.7417, "post_reward": 0.8255, "post_ecp": 0.7421},
    "eps_ts_opt": {"fpr": 0.050, "steps": 1338, "reward": 0.8185, "ecp": 0.7465, "post_reward": 0.8162, "post_ecp": 0.7443},
}

TABLE4_REF = {
    "anova": {"ur": -0.052, "ts": -0.079, "eps_ts(0.5)": -0.012, "optimized": -0.009, "best_eps": 0.4},
    "t_constant": {"ur": -0.012, "ts": 0.075, "eps_ts(0.5)": 0.042, "optimized": 0.075, "best_eps": 0.0},
    "t_control": {"ur": -0.077, "ts": -0.163, "eps_ts(0.5)": -0.046, "optimized": -0.042, "best_eps": 0.4},
    "tukey": {"ur": -0.112, "ts": -0.016, "eps_ts(0.5)": -0.021, "optimized": 0.012, "best_eps": 0.2},
}

TABLE5_LOCATIONS = (0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50)
TABLE5_REF_LOC_MIS = (0.047, 0.024, 0.001, 0.000, 0.002, 0.000, 0.001)
TABLE5_REF_LOC_RAND = (0.083, 0.050, 0.018, 0.017, 0.019, 0.018, 0.019)
TABLE5_SCALES = (0.09, 0.11, 0.13, 0.15, 0.17, 0.19, 0.21)
TABLE5_REF_SCALE_MIS = (0.010, 0.004, 0.000, 0.000, 0.003, 0.005, 0.005)
TABLE5_REF_SCALE_RAND = (0.019, 0.017, 0.016, 0.017, 0.021, 0.025, 0.037)
TABLE5_DESIGN_LOC = 0.35
TABLE5_DESIGN_SCALE = 0.15


def eps_ts(epsilon: float) -> Policy:
    return Policy(PolicyKind.EPS_TS, epsilon=float(epsilon))


def beta_prior_from_moments(loc: float, scale: float, k: int = 3) -> PriorSpec:
    """Beta(a, b) prior matched to a given mean and standard deviation."""
    nu = loc * (1.0 - loc) / scale**2 - 1.0
    if nu <= 0:
        raise ValueError("scale too large for a Beta prior at this location")
    return PriorSpec(PriorKind.BETA_IID, k=k, a=loc * nu, b=(1.0 - loc) * nu)


def reproduce_table1(seed: int = 42, m_reps: int = 10_000, jobs: int = 1, progress=None) -> list[dict]:
    """False positive rates of the naive one-sided threshold versus the corrected test."""
    policy = Policy(PolicyKind.TS)
    rows = []
    for i, mu in enumerate(TABLE1_MUS):
        kernel = RewardKernel(RewardKind.BERNOULLI, mu)
        naive = fpr_analysis(2, kernel, BENCH_HORIZON, policy, BENCH_SPEC_ONE_SIDED,
                             "classical", m_reps, seed + i, alpha=0.05)
        ait = fpr_analysis(2, kernel, BENCH_HORIZON, policy, BENCH_SPEC_ONE_SIDED,
                           "ait", m_reps, seed + i, alpha=0.05)
        rows.append(
            {
                "mu": mu,
                "ait_fpr": ait,
                "ait_ref": TABLE1_REF_AIT[i],
                "ait_pass": 0.04 <= ait <= 0.06,
                "naive_fpr": naive,
                "naive_ref": TABLE1_REF_NAIVE[i],
                "naive_pass": naive > 0.065,
            }
        )
        if progress is not None:
            progress((i + 1) / len(TABLE1_MUS))
    naive_vals = [r["naive_fpr"] for r in rows]
    monotone = all(b >= a - 0.01 for a, b in zip(naive_vals, naive_vals[1:]))
    for r in rows:
        r["naive_monotone_pass"] = monotone
    return rows


def reproduce_table2(seed: int = 42, m_reps: int = 10_000, art_resamples: int = 500,
                     null_reps: int = 5_000, ait_cal_reps: int = 20_000, progress=None) -> list[dict]:
    """Power and FPR of the corrected test versus the randomization baseline."""
    rows = power_comparison(
        list(TABLE2_POLICIES), BENCH_SPEC_ONE_SIDED, BENCH_MEANS, BENCH_HORIZON, 0.05,
        m_reps, seed, art_resamples=art_resamples, null_eval_reps=null_reps,
        art_cal_reps=null_reps, ait_cal_reps=ait_cal_reps, progress=progress,
    )
    out = []
    for r in rows:
        ref = TABLE2_REF[r["policy"]]
        out.append(
            {
                "policy": r["policy"],
                "ait_power": r["ait_power"],
                "ait_power_ref": ref["ait_power"],
                "ait_power_pass": abs(r["ait_power"] - ref["ait_power"]) <= 0.03,
                "art_power": r["art_power"],
                "art_power_ref": ref["art_power"],
                "art_power_pass": abs(r["art_power"] - ref["art_power"]) <= 0.03,
                "ait_fpr": r["ait_fpr"],
                "art_fpr": r["art_fpr"],
                "fpr_pass": abs(r["ait_fpr"] - 0.05) <= 0.01 and abs(r["art_fpr"] - 0.05) <= 0.01,
                "ait_ge_art": r["ait_power"] >= r["art_power"],
            }
        )
    return out


def reproduce_appendix_b(seed: int = 42, m_reps: int = 10_000, art_runs: int = 4_000,
                         art_resamples: int = 250, progress=None) -> list[dict]:
    """Exploration-rate sweep of corrected-test power versus the randomization baseline."""
    policies = [(f"eps_ts({e:g})", eps_ts(e)) for e in APPENDIX_B_EPS]
    rows = power_comparison(
        policies, BENCH_SPEC_ONE_SIDED, BENCH_MEANS, BENCH_HORIZON, 0.05, m_reps, seed,
        art_resamples=art_resamples, art_rule="plain", art_runs=art_runs, art_fpr=False,
        null_eval_reps=max(500, m_reps // 2), ait_cal_reps=2 * m_reps, progress=progress,
    )
    out = []
    for i, r in enumerate(rows):
        out.append(
            {
                "eps": APPENDIX_B_EPS[i],
                "ait_power": r["ait_power"],
                "ait_ref": APPENDIX_B_REF_AIT[i],
                "ait_pass": abs(r["ait_power"] - APPENDIX_B_REF_AIT[i]) <= 0.03,
                "art_power": r["art_power"],
                "art_ref": APPENDIX_B_REF_ART[i],
                "ait_ge_art": r["ait_power"] >= r["art_power"],
            }
        )
    ait_vals = [r["ait_power"] for r in out]
    monotone = all(b >= a - 0.02 for a, b in zip(ait_vals, ait_vals[1:]))
    for r in out:
        r["monotone_pass"] = monotone
    return out


def empirical_design(seed: int = 42, m_reps: int = 2_000, grid_points: int = 10,
                     jobs: int = 1, progress=None) -> DesignRecommendation:
    """Optimize the exploration rate for the six-arm study preset.

    Runs the exact (per-step) process: at multi-thousand-step horizons the
    batched approximation's lumpier allocations measurably depress power for
    strongly exploiting policies, shifting the minimal horizons.
    """
    return obj_opt(
        EMPIRICAL_PRIOR.k, EMPIRICAL_PRIOR, EMPIRICAL_T_MAX, EPS_GRID, EMPIRICAL_SPEC,
        0.05, 0.2, EMPIRICAL_W, m_reps, grid_points, seed,
        runner="exact", null_reps=max(100, m_reps // 2), jobs=jobs, progress=progress,
    )


def reproduce_table3(seed: int = 42, m_reps: int = 2_000, jobs: int = 1, progress=None) -> list[dict]:
    """Design comparison on the six-arm study: naive versus corrected versus optimized."""
    step_tol = 0.10 if m_reps >= 10_000 else 0.15
    rec = empirical_design(seed, m_reps, jobs=jobs,
                           progress=(lambda f: progress(0.6 * f)) if progress else None)
    by_phi = {r.phi: r for r in rec.feasible_set if r.feasible}
    ur, ts = by_phi[1.0], by_phi[0.0]
    opt = by_phi[rec.parameter]

    # naive design: uncorrected thresholds for the TS policy
    naive_curve = power_analysis(
        EMPIRICAL_PRIOR.k, EMPIRICAL_PRIOR, EMPIRICAL_T_MAX, eps_ts(0.0), EMPIRICAL_SPEC,
        0.05, m_reps, 10, seed + 101, threshold_source="classical", runner="exact",
    )
    ts_naive_steps = naive_curve.minimal_horizon(0.2)
    null_kernel = RewardKernel(RewardKind.GAUSSIAN, EMPIRICAL_PRIOR.loc, EMPIRICAL_PRIOR.reward_scale)
    fpr_reps = min(m_reps * 2, 4_000)
    naive_fpr = fpr_analysis(6, null_kernel, ts_naive_steps, eps_ts(0.0), EMPIRICAL_SPEC,
                             "classical", fpr_reps, seed + 3, alpha=0.05, runner="exact")
    if progress is not None:
        progress(0.75)

    def ait_fpr(policy, horizon, sub):
        return fpr_analysis(6, null_kernel, horizon, policy, EMPIRICAL_SPEC, "ait",
                            fpr_reps, seed + 7 + sub, alpha=0.05, runner="exact",
                            null_reps=max(100, m_reps // 2))

    rows = []
    post_reps = max(m_reps, 2_000)
    for key, res, policy in (("ur", ur, eps_ts(1.0)), ("ts_ait", ts, eps_ts(0.0)),
                             ("eps_ts_opt", opt, eps_ts(rec.parameter))):
        ref = TABLE3_REF[key]
        sub_rec = DesignRecommendation(res.phi, res.horizon, res.mean_reward, res.ecp,
                                       policy, [], {})
        post_r, post_e = post_experiment_eval(sub_rec, EMPIRICAL_REALIZED_MEANS,
                                              EMPIRICAL_REWARD_SCALE, post_reps, seed + 31, EMPIRICAL_W)
        fpr = ait_fpr(policy, res.horizon, int(res.phi * 10))
        rows.append(
            {
                "design": key,
                "eps": res.phi,
                "fpr": fpr,
                "steps": res.horizon,
                "steps_ref": ref["steps"],
                "steps_pass": abs(res.horizon - ref["steps"]) <= step_tol * ref["steps"],
                "reward": res.mean_reward,
                "reward_ref": ref["reward"],
                "ecp": res.ecp,
                "ecp_ref": ref["ecp"],
                "ecp_pass": abs(res.ecp - ref["ecp"]) <= 0.005,
                "post_reward": post_r,
                "post_reward_ref": ref["post_reward"],
                "post_reward_pass": abs(post_r - ref["post_reward"]) <= 0.005,
                "post_ecp": post_e,
                "post_ecp_ref": ref["post_ecp"],
            }
        )
    rows.insert(1, {
        "design": "ts_naive",
        "eps": 0.0,
        "fpr": naive_fpr,
        "fpr_ref": TABLE3_REF["ts_naive"]["fpr"],
        "fpr_pass": abs(naive_fpr - TABLE3_REF["ts_naive"]["fpr"]) <= 0.012,
        "steps": ts_naive_steps,
        "steps_ref": TABLE3_REF["ts_naive"]["steps"],
    })
    if progress is not None:
        progress(1.0)
    return rows


def reproduce_table4(seed: int = 42, m_reps: int = 2_000, jobs: int = 1, progress=None) -> list[dict]:
    """Cost-penalized reward of fixed designs versus the optimized exploration rate."""
    rows = []
    null_reps = max(150, 3 * m_reps // 20)
    for ti, (name, spec) in enumerate(BETA_SPECS.items()):
        rec = obj_opt(3, BETA_PRIOR, BETA_T_MAX, EPS_GRID, spec, 0.05, 0.2, BETA_W,
                      m_reps, 10, seed + 17 * ti, null_reps=null_reps, jobs=jobs, keep_curves=False)
        by_phi = {r.phi: r for r in rec.feasible_set}
        ref = TABLE4_REF[name]

        def cell(phi):
            r = by_phi.get(phi)
            return r.ecp if (r is not None and r.feasible) else None

        naive_cells = {"ur": cell(1.0), "ts": cell(0.0), "eps_ts(0.5)": cell(0.5)}
        opt_ok = all(v is None or rec.ecp >= v - 0.01 for v in naive_cells.values())
        rows.append(
            {
                "test": name,
                "ur": naive_cells["ur"],
                "ur_ref": ref["ur"],
                "ts": naive_cells["ts"],
                "ts_ref": ref["ts"],
                "eps_ts_05": naive_cells["eps_ts(0.5)"],
                "eps_ts_05_ref": ref["eps_ts(0.5)"],
                "optimized": rec.ecp,
                "optimized_ref": ref["optimized"],
                "best_eps": rec.parameter,
                "best_eps_ref": ref["best_eps"],
                "best_eps_pass": abs(rec.parameter - ref["best_eps"]) <= 0.1 + 1e-9,
                "optimized_ge_naive_pass": opt_ok,
            }
        )
        if progress is not None:
            progress((ti + 1) / len(BETA_SPECS))
    return rows


def reproduce_table5(seed: int = 42, m_reps: int = 1_500, jobs: int = 1, progress=None) -> list[dict]:
    """Cost of optimizing under a mis-specified prior, against random parameter picks."""
    design = beta_prior_from_moments(TABLE5_DESIGN_LOC, TABLE5_DESIGN_SCALE)
    spec = BETA_SPECS["anova"]
    out = []
    settings = (
        [("location", loc, beta_prior_from_moments(loc, TABLE5_DESIGN_SCALE),
          TABLE5_REF_LOC_MIS[i], TABLE5_REF_LOC_RAND[i]) for i, loc in enumerate(TABLE5_LOCATIONS)]
        + [("scale", sc, beta_prior_from_moments(TABLE5_DESIGN_LOC, sc),
            TABLE5_REF_SCALE_MIS[i], TABLE5_REF_SCALE_RAND[i]) for i, sc in enumerate(TABLE5_SCALES)]
    )
    rows = sensitivity_sweep(
        design, [(f"{axis}={val:g}", prior) for axis, val, prior, _, _ in settings],
        spec, EPS_GRID, 2_500, 0.05, 0.2, BETA_W, m_reps, 10, seed, jobs=jobs, progress=progress,
    )
    for (axis, val, _, mis_ref, rand_ref), row in zip(settings, rows):
        matched = (axis == "location" and val == TABLE5_DESIGN_LOC) or (axis == "scale" and val == TABLE5_DESIGN_SCALE)
        out.append(
            {
                "axis": axis,
                "setting": val,
                "mis_opt_loss": row["mis_opt_loss"],
                "mis_ref": mis_ref,
                "rand_baseline_loss": row["random_baseline_loss"],
                "rand_ref": rand_ref,
                "mis_le_rand_pass": row["mis_opt_loss"] <= row["random_baseline_loss"] + 0.01,
                "matched_pass": (row["mis_opt_loss"] <= 0.005) if matched else True,
            }
        )
    return out


def reproduce_appendix_f(seed: int = 42) -> tuple[list[dict], float]:
    """Single power-analysis configuration used for the timing budget check."""
    import time

    prior = PriorSpec(PriorKind.FIXED, k=2, means=BENCH_MEANS)
    t0 = time.perf_counter()
    curve = power_analysis(2, prior, BENCH_HORIZON, Policy(PolicyKind.TS), BENCH_SPEC_TWO_SIDED,
                           0.05, 1_000, 10, seed, null_reps=100)
    elapsed = time.perf_counter() - t0
    milestones = [50, 100, 150, 200]
    rows = [
        {"t": t, "beta": float(curve.beta_t[t - 1]), "mean_reward": float(curve.mean_reward_t[t - 1])}
        for t in milestones
    ]
    return rows, elapsed


REPRODUCE_IDS = ("table1", "table2", "table3", "table4", "table5", "appendixB", "appendixF")
