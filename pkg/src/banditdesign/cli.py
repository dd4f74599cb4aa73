"""Command-line front end: benchmark reproduction, ad-hoc design, calibration export.

Results go to stdout and files; progress and timing notes go to stderr. All
runs are seeded explicitly, and running with a different ``--jobs`` value
never changes the output bytes.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

OUT_DIR_ENV = "BANDITDESIGN_OUT_DIR"


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".10g")
    return str(v)


def write_csv(path: str, rows: list[dict]) -> None:
    if not rows:
        raise ValueError("no rows to write")
    cols = list(rows[0].keys())
    with open(path, "w") as fp:
        fp.write(",".join(cols) + "\n")
        for row in rows:
            fp.write(",".join(_fmt(row.get(c)) for c in cols) + "\n")


def write_rows(path_base: str, rows: list[dict], fmt: str) -> str:
    if fmt == "json":
        path = path_base + ".json"
        with open(path, "w") as fp:
            json.dump(rows, fp, indent=1, default=_fmt)
            fp.write("\n")
    else:
        path = path_base + ".csv"
        write_csv(path, rows)
    return path


def _progress(label: str):
    state = {"last": -1}

    def cb(frac: float):
        pct = int(frac * 100)
        if pct >= state["last"] + 10:
            state["last"] = pct
            print(f"[{label}] {pct}%", file=sys.stderr, flush=True)

    return cb


def cmd_reproduce(args) -> int:
    from . import presets

    table = args.table
    seed = args.seed
    jobs = args.jobs
    mf = args.mfactor

    def scaled(m):
        return max(200, int(round(m * mf)))

    t0 = time.perf_counter()
    prog = _progress(table)
    if table == "table1":
        rows = presets.reproduce_table1(seed, scaled(10_000), jobs, progress=prog)
    elif table == "table2":
        rows = presets.reproduce_table2(seed, scaled(10_000), art_resamples=max(50, int(500 * mf)),
                                        null_reps=scaled(5_000), ait_cal_reps=scaled(20_000), progress=prog)
    elif table == "table3":
        rows = presets.reproduce_table3(seed, scaled(10_000 if args.full else 2_000), jobs, progress=prog)
    elif table == "table4":
        rows = presets.reproduce_table4(seed, scaled(10_000 if args.full else 2_000), jobs, progress=prog)
    elif table == "table5":
        rows = presets.reproduce_table5(seed, scaled(10_000 if args.full else 1_500), jobs, progress=prog)
    elif table == "appendixB":
        rows = presets.reproduce_appendix_b(seed, scaled(10_000), art_runs=scaled(4_000),
                                            art_resamples=max(50, int(250 * mf)), progress=prog)
    elif table == "appendixF":
        rows, elapsed = presets.reproduce_appendix_f(seed)
        print(f"[appendixF] power analysis wall-clock: {elapsed:.2f}s", file=sys.stderr)
    else:
        print(f"unknown table id {table!r}", file=sys.stderr)
        return 2

    out_path = write_rows(os.path.join(args.out_dir, table), rows, args.format)
    print(f"[{table}] finished in {time.perf_counter() - t0:.1f}s -> {out_path}", file=sys.stderr)

    # human-readable summary with per-tolerance verdicts
    cols = list(rows[0].keys())
    widths = {c: max(len(c), *(len(_fmt(r.get(c))) for r in rows)) for c in cols}
    print("  ".join(c.ljust(widths[c]) for c in cols))
    for r in rows:
        print("  ".join(_fmt(r.get(c)).ljust(widths[c]) for c in cols))
    checks = [bool(r[c]) for r in rows for c in cols if c.endswith("_pass") and r.get(c) is not None]
    if checks:
        print(f"checks: {sum(checks)}/{len(checks)} pass")
    return 0


def cmd_design(args) -> int:
    from pydantic import ValidationError

    from .config import load_config
    from .objective import InfeasibleDesignError, obj_opt, relative_ecp_curve

    try:
        cfg = load_config(args.config)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        print(f"config error at '{loc}': {first['msg']}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2

    seed = args.seed if args.seed is not None else cfg.seed
    try:
        rec = obj_opt(
            cfg.k, cfg.prior_spec(), cfg.horizon_max, cfg.epsilons, cfg.test_spec(),
            cfg.alpha, cfg.beta_target, cfg.w, cfg.replications, cfg.grid_points, seed,
            jobs=args.jobs, progress=_progress("design"),
        )
    except InfeasibleDesignError as e:
        print(f"infeasible: {e}", file=sys.stderr)
        return 3

    out = rec.to_dict()
    w_values = cfg.w_values()
    curve = relative_ecp_curve(rec.feasible_set, w_values)
    path = os.path.join(args.out_dir, "design.json")
    with open(path, "w") as fp:
        json.dump(out, fp, indent=1)
        fp.write("\n")
    print(json.dumps({k: out[k] for k in ("parameter", "horizon", "mean_reward", "ecp", "policy")}, indent=1))
    if args.curves:
        rows = []
        for wi, w in enumerate(curve["w"]):
            row = {"w": float(w), "best_phi": float(curve["best_phi"][wi])}
            for pi, phi in enumerate(curve["phis"]):
                row[f"rel_ecp_{phi:g}"] = float(curve["relative"][pi, wi])
            rows.append(row)
        curve_path = write_rows(os.path.join(args.out_dir, "relative_ecp"), rows, args.format)
        power_rows = [
            {"phi": float(phi), "t": int(t), "beta": float(b), "mean_reward": float(r)}
            for phi, c in out["curves"].items()
            for t, b, r in zip(c["time_grid"], c["beta_grid"], c["mean_reward_grid"])
        ]
        power_path = write_rows(os.path.join(args.out_dir, "power_curves"), power_rows, args.format)
        print(f"curves -> {curve_path}, {power_path}", file=sys.stderr)
    print(f"design -> {path}", file=sys.stderr)
    return 0


def cmd_calibrate(args) -> int:
    from pydantic import ValidationError

    from .calibration import NullEstimate, ait_calibrate
    from .config import load_config
    from .power import PriorKind
    from .rng import STAGE_CALIBRATION, derive_stream
    from .simcore import Policy, PolicyKind, RewardKernel, RewardKind

    try:
        cfg = load_config(args.config)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(p) for p in first["loc"])
        print(f"config error at '{loc}': {first['msg']}", file=sys.stderr)
        return 2
    except (OSError, json.JSONDecodeError) as e:
        print(f"cannot read config: {e}", file=sys.stderr)
        return 2

    prior = cfg.prior_spec()
    kind = prior.observed_kind
    if prior.kind == PriorKind.BETA_IID:
        theta = prior.a / (prior.a + prior.b)
        kernel = RewardKernel(kind, theta)
    elif prior.kind == PriorKind.GAUSSIAN_IID:
        kernel = RewardKernel(kind, prior.loc, prior.reward_scale)
    else:
        mean = float(np.mean(prior.means))
        kernel = RewardKernel(kind, mean, prior.reward_scale) if kind == RewardKind.GAUSSIAN else RewardKernel(kind, mean)

    seed = args.seed if args.seed is not None else cfg.seed
    policy = Policy(PolicyKind.EPS_TS, epsilon=cfg.epsilons[0])
    schedule = ait_calibrate(
        cfg.k, cfg.horizon_max, NullEstimate(kernel, kernel.mean), cfg.test_spec(), policy,
        cfg.alpha, cfg.replications, derive_stream(seed, 0, STAGE_CALIBRATION),
    )
    path = os.path.join(args.out_dir, "schedule.csv")
    with open(path, "w") as fp:
        schedule.write_csv(fp)
    print(f"calibrated thresholds for t=1..{schedule.horizon} "
          f"(sided={schedule.sided}, alpha={schedule.alpha:g}) -> {path}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="banditdesign",
                                     description="design and calibrate adaptive bandit experiments")
    parser.add_argument("--seed", type=int, default=None, help="master seed (default 42 or config seed)")
    parser.add_argument("--jobs", type=int, default=max(1, os.cpu_count() or 1),
                        help="worker processes for independent tasks")
    parser.add_argument("--out-dir", default=None, help=f"output directory (or ${OUT_DIR_ENV})")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    sub = parser.add_subparsers(dest="command", required=True)

    p_rep = sub.add_parser("reproduce", help="run a built-in benchmark table")
    p_rep.add_argument("table", choices=("table1", "table2", "table3", "table4", "table5", "appendixB", "appendixF"))
    p_rep.add_argument("--mfactor", type=float, default=1.0,
                       help="scale all replication counts (for smoke/determinism runs)")
    p_rep.add_argument("--full", action="store_true", help="use full published replication counts")

    p_des = sub.add_parser("design", help="optimize a design from a config file")
    p_des.add_argument("-c", "--config", required=True)
    p_des.add_argument("--curves", action="store_true", help="also write relative-score curves")

    p_cal = sub.add_parser("calibrate", help="export a calibrated threshold schedule")
    p_cal.add_argument("-c", "--config", required=True)

    args = parser.parse_args(argv)
    if args.out_dir is None:
        args.out_dir = os.environ.get(OUT_DIR_ENV, ".")
    os.makedirs(args.out_dir, exist_ok=True)
    if args.seed is None and args.command == "reproduce":
        args.seed = 42

    if args.command == "reproduce":
        return cmd_reproduce(args)
    if args.command == "design":
        return cmd_design(args)
    if args.command == "calibrate":
        return cmd_calibrate(args)
    return 2


if __name__ == "__main__":
    raise SystemExit(main())
