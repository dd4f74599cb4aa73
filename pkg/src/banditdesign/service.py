"""HTTP service exposing design-optimization jobs to the web console.

Jobs are persisted as JSON documents in a data directory keyed by id, so
completed runs survive restarts. Submitting a config identical to a finished
job (same seed included) returns the cached job. The score endpoint
re-evaluates the stored feasible set in closed form for any extension cost,
so slider interaction never re-simulates.

Local single-user tool: CORS is open and there is no authentication, which
makes it unsuitable for multi-tenant deployment as-is.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor

from fastapi import FastAPI
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import ValidationError

from .config import RunConfig
from .objective import InfeasibleDesignError, obj_opt, relative_ecp_curve


def config_hash(data: dict) -> str:
    return hashlib.sha256(json.dumps(data, sort_keys=True).encode()).hexdigest()


class JobStore:
    """Directory-backed job records; writes are serialized by a lock."""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        os.makedirs(data_dir, exist_ok=True)
        self._lock = threading.Lock()
        self._jobs: dict[str, dict] = {}
        for name in os.listdir(data_dir):
            if name.endswith(".json"):
                try:
                    with open(os.path.join(data_dir, name)) as fp:
                        rec = json.load(fp)
                    self._jobs[rec["job_id"]] = rec
                except (OSError, json.JSONDecodeError, KeyError):
                    continue

    def create(self, config: dict) -> dict:
        rec = {
            "job_id": uuid.uuid4().hex,
            "status": "queued",
            "progress": 0.0,
            "config": config,
            "config_hash": config_hash(config),
            "result": None,
            "error": None,
        }
        with self._lock:
            self._jobs[rec["job_id"]] = rec
            self._persist(rec)
        return rec

    def get(self, job_id: str) -> dict | None:
        with self._lock:
            return self._jobs.get(job_id)

    def find_done_by_hash(self, h: str) -> dict | None:
        with self._lock:
            for rec in self._jobs.values():
                if rec["config_hash"] == h and rec["status"] == "done":
                    return rec
        return None

    def update(self, job_id: str, persist: bool = False, **fields) -> None:
        with self._lock:
            rec = self._jobs[job_id]
            if "status" in fields:
                # transitions only move forward
                order = {"queued": 0, "running": 1, "done": 2, "failed": 2}
                if order[fields["status"]] < order[rec["status"]]:
                    raise ValueError("job status cannot move backward")
            if "progress" in fields:
                fields["progress"] = max(fields["progress"], rec.get("progress", 0.0))
            rec.update(fields)
            if persist:
                self._persist(rec)

    def _persist(self, rec: dict) -> None:
        path = os.path.join(self.data_dir, f"{rec['job_id']}.json")
        tmp = path + ".tmp"
        with open(tmp, "w") as fp:
            json.dump(rec, fp)
        os.replace(tmp, path)


def execute_job(store: JobStore, job_id: str, cfg: RunConfig, jobs: int = 1) -> None:
    store.update(job_id, status="running", persist=True)

    def progress(frac: float) -> None:
        store.update(job_id, progress=round(float(frac), 4))

    try:
        rec = obj_opt(
            cfg.k, cfg.prior_spec(), cfg.horizon_max, cfg.epsilons, cfg.test_spec(),
            cfg.alpha, cfg.beta_target, cfg.w, cfg.replications, cfg.grid_points, cfg.seed,
            jobs=jobs, progress=progress,
        )
        w_values = cfg.w_values()
        curve = relative_ecp_curve(rec.feasible_set, w_values)
        result = {
            "recommendation": rec.to_dict(),
            "relative_curves": {
                "w": [float(x) for x in curve["w"]],
                "phis": [float(x) for x in curve["phis"]],
                "relative": [[float(v) for v in row] for row in curve["relative"]],
                "best_phi": [float(x) for x in curve["best_phi"]],
            },
        }
        store.update(job_id, status="done", progress=1.0, result=result, persist=True)
    except InfeasibleDesignError as e:
        store.update(job_id, status="failed", error=str(e), persist=True)
    except Exception as e:  # surfaced to the client rather than killing the worker
        store.update(job_id, status="failed", error=f"{type(e).__name__}: {e}", persist=True)


def ecp_view(result: dict, w: float) -> dict:
    """Closed-form scores at extension cost w from a stored feasible set."""
    feasible = [r for r in result["recommendation"]["feasible_set"] if r["feasible"]]
    per_phi = [
        {"phi": r["phi"], "horizon": r["horizon"], "mean_reward": r["mean_reward"],
         "ecp": r["mean_reward"] - w * math.log(r["horizon"])}
        for r in feasible
    ]
    best = max(per_phi, key=lambda r: (r["ecp"], -r["phi"]))
    top = best["ecp"]
    for r in per_phi:
        r["relative_ecp"] = r["ecp"] - top
    return {
        "w": w,
        "per_phi": per_phi,
        "best_phi": best["phi"],
        "horizon": best["horizon"],
        "mean_reward": best["mean_reward"],
        "ecp": best["ecp"],
    }


def create_app(data_dir: str = "./jobs", max_workers: int = 2, inner_jobs: int = 1) -> FastAPI:
    app = FastAPI(title="banditdesign service")
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"]
    )
    store = JobStore(data_dir)
    pool = ThreadPoolExecutor(max_workers=max_workers)
    app.state.store = store
    app.state.pool = pool

    @app.get("/api/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/api/v1/jobs", status_code=202)
    async def submit(body: dict):
        try:
            cfg = RunConfig.model_validate(body)
        except ValidationError as e:
            errors = [
                {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
                for err in e.errors()
            ]
            return JSONResponse(status_code=400, content={"detail": errors})
        h = config_hash(body)
        cached = store.find_done_by_hash(h)
        if cached is not None:
            return {"job_id": cached["job_id"], "cached": True}
        rec = store.create(body)
        pool.submit(execute_job, store, rec["job_id"], cfg, inner_jobs)
        return {"job_id": rec["job_id"], "cached": False}

    @app.get("/api/v1/jobs/{job_id}")
    def job_status(job_id: str):
        rec = store.get(job_id)
        if rec is None:
            return JSONResponse(status_code=404, content={"detail": "unknown job id"})
        return rec

    @app.get("/api/v1/jobs/{job_id}/ecp")
    def job_ecp(job_id: str, w: float):
        rec = store.get(job_id)
        if rec is None:
            return JSONResponse(status_code=404, content={"detail": "unknown job id"})
        if rec["status"] != "done":
            return JSONResponse(status_code=409, content={"detail": f"job is {rec['status']}, not done"})
        return ecp_view(rec["result"], w)

    return app


def main(argv=None) -> int:
    import argparse

    import uvicorn

    parser = argparse.ArgumentParser(prog="banditdesign-service")
    parser.add_argument("--port", type=int, default=8710)
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--data-dir", default="./jobs")
    parser.add_argument("--workers", type=int, default=2, help="concurrent jobs")
    args = parser.parse_args(argv)
    app = create_app(args.data_dir, max_workers=args.workers)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
