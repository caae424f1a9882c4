"""Seeded benchmark runs from a JSON configuration: problem construction,
reference-optimum computation with on-disk caching, per-seed trace emission,
and a summary with checkpointed suboptimality statistics.

Configuration schema (JSON object):

  problem: object with ``kind`` in
      {"synthetic_logistic", "synthetic_quadratic", "synthetic_saddle",
       "libsvm"}
    synthetic_logistic: n, d, data_seed
    synthetic_quadratic: n, d, condition_number, data_seed
    synthetic_saddle: dx, dy, mu, data_seed
    libsvm: path, subsample (optional line limit), normalize (bool)
  solver: object with ``name`` in
      {"recapp-svrg", "recapp-minimax", "svrg", "catalyst", "agd"}
    recapp-svrg: lam, outer_iters, p, j0, reuse_mlmc_iterate
    recapp-minimax: outer_iters, restarts, additive (bool), radius_bound
    svrg: epochs
    catalyst: kappa, outer_iters, max_inner_epochs
    agd: steps
  seeds: non-empty list of integers
  budget: positive int, max component (or saddle) gradient queries
  output: directory path (the --out flag overrides it)
  deterministic_timing: bool, default true; when true every trace row
    records 0.0 ms so reruns are byte-identical

The reference optimum uses the instance's closed form when available and is
otherwise computed once by the strongest solver at ten times the budget,
cached under $PROXACCEL_CACHE_DIR keyed by a problem content hash.
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .accel import (AccelConfig, ProxBundle, finite_sum_bundle,
                    practical_epoch_config, run_accelerated)
from .catalyst import CatalystConfig, catalyst_c1
from .core import QueryLedger, Trace
from .firstorder import SmoothStronglyConvexProblem, gradient_descent
from .minimax import approx_prox_minimax, warm_start_mirror_prox
from .mlmc import MlmcConfig
from .problems import (LogisticFiniteSum, QuadraticFiniteSum, SaddleQuadratic,
                       examples_to_dense, load_libsvm_file,
                       normalize_unit_norm, synth_finite_sum_quadratic,
                       synth_logistic, synth_saddle_quadratic)
from .svrg import plain_svrg

CACHE_ENV = "PROXACCEL_CACHE_DIR"


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    problem: dict
    solver: dict
    seeds: list
    budget: int
    output: Optional[str] = None
    deterministic_timing: bool = True

    @classmethod
    def from_dict(cls, raw: dict) -> "ExperimentConfig":
        try:
            cfg = cls(problem=dict(raw["problem"]), solver=dict(raw["solver"]),
                      seeds=list(raw["seeds"]), budget=int(raw["budget"]),
                      output=raw.get("output"),
                      deterministic_timing=bool(
                          raw.get("deterministic_timing", True)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(raw)

    def validate(self) -> None:
        if not self.seeds:
            raise ConfigError("at least one seed is required")
        if self.budget <= 0:
            raise ConfigError("budget must be positive")
        kind = self.problem.get("kind")
        name = self.solver.get("name")
        known_problems = {"synthetic_logistic", "synthetic_quadratic",
                          "synthetic_saddle", "libsvm"}
        known_solvers = {"recapp-svrg", "recapp-minimax", "svrg",
                         "catalyst", "agd"}
        if kind not in known_problems:
            raise ConfigError(f"unknown problem kind {kind!r}")
        if name not in known_solvers:
            raise ConfigError(f"unknown solver {name!r}")
        saddle = kind == "synthetic_saddle"
        if name == "recapp-minimax" and not saddle:
            raise ConfigError("recapp-minimax requires a saddle instance")
        if name != "recapp-minimax" and saddle:
            raise ConfigError(f"solver {name!r} needs a finite-sum instance")

    def to_dict(self) -> dict:
        return {"problem": self.problem, "solver": self.solver,
                "seeds": self.seeds, "budget": self.budget,
                "output": self.output,
                "deterministic_timing": self.deterministic_timing}


# ---------------------------------------------------------------------------
# Problem construction


def build_problem(p: dict, subsample: Optional[int] = None):
    kind = p["kind"]
    if kind == "synthetic_quadratic":
        return synth_finite_sum_quadratic(int(p["n"]), int(p["d"]),
                                          float(p.get("condition_number", 100.0)),
                                          int(p.get("data_seed", 0)))
    if kind == "synthetic_logistic":
        return synth_logistic(int(p["n"]), int(p["d"]),
                              int(p.get("data_seed", 0)))
    if kind == "synthetic_saddle":
        return synth_saddle_quadratic(int(p["dx"]), int(p["dy"]),
                                      float(p["mu"]),
                                      int(p.get("data_seed", 0)))
    if kind == "libsvm":
        examples = load_libsvm_file(p["path"])
        m = subsample if subsample is not None else p.get("subsample")
        if m is not None:
            examples = examples[: int(m)]
        A, b = examples_to_dense(examples)
        if p.get("normalize", True):
            A, b, _ = normalize_unit_norm(A, b)
        return LogisticFiniteSum(A, b)
    raise ConfigError(f"unknown problem kind {kind!r}")


def problem_hash(p: dict, subsample: Optional[int]) -> str:
    blob = json.dumps({**p, "subsample": subsample}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def reference_optimum(cfg: ExperimentConfig, problem,
                      subsample: Optional[int]) -> float:
    """Best-known objective value for suboptimality traces."""
    if isinstance(problem, (QuadraticFiniteSum, SaddleQuadratic)):
        return problem.f_star()
    cache_dir = os.environ.get(CACHE_ENV)
    key = problem_hash(cfg.problem, subsample)
    if cache_dir:
        path = Path(cache_dir) / f"fstar_{key}.json"
        if path.exists():
            with open(path, "r", encoding="utf-8") as fh:
                return float(json.load(fh)["f_star"])
    x = _reference_solve(problem, 10 * cfg.budget)
    f_star = problem.value(x)
    if cache_dir:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        with open(Path(cache_dir) / f"fstar_{key}.json", "w",
                  encoding="utf-8") as fh:
            json.dump({"f_star": f_star}, fh)
    return f_star


def _reference_solve(obj, budget: int) -> np.ndarray:
    saved = obj.ledger
    obj.ledger = QueryLedger()
    try:
        d = obj.A.shape[1] if hasattr(obj, "A") else obj.c.shape[1]
        x0 = np.zeros(d)
        rng = np.random.default_rng(0)
        lam = obj.smoothness / obj.n
        bundle = finite_sum_bundle(obj, lam, x0,
                                   epoch_cfg=practical_epoch_config(obj))
        cfg = AccelConfig(lam=lam, outer_iters=10 ** 9,
                          mlmc=MlmcConfig(p=0.0, j0=0),
                          reuse_mlmc_iterate=True)
        x, _ = run_accelerated(bundle, cfg, rng, budget=budget)
        return x
    finally:
        obj.ledger = saved


# ---------------------------------------------------------------------------
# Solver dispatch


def run_solver(cfg: ExperimentConfig, problem, seed: int,
               reference: float) -> tuple[np.ndarray, Trace, QueryLedger]:
    name = cfg.solver["name"]
    sp = cfg.solver
    rng = np.random.default_rng(seed)
    if name == "recapp-minimax":
        return _run_recapp_minimax(cfg, problem, rng, reference)
    obj = problem
    obj.ledger = QueryLedger()
    d = obj.A.shape[1] if hasattr(obj, "A") else obj.c.shape[1]
    x0 = np.zeros(d)

    def sub(x):
        return obj.value(x) - reference

    if name == "recapp-svrg":
        lam = float(sp.get("lam", obj.smoothness / obj.n))
        p_cont = float(sp.get("p", 0.0))
        reuse = bool(sp.get("reuse_mlmc_iterate", True))
        epoch = practical_epoch_config(obj, p_cont if reuse else 0.0)
        bundle = finite_sum_bundle(obj, lam, x0, epoch_cfg=epoch)
        acfg = AccelConfig(
            lam=lam, outer_iters=int(sp.get("outer_iters", 10 ** 9)),
            mlmc=MlmcConfig(p=p_cont, j0=int(sp.get("j0", 0))),
            reuse_mlmc_iterate=reuse)
        x, trace = run_accelerated(bundle, acfg, rng, reference=sub,
                                   budget=cfg.budget)
        return x, trace, obj.ledger
    if name == "svrg":
        trace = Trace()
        hook = (lambda k, x: trace.append(k, obj.ledger.component_grads,
                                          sub(x)))
        x = plain_svrg(obj, x0, int(sp.get("epochs", 10 ** 9)), rng,
                       trace_hook=hook, budget=cfg.budget)
        return x, trace, obj.ledger
    if name == "catalyst":
        ccfg = CatalystConfig(
            kappa=float(sp["kappa"]),
            max_inner_epochs=int(sp.get("max_inner_epochs", 50)))
        x, trace = catalyst_c1(obj, x0, ccfg,
                               int(sp.get("outer_iters", 10 ** 9)), rng,
                               budget=cfg.budget, reference=sub)
        return x, trace, obj.ledger
    if name == "agd":
        mu = getattr(obj, "strong_convexity", 0.0)
        if not mu > 0:
            raise ConfigError("agd needs a strongly convex instance")
        p = SmoothStronglyConvexProblem(grad=obj.grad, smoothness=obj.smoothness,
                                        strong_convexity=mu, domain=obj.domain)
        sqL, sqm = math.sqrt(obj.smoothness), math.sqrt(mu)
        beta = (sqL - sqm) / (sqL + sqm)
        trace = Trace()
        x = x0.copy()
        y = x.copy()
        k = 0
        while obj.ledger.component_grads < cfg.budget:
            k += 1
            x_next = obj.domain.project(y - obj.grad(y) / obj.smoothness)
            y = x_next + beta * (x_next - x)
            x = x_next
            trace.append(k, obj.ledger.component_grads, sub(x))
        return x, trace, obj.ledger
    raise ConfigError(f"unknown solver {name!r}")


def _run_recapp_minimax(cfg: ExperimentConfig, saddle: SaddleQuadratic,
                        rng: np.random.Generator, reference: float):
    sp = cfg.solver
    obj = saddle.objective()
    mu = obj.strong_concavity
    dx = saddle.P.shape[0]
    dy = saddle.Q.shape[0]
    x0 = np.zeros(dx)
    y0 = np.zeros(dy)
    radius = float(sp.get("radius_bound",
                          float(np.dot(x0 - saddle.x_star(),
                                       x0 - saddle.x_star())) + 1.0))
    state = {"y": y0}

    def ap(s, xi, xp, rng_):
        x, y = approx_prox_minimax(obj, s, xi, xp, state["y"], radius)
        state["y"] = y
        return x

    def ap_delta(s, xi, tol, rng_):
        # each averaged extragradient epoch contracts the prox suboptimality
        # geometrically; repeat until the schedule's tolerance is covered
        scale = obj.smoothness * radius
        epochs = max(1, int(math.ceil(math.log2(max(scale / max(tol, 1e-300),
                                                    2.0)) / 3.0)))
        x = xi
        for _ in range(epochs):
            x, y = approx_prox_minimax(obj, s, x, x, state["y"], radius)
            state["y"] = y
        return x

    def ws(rng_):
        x, y = warm_start_mirror_prox(obj, x0, y0, radius)
        state["y"] = y
        return x

    def sub(x):
        return saddle.max_value(x) - reference

    bundle = ProxBundle(approx_prox=ap, warm_start=ws, domain=obj.domain_x,
                        queries=lambda: obj.ledger.saddle_grads,
                        approx_prox_delta=ap_delta,
                        value=saddle.max_value)
    acfg = AccelConfig(
        lam=mu, outer_iters=int(sp.get("outer_iters", 10 ** 9)),
        restarts=int(sp.get("restarts", 0)),
        strong_convexity=float(sp.get("strong_convexity",
                                      saddle.objective().strong_convexity_x
                                      or mu)),
        additive_error=bool(sp.get("additive", False)),
        radius_bound=radius,
        mlmc=MlmcConfig(p=float(sp.get("p", 0.5)), j0=int(sp.get("j0", 0))))
    x, trace = run_accelerated(bundle, acfg, rng, reference=sub,
                               budget=cfg.budget)
    return x, trace, obj.ledger


# ---------------------------------------------------------------------------
# Orchestration and output files


def checkpoints(budget: int) -> list[int]:
    out = []
    q = 1
    while q <= budget:
        out.append(q)
        q *= 2
    return out


def _value_at_checkpoint(trace: Trace, q: int) -> Optional[float]:
    best = None
    for row in trace.rows:
        if row.queries <= q and row.suboptimality is not None:
            best = row.suboptimality
    return best


def run_experiment(cfg: ExperimentConfig, out_dir,
                   subsample: Optional[int] = None,
                   seed_offset: int = 0) -> dict:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    problem = build_problem(cfg.problem, subsample)
    reference = reference_optimum(cfg, problem, subsample)
    seeds = [int(s) + seed_offset for s in cfg.seeds]
    traces = {}
    ledgers = {}
    t0 = time.perf_counter()
    for seed in seeds:
        x, trace, ledger = run_solver(cfg, problem, seed, reference)
        if not cfg.deterministic_timing:
            for row in trace.rows:
                row.elapsed = time.perf_counter() - t0
        trace.write_csv(out / f"trace_seed{seed}.csv")
        traces[seed] = trace
        ledgers[seed] = ledger
    cps = checkpoints(cfg.budget)
    stats = []
    for q in cps:
        vals = [v for v in (_value_at_checkpoint(traces[s], q) for s in seeds)
                if v is not None]
        if not vals:
            continue
        qs = np.percentile(vals, [25, 50, 75])
        stats.append({"grad_queries": q, "median": float(qs[1]),
                      "q25": float(qs[0]), "q75": float(qs[2])})
    summary = {
        "config": cfg.to_dict(),
        "seeds": seeds,
        "reference_value": reference,
        "checkpoints": stats,
        "ledgers": {str(s): ledgers[s].totals() for s in seeds},
        "warnings": {str(s): traces[s].warning for s in seeds
                     if traces[s].warning},
    }
    if not cfg.deterministic_timing:
        summary["wall_time_s"] = time.perf_counter() - t0
    with open(out / "summary.json", "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary


def run_sweep(raw: dict, out_dir, subsample: Optional[int] = None,
              seed_offset: int = 0) -> list[dict]:
    """Run one experiment per grid point and rank them in sweep.csv.

    The config carries a ``grid`` object mapping one solver key to a list of
    values (for example ``{"lam": [...]}``); everything else is as in run.
    """
    grid = raw.get("grid")
    if not grid or not isinstance(grid, dict) or len(grid) != 1:
        raise ConfigError("sweep needs a grid with exactly one swept key")
    key, values = next(iter(grid.items()))
    if not values:
        raise ConfigError("sweep grid must be non-empty")
    base = {k: v for k, v in raw.items() if k != "grid"}
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, val in enumerate(values):
        point = json.loads(json.dumps(base))
        point["solver"][key] = val
        cfg = ExperimentConfig.from_dict(point)
        summary = run_experiment(cfg, out / f"grid_{i}", subsample,
                                 seed_offset)
        final = summary["checkpoints"][-1]["median"] \
            if summary["checkpoints"] else math.inf
        rows.append({"index": i, key: val, "median_suboptimality": final})
    rows.sort(key=lambda r: r["median_suboptimality"])
    with open(out / "sweep.csv", "w", encoding="utf-8") as fh:
        fh.write(f"rank,index,{key},median_suboptimality\n")
        for rank, r in enumerate(rows):
            fh.write(f"{rank},{r['index']},{r[key]},"
                     f"{repr(r['median_suboptimality'])}\n")
    return rows
