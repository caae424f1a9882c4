"""Self-check suites runnable from the command line: each check prints one
pass/fail line and the suite result is the conjunction."""

from __future__ import annotations

import math
from typing import Callable, List, Tuple

import numpy as np

from .accel import (EXACT_MLMC, AccelConfig, alpha_next, alpha_sequence,
                    exact_prox_bundle, run_accelerated)
from .core import bregman_euclidean, exact_prox_quadratic
from .mlmc import MlmcConfig, unbiased_prox_mlmc
from .minimax import mirror_prox
from .problems import (QuadraticFiniteSum, bilinear_box_instance, bilinear_gap,
                       synth_finite_sum_quadratic)
from .svrg import approx_prox_svrg

Check = Tuple[str, bool]


def _quadratic_instance(seed: int = 0, n: int = 20, d: int = 6):
    return synth_finite_sum_quadratic(n, d, condition_number=50.0, seed=seed)


def suite_alpha() -> List[Check]:
    T = 10_000
    seq = alpha_sequence(T)
    residual = 0.0
    for t in range(T):
        a, b = seq[t], seq[t + 1]
        # multiplied-through form of 1/b^2 - 1/b = 1/a^2; well conditioned
        residual = max(residual, abs(a * a - b * b - b * a * a))
    # Known-failing bound kept for honesty: empirically alpha_t (t+3) dips
    # to 1.975 and tends to 2, below 4/sqrt(3) ~ 2.309, so this constant
    # cannot be correct; the classical sqrt(2)/(t+2) bound does hold.
    lower_stated = all(seq[t] >= (4.0 / math.sqrt(3.0)) / (t + 3) - 1e-15
                       for t in range(1, T + 1))
    lower_classical = all(seq[t] >= math.sqrt(2.0) / (t + 2) - 1e-15
                          for t in range(T + 1))
    upper = all(seq[t] <= 2.0 / (t + 2) + 1e-15 for t in range(T + 1))
    return [("alpha recursion residual <= 1e-12", residual <= 1e-12),
            ("alpha lower bound (4/sqrt(3))/(t+3) (known false)",
             lower_stated),
            ("alpha lower bound sqrt(2)/(t+2)", lower_classical),
            ("alpha upper bound 2/(t+2)", upper)]


def suite_mlmc(N: int = 10_000) -> List[Check]:
    obj = _quadratic_instance()
    d = obj.c.shape[1]
    rng = np.random.default_rng(7)
    lam = obj.smoothness
    s = rng.standard_normal(d)
    x_prev = rng.standard_normal(d)
    x_star = obj.exact_prox(lam, s)
    cfg = MlmcConfig(p=0.5, j0=2)

    def contracting(s_, xi, xp, rng_):
        # deterministic halving of the distance to the prox point
        return x_star + 0.5 * (np.asarray(xi, float) - x_star)

    samples = np.empty((N, d))
    calls = np.empty(N)
    for k in range(N):
        est = unbiased_prox_mlmc(contracting, s, x_prev, cfg, rng)
        samples[k] = est.estimate
        calls[k] = est.inner_calls
    mean = samples.mean(axis=0)
    se = samples.std(axis=0, ddof=1) / math.sqrt(N)
    z = np.abs(mean - x_star) / np.maximum(se, 1e-300)
    p_vals = np.array([math.erfc(zi / math.sqrt(2.0)) for zi in z])
    return [("mlmc unbiased (z-test, alpha=1e-3, exact-contraction solver)",
             bool(np.all(p_vals > 1e-3))),
            ("mlmc expected inner calls 4 +/- 0.1",
             abs(calls.mean() - 4.0) <= 0.1)]


def suite_svrg(seeds: int = 30) -> List[Check]:
    obj = _quadratic_instance(n=50, d=8)
    d = obj.c.shape[1]
    lam = obj.smoothness
    rng = np.random.default_rng(3)
    s = rng.standard_normal(d)
    x_init = rng.standard_normal(d)
    x_prev = rng.standard_normal(d)
    x_star = obj.exact_prox(lam, s)

    def prox_val(x):
        return obj.value(x) + 0.5 * lam * float((x - s) @ (x - s))

    gaps = []
    for k in range(seeds):
        out = approx_prox_svrg(obj, lam, s, x_init, x_prev,
                               np.random.default_rng(100 + k))
        gaps.append(prox_val(out) - prox_val(x_star))
    mean = float(np.mean(gaps))
    se = float(np.std(gaps, ddof=1)) / math.sqrt(seeds)
    bound = (lam * bregman_euclidean(x_init, x_star)
             + _bregman_f(obj, x_prev, x_star)) / 8.0
    return [("variance-reduced prox solve meets the one-eighth criterion",
             mean <= bound + 3.0 * se)]


def _bregman_f(obj: QuadraticFiniteSum, frm, to):
    g = obj.grad_raw(frm)
    return obj.value(to) - obj.value(frm) - float(g @ (to - frm))


def suite_minimax() -> List[Check]:
    # The averaged iterate satisfies a per-comparator regret bound; the
    # worst-case duality gap therefore obeys the bound with the divergences
    # taken at the worst comparators, not at the saddle point.
    checks = []
    for T in (10, 100, 1000):
        obj = bilinear_box_instance()
        x0 = np.array([1.0])
        y0 = np.array([1.0])
        res = mirror_prox(obj, x0, y0, T)
        saddle_lhs = obj.value(res.x, np.zeros(1)) \
            - obj.value(np.zeros(1), res.y)
        saddle_bound = (obj.smoothness / T) * (
            bregman_euclidean(x0, np.zeros(1))
            + bregman_euclidean(y0, np.zeros(1)))
        # sup over u, v in [-1, 1] of each half squared distance is 2
        sup_bound = (obj.smoothness / T) * 4.0
        gap = bilinear_gap(res.x, res.y)
        checks.append((f"saddle-comparator regret bound at T={T}",
                       saddle_lhs <= saddle_bound + 1e-6))
        checks.append((f"worst-case duality gap bound at T={T}",
                       gap <= sup_bound + 1e-6))
    return checks


def suite_potential() -> List[Check]:
    rng = np.random.default_rng(11)
    d = 10
    M = rng.standard_normal((d, d))
    A = M @ M.T / d + 0.2 * np.eye(d)
    b = rng.standard_normal(d)
    x_star = np.linalg.solve(A, -b)

    def value(x):
        return 0.5 * float(x @ A @ x) + float(b @ x)

    f_star = value(x_star)
    lam = float(np.linalg.eigvalsh(A)[-1])
    x0 = rng.standard_normal(d)

    states = []
    bundle = exact_prox_bundle(lambda s: exact_prox_quadratic(A, b, lam, s),
                               x0, value=value)
    cfg = AccelConfig(lam=lam, outer_iters=100, mlmc=EXACT_MLMC)
    run_accelerated(bundle, cfg, np.random.default_rng(0),
                    state_hook=lambda t, x, v, a: states.append(
                        (a, value(x) - f_star,
                         bregman_euclidean(v, x_star))))
    pots = [gap / (a * a) + lam * vdist for a, gap, vdist in states]
    mono = all(pots[t + 1] <= pots[t] * (1.0 + 1e-9) + 1e-15
               for t in range(len(pots) - 1))
    return [("outer-loop potential non-increasing over 100 iterations", mono)]


SUITES = {
    "alpha": suite_alpha,
    "mlmc": suite_mlmc,
    "svrg": suite_svrg,
    "minimax": suite_minimax,
    "potential": suite_potential,
}


def run_suite(name: str, echo: Callable[[str], None] = print) -> bool:
    names = list(SUITES) if name == "all" else [name]
    ok = True
    for nm in names:
        for label, passed in SUITES[nm]():
            echo(f"[{'PASS' if passed else 'FAIL'}] {nm}: {label}")
            ok = ok and passed
    return ok
