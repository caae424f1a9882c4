"""Generic acceleration baseline: an outer extrapolation loop around
repeated variance-reduced epochs on a kappa-regularized subproblem, with an
adaptive stopping rule checked through a gradient-norm surrogate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from .core import FiniteSumObjective, Trace
from .svrg import SvrgEpochConfig, one_epoch_svrg


def kappa_grid(L: float, n: int) -> List[float]:
    """Regularization weights to sweep: fractions and multiples of L / n."""
    return [a * L / n for a in (0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0)]


def default_tolerance(t: int) -> float:
    # relative accuracy delta_t for the t-th subproblem (t >= 1)
    return 1.0 / ((t + 1) ** 2)


@dataclass
class CatalystConfig:
    kappa: float
    tolerance_schedule: Callable[[int], float] = field(default=default_tolerance)
    max_inner_epochs: int = 50

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError("regularization weight must be positive")
        if self.max_inner_epochs < 1:
            raise ValueError("inner epoch cap must be positive")


def catalyst_c1(obj: FiniteSumObjective, x_init: np.ndarray,
                cfg: CatalystConfig, outer_iters: int,
                rng: np.random.Generator,
                budget: Optional[int] = None,
                reference: Optional[Callable[[np.ndarray], float]] = None):
    """Outer extrapolation with momentum weights solving
    a_{t+1}^2 = (1 - a_{t+1}) a_t^2 and inner subproblems
    min F + kappa/2 ||. - s||^2 run until the stopping criterion
    ||grad||^2 / (2 kappa) <= delta_t * kappa/2 * ||z - s||^2 holds
    (one extra full gradient per check) or the epoch cap trips.

    Returns (point, trace); trace.warning is set if any subproblem hit the
    epoch cap without meeting its criterion.
    """
    kappa = cfg.kappa
    x = np.asarray(x_init, dtype=float).copy()
    y = x.copy()
    a = 1.0
    trace = Trace()
    capped = False
    inner_cfg = SvrgEpochConfig(eta=1.0 / obj.smoothness, iters=2 * obj.n,
                                average_window="last_half")
    for t in range(outer_iters):
        if budget is not None and obj.ledger.component_grads >= budget:
            break
        # a_{t+1} solves a^2 = (1 - a) a_prev^2
        a_prev = a
        a = 0.5 * (-a_prev * a_prev
                   + math.sqrt(a_prev ** 4 + 4.0 * a_prev * a_prev))
        s = y
        delta_t = cfg.tolerance_schedule(t + 1)
        z = x.copy()
        met = False
        for _ in range(cfg.max_inner_epochs):
            z = one_epoch_svrg(obj, kappa, s, z, z, inner_cfg, rng)
            g = obj.grad(z) + kappa * (z - s)
            lhs = float(g @ g) / (2.0 * kappa)
            rhs = delta_t * 0.5 * kappa * float((z - s) @ (z - s))
            if lhs <= rhs:
                met = True
                break
            if budget is not None and obj.ledger.component_grads >= budget:
                break
        if not met:
            capped = capped or budget is None \
                or obj.ledger.component_grads < budget
        x_prev = x
        x = z
        beta = a_prev * (1.0 - a_prev) / (a_prev * a_prev + a)
        y = x + beta * (x - x_prev)
        sub = reference(x) if reference is not None else None
        trace.append(t + 1, obj.ledger.component_grads, sub)
    if capped:
        trace.warning = "inner epoch cap reached before stopping criterion"
    return x, trace
