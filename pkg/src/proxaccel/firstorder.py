"""Deterministic first-order solvers for smooth strongly convex problems:
plain gradient descent, a fixed-budget accelerated method with constant
momentum, and the short gradient preset used on prox subproblems."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import Domain, QueryLedger, Unconstrained


@dataclass
class SmoothStronglyConvexProblem:
    """A gradient oracle with known smoothness and strong convexity."""

    grad: Callable[[np.ndarray], np.ndarray]
    smoothness: float
    strong_convexity: float
    domain: Domain = Unconstrained()
    ledger: Optional[QueryLedger] = None
    value: Optional[Callable[[np.ndarray], float]] = None

    def __post_init__(self):
        if not self.smoothness > 0:
            raise ValueError("smoothness must be positive")
        if not 0 <= self.strong_convexity <= self.smoothness:
            raise ValueError("strong convexity must lie in [0, smoothness]")

    def gradient(self, x: np.ndarray) -> np.ndarray:
        if self.ledger is not None:
            self.ledger.add_full_grad(0)
        return np.asarray(self.grad(x), dtype=float)


def gradient_descent(p: SmoothStronglyConvexProblem, x0: np.ndarray,
                     steps: int, step_size: Optional[float] = None) -> np.ndarray:
    """Fixed-step projected gradient descent."""
    if steps < 0:
        raise ValueError("step count must be nonnegative")
    eta = 1.0 / p.smoothness if step_size is None else float(step_size)
    x = np.asarray(x0, dtype=float)
    for _ in range(steps):
        x = p.domain.project(x - eta * p.gradient(x))
    return x


def prox_gradient_preset(grad: Callable, lam: float, x0: np.ndarray,
                         domain: Domain = Unconstrained(),
                         ledger: Optional[QueryLedger] = None,
                         steps: int = 4) -> np.ndarray:
    """Short gradient run on a lam-strongly-convex, 2*lam-smooth prox
    objective with step 1/(2*lam); each step halves the squared distance to
    the subproblem optimum, so four steps shrink it by a factor of 16."""
    p = SmoothStronglyConvexProblem(grad=grad, smoothness=2.0 * lam,
                                    strong_convexity=lam, domain=domain,
                                    ledger=ledger)
    return gradient_descent(p, x0, steps)


def agd_iterations(smoothness: float, strong_convexity: float,
                   gap0: float, target: float) -> int:
    """Deterministic iteration budget sufficient for the momentum method to
    close a gap0 initial suboptimality down to target."""
    if not strong_convexity > 0:
        raise ValueError("strong convexity must be positive")
    if not target > 0:
        raise ValueError("target accuracy must be positive")
    if gap0 <= target:
        return 0
    kappa = smoothness / strong_convexity
    return int(math.ceil(math.sqrt(kappa) * math.log(gap0 / target))) + 1


def agd(p: SmoothStronglyConvexProblem, x0: np.ndarray, target: float,
        gap_bound: float, maximize: bool = False) -> np.ndarray:
    """Accelerated gradient descent with constant momentum
    (sqrt(L) - sqrt(mu)) / (sqrt(L) + sqrt(mu)) and step 1/L, run for a
    precomputed number of iterations so the final suboptimality is below
    ``target`` whenever the initial gap is at most ``gap_bound``.

    ``maximize`` flips the oracle's ascent direction for concave problems.
    """
    T = agd_iterations(p.smoothness, p.strong_convexity, gap_bound, target)
    sqL = math.sqrt(p.smoothness)
    sqm = math.sqrt(p.strong_convexity)
    beta = (sqL - sqm) / (sqL + sqm)
    eta = 1.0 / p.smoothness
    sign = -1.0 if maximize else 1.0
    x = np.asarray(x0, dtype=float)
    y = x.copy()
    for _ in range(T):
        x_next = p.domain.project(y - sign * eta * p.gradient(y))
        y = x_next + beta * (x_next - x)
        x = x_next
    return x
