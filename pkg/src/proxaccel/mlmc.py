"""Multilevel Monte Carlo debiasing of approximate proximal points.

A chain of approximate prox solves is truncated at a geometric level J and
reweighted so the estimator's expectation equals the exact proximal point,
at constant expected cost."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np


def sample_geometric(rng: np.random.Generator, success_prob: float) -> int:
    """Number of failures before the first success, support {0, 1, ...}.

    Inverse-CDF on a single uniform draw; constant time for any outcome.
    """
    if not 0.0 < success_prob <= 1.0:
        raise ValueError("success probability must be in (0, 1]")
    if success_prob == 1.0:
        return 0
    u = rng.random()
    # P[G >= k] = (1-p)^k, so G = floor(log(u) / log(1-p))
    return int(math.floor(math.log(u) / math.log(1.0 - success_prob)))


@dataclass(frozen=True)
class MlmcConfig:
    """p is the chain continuation probability, j0 the burn-in level."""

    p: float = 0.5
    j0: int = 2

    def __post_init__(self):
        if not 0.0 <= self.p < 1.0:
            raise ValueError("continuation probability must be in [0, 1)")
        if self.j0 < 0:
            raise ValueError("burn-in level must be nonnegative")

    def expected_inner_calls(self) -> float:
        # 1 + E[J] = 1 + j0 + p / (1 - p)
        return 1.0 + self.j0 + self.p / (1.0 - self.p)


@dataclass
class MlmcEstimate:
    estimate: np.ndarray
    last_iterate: np.ndarray
    inner_calls: int
    level: int


def unbiased_prox_mlmc(approx_prox: Callable, s: np.ndarray, x_prev: np.ndarray,
                       cfg: MlmcConfig, rng: np.random.Generator) -> MlmcEstimate:
    """Debiased proximal-point estimate from a chain of approximate solves.

    ``approx_prox(s, x_init, x_prev, rng)`` returns one approximate proximal
    point of quality improving with a warmer ``x_init``.  The chain is
    x0 = approx_prox(s, s, x_prev) and x_{j+1} = approx_prox(s, x_j, x_j);
    its length J = j0 + Geometric(p) draws the truncation level, and the tail
    correction is reweighted by the inverse tail probability.  Exactly 1 + J
    inner solves are performed.
    """
    x = np.asarray(approx_prox(s, s, x_prev, rng), dtype=float)
    j_extra = sample_geometric(rng, 1.0 - cfg.p) if cfg.p > 0.0 else 0
    J = cfg.j0 + j_extra
    chain_prev = None
    chain_at_j0 = x
    for j in range(J):
        nxt = np.asarray(approx_prox(s, x, x, rng), dtype=float)
        chain_prev = x
        x = nxt
        if j + 1 == cfg.j0:
            chain_at_j0 = x
    if J == cfg.j0:
        # Truncated at the burn-in level: the correction term is exactly zero.
        estimate = chain_at_j0.copy()
    else:
        p_J = (1.0 - cfg.p) * cfg.p ** j_extra
        estimate = chain_at_j0 + (x - chain_prev) / p_J
    return MlmcEstimate(estimate=estimate, last_iterate=x,
                        inner_calls=1 + J, level=J)


def mlmc_delta(approx_prox_delta: Callable, s: np.ndarray, x_prev: np.ndarray,
               delta: float, rng: np.random.Generator) -> MlmcEstimate:
    """Debiased prox estimate from a tolerance-controlled inner solver.

    ``approx_prox_delta(s, x_init, tol, rng)`` returns a point whose expected
    squared distance to the proximal point is at most ``tol``.  Levels halve
    the weight and quarter the tolerance: J takes value j >= 2 with
    probability 2^{-(j-1)}, level j runs at tolerance (delta/8) / 4^{j-1},
    and the two deepest iterates are reweighted by 2^J.
    """
    if not delta > 0:
        raise ValueError("tolerance must be positive")
    J = 2 + sample_geometric(rng, 0.5)
    tol = delta / 8.0
    x = np.asarray(approx_prox_delta(s, x_prev, tol, rng), dtype=float)
    prev = None
    first = x
    for _ in range(J - 1):
        tol /= 4.0
        nxt = np.asarray(approx_prox_delta(s, x, tol, rng), dtype=float)
        prev = x
        x = nxt
    estimate = first + (2.0 ** J) * (x - prev)
    return MlmcEstimate(estimate=estimate, last_iterate=x,
                        inner_calls=J, level=J)
