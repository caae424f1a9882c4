"""Domain types shared by every solver: constraint sets with exact projection,
Bregman divergences, the prox-regularized objective, and query accounting."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

Vector = np.ndarray


class DimensionMismatch(ValueError):
    pass


def _as_vector(x) -> Vector:
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        v = v.reshape(-1)
    return v


def check_finite(x: Vector, what: str = "vector") -> Vector:
    if not np.all(np.isfinite(x)):
        raise ValueError(f"non-finite entries in {what}")
    return x


def _check_same_dim(x: Vector, y: Vector) -> None:
    if x.shape != y.shape:
        raise DimensionMismatch(f"dimension mismatch: {x.shape} vs {y.shape}")


# ---------------------------------------------------------------------------
# Constraint sets


class Domain:
    """A closed convex set with exact Euclidean projection."""

    diameter: float

    def project(self, x: Vector) -> Vector:
        raise NotImplementedError

    def contains(self, x: Vector, tol: float = 1e-9) -> bool:
        return bool(np.linalg.norm(self.project(x) - x) <= tol * (1.0 + np.linalg.norm(x)))


@dataclass(frozen=True)
class Unconstrained(Domain):
    diameter: float = math.inf

    def project(self, x: Vector) -> Vector:
        return np.asarray(x, dtype=float)


@dataclass(frozen=True)
class EuclideanBall(Domain):
    center: Vector
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _as_vector(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def diameter(self) -> float:
        return 2.0 * self.radius

    def project(self, x: Vector) -> Vector:
        x = np.asarray(x, dtype=float)
        _check_same_dim(x, self.center)
        d = x - self.center
        nrm = np.linalg.norm(d)
        if nrm <= self.radius:
            return x
        return self.center + d * (self.radius / nrm)


@dataclass(frozen=True)
class Box(Domain):
    lower: Vector
    upper: Vector

    def __post_init__(self):
        object.__setattr__(self, "lower", _as_vector(self.lower))
        object.__setattr__(self, "upper", _as_vector(self.upper))
        _check_same_dim(self.lower, self.upper)
        if np.any(self.lower > self.upper):
            raise ValueError("box lower bound exceeds upper bound")

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def project(self, x: Vector) -> Vector:
        x = np.asarray(x, dtype=float)
        _check_same_dim(x, self.lower)
        return np.clip(x, self.lower, self.upper)


def project(domain: Domain, x: Vector) -> Vector:
    return domain.project(x)


# ---------------------------------------------------------------------------
# Divergences


def bregman_euclidean(x: Vector, y: Vector) -> float:
    """Half squared Euclidean distance between x and y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same_dim(x, y)
    d = x - y
    return 0.5 * float(d @ d)


def bregman_f(value: Callable[[Vector], float], grad: Callable[[Vector], Vector],
              from_: Vector, to: Vector) -> float:
    """Divergence induced by a convex function: F(to) - F(from) - <grad F(from), to - from>."""
    from_ = np.asarray(from_, dtype=float)
    to = np.asarray(to, dtype=float)
    _check_same_dim(from_, to)
    g = np.asarray(grad(from_), dtype=float)
    _check_same_dim(g, to)
    return float(value(to)) - float(value(from_)) - float(g @ (to - from_))


# ---------------------------------------------------------------------------
# Query accounting


@dataclass
class QueryLedger:
    """Monotone counters of oracle usage; the unit of cost for all benchmarks."""

    component_grads: int = 0
    full_grads: int = 0
    saddle_grads: int = 0
    best_response_calls: int = 0
    prox_oracle_calls: int = 0

    def add_component_grads(self, k: int = 1) -> None:
        self.component_grads += int(k)

    def add_full_grad(self, n_components: int = 0) -> None:
        self.full_grads += 1
        self.component_grads += int(n_components)

    def add_saddle_grads(self, k: int = 1) -> None:
        self.saddle_grads += int(k)

    def add_best_response_call(self) -> None:
        self.best_response_calls += 1

    def add_prox_oracle_call(self) -> None:
        self.prox_oracle_calls += 1

    def totals(self) -> dict:
        return dataclasses.asdict(self)

    def copy(self) -> "QueryLedger":
        return QueryLedger(**self.totals())


# ---------------------------------------------------------------------------
# Objectives


class FiniteSumObjective:
    """Average of n smooth convex components with per-index gradient oracles.

    ``component_value``/``component_gradient`` are raw (uncounted) oracles;
    the counted access paths are :meth:`grad_i` and :meth:`grad`.  Function
    values never touch the ledger so that tracing stays query-neutral.
    """

    def __init__(self, n: int, component_value, component_gradient,
                 smoothness: float, domain: Domain = Unconstrained(),
                 strong_convexity: float = 0.0,
                 ledger: Optional[QueryLedger] = None):
        if n < 1:
            raise ValueError("n must be positive")
        if not smoothness > 0:
            raise ValueError("smoothness must be positive")
        self.n = int(n)
        self.component_value = component_value
        self.component_gradient = component_gradient
        self.smoothness = float(smoothness)
        self.strong_convexity = float(strong_convexity)
        self.domain = domain
        self.ledger = ledger if ledger is not None else QueryLedger()

    def _check_index(self, i: int) -> None:
        if not 0 <= i < self.n:
            raise IndexError(f"component index {i} out of range [0, {self.n})")

    def grad_i(self, i: int, x: Vector) -> Vector:
        self._check_index(i)
        self.ledger.add_component_grads(1)
        return np.asarray(self.component_gradient(i, x), dtype=float)

    def value(self, x: Vector) -> float:
        return sum(float(self.component_value(i, x)) for i in range(self.n)) / self.n

    def grad_raw(self, x: Vector) -> Vector:
        g = np.asarray(self.component_gradient(0, x), dtype=float).copy()
        for i in range(1, self.n):
            g += np.asarray(self.component_gradient(i, x), dtype=float)
        return g / self.n

    def grad(self, x: Vector) -> Vector:
        """Full gradient; one full-gradient event, n component-gradient events."""
        self.ledger.add_full_grad(self.n)
        return self.grad_raw(x)

    def component_grads_at(self, x: Vector) -> np.ndarray:
        """Stack of all component gradients at x (raw, uncounted)."""
        return np.stack([np.asarray(self.component_gradient(i, x), dtype=float)
                         for i in range(self.n)])


class MaxStructuredObjective:
    """Smooth convex-concave f(x, y), strongly concave in y, with F(x) = max_y f(x, y)."""

    def __init__(self, value, grad_x, grad_y, smoothness: float,
                 strong_concavity: float,
                 domain_x: Domain = Unconstrained(),
                 domain_y: Domain = Unconstrained(),
                 ledger: Optional[QueryLedger] = None,
                 argmax_y_oracle=None, argmin_x_oracle=None,
                 strong_convexity_x: float = 0.0):
        if not smoothness > 0:
            raise ValueError("smoothness must be positive")
        if strong_concavity < 0:
            raise ValueError("strong concavity must be nonnegative")
        self.value = value
        self._grad_x = grad_x
        self._grad_y = grad_y
        self.smoothness = float(smoothness)
        self.strong_concavity = float(strong_concavity)
        self.strong_convexity_x = float(strong_convexity_x)
        self.domain_x = domain_x
        self.domain_y = domain_y
        self.ledger = ledger if ledger is not None else QueryLedger()
        # Optional closed forms shipped with synthetic instances.
        self.argmax_y_oracle = argmax_y_oracle
        self.argmin_x_oracle = argmin_x_oracle

    def saddle_grad(self, x: Vector, y: Vector):
        """Both block gradients at (x, y); one saddle-gradient event."""
        self.ledger.add_saddle_grads(1)
        return (np.asarray(self._grad_x(x, y), dtype=float),
                np.asarray(self._grad_y(x, y), dtype=float))

    def grad_y_counted(self, x: Vector, y: Vector) -> Vector:
        self.ledger.add_saddle_grads(1)
        return np.asarray(self._grad_y(x, y), dtype=float)

    def grad_x_counted(self, x: Vector, y: Vector) -> Vector:
        self.ledger.add_saddle_grads(1)
        return np.asarray(self._grad_x(x, y), dtype=float)


@dataclass
class ProxProblem:
    """F plus a quadratic centered at s with weight lam; lam-strongly convex."""

    base_value: Callable[[Vector], float]
    base_grad: Callable[[Vector], Vector]
    lam: float
    center: Vector

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("prox parameter must be positive")
        self.center = _as_vector(self.center)

    def value(self, x: Vector) -> float:
        x = np.asarray(x, dtype=float)
        _check_same_dim(x, self.center)
        d = x - self.center
        return float(self.base_value(x)) + 0.5 * self.lam * float(d @ d)

    def value_grad(self, x: Vector):
        x = np.asarray(x, dtype=float)
        _check_same_dim(x, self.center)
        d = x - self.center
        val = float(self.base_value(x)) + 0.5 * self.lam * float(d @ d)
        grad = np.asarray(self.base_grad(x), dtype=float) + self.lam * d
        return val, grad


def prox_value_grad(p: ProxProblem, x: Vector):
    return p.value_grad(x)


def exact_prox_quadratic(A: np.ndarray, b: Vector, lam: float, s: Vector) -> Vector:
    """Closed-form prox of F(x) = 0.5 x'Ax + b'x: solve (A + lam I) x = lam s - b."""
    if not lam > 0:
        raise ValueError("prox parameter must be positive")
    A = np.asarray(A, dtype=float)
    b = _as_vector(b)
    s = _as_vector(s)
    d = s.shape[0]
    return np.linalg.solve(A + lam * np.eye(d), lam * s - b)


# ---------------------------------------------------------------------------
# Traces


@dataclass
class TraceRow:
    iteration: int
    queries: int
    suboptimality: Optional[float]
    elapsed: float


class Trace:
    """Per-outer-iteration progress records, emitted as CSV."""

    HEADER = "iter,grad_queries,suboptimality,elapsed_ms"

    def __init__(self):
        self.rows: list[TraceRow] = []
        self.warning: Optional[str] = None

    def append(self, iteration: int, queries: int,
               suboptimality: Optional[float] = None, elapsed: float = 0.0) -> None:
        if self.rows:
            last = self.rows[-1]
            if iteration <= last.iteration:
                raise ValueError("trace iterations must be strictly increasing")
            if queries < last.queries:
                raise ValueError("trace query counts must be non-decreasing")
        self.rows.append(TraceRow(int(iteration), int(queries),
                                  None if suboptimality is None else float(suboptimality),
                                  float(elapsed)))

    def extend(self, other: "Trace") -> None:
        for r in other.rows:
            self.append(r.iteration, r.queries, r.suboptimality, r.elapsed)

    def csv_lines(self) -> list[str]:
        lines = [self.HEADER]
        for r in self.rows:
            sub = "" if r.suboptimality is None else repr(r.suboptimality)
            lines.append(f"{r.iteration},{r.queries},{sub},{repr(r.elapsed * 1000.0)}")
        return lines

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(self.csv_lines()) + "\n")
