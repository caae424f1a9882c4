"""Problem instances and data loading: sparse classification data in the
libSVM text dialect, logistic and quadratic finite sums, and synthetic
generators with known optima."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (Domain, FiniteSumObjective, MaxStructuredObjective,
                   QueryLedger, Unconstrained, Box, _as_vector)


# ---------------------------------------------------------------------------
# libSVM-format parsing


class LibsvmParseError(ValueError):
    """Malformed data line; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        self.line_number = line_number
        super().__init__(f"line {line_number}: {message}")


@dataclass
class SparseExample:
    label: float
    indices: np.ndarray  # 1-based, strictly ascending
    values: np.ndarray


def parse_libsvm(text: str) -> list[SparseExample]:
    """Parse classification data: one example per line,
    ``label idx:val idx:val ...`` with 1-based strictly ascending indices.
    Blank lines are skipped, '#' starts a comment, qid fields are rejected.
    """
    examples: list[SparseExample] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        tokens = line.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise LibsvmParseError(lineno, f"invalid label {tokens[0]!r}") from None
        indices: list[int] = []
        values: list[float] = []
        prev = 0
        for tok in tokens[1:]:
            if tok.startswith("qid:"):
                raise LibsvmParseError(lineno, "qid fields are not supported")
            parts = tok.split(":")
            if len(parts) != 2:
                raise LibsvmParseError(lineno, f"malformed feature token {tok!r}")
            try:
                idx = int(parts[0])
                val = float(parts[1])
            except ValueError:
                raise LibsvmParseError(lineno, f"malformed feature token {tok!r}") from None
            if idx < 1:
                raise LibsvmParseError(lineno, f"feature index {idx} is not positive")
            if idx <= prev:
                raise LibsvmParseError(
                    lineno, f"feature index {idx} is not strictly ascending")
            if not math.isfinite(val):
                raise LibsvmParseError(lineno, f"non-finite feature value {parts[1]!r}")
            prev = idx
            indices.append(idx)
            values.append(val)
        examples.append(SparseExample(label,
                                      np.asarray(indices, dtype=np.int64),
                                      np.asarray(values, dtype=float)))
    return examples


def serialize_libsvm(examples: Sequence[SparseExample]) -> str:
    lines = []
    for ex in examples:
        toks = [repr(ex.label) if ex.label != int(ex.label) else str(int(ex.label))]
        toks += [f"{int(i)}:{v:.17g}" for i, v in zip(ex.indices, ex.values)]
        lines.append(" ".join(toks))
    return "\n".join(lines) + "\n"


def load_libsvm_file(path) -> list[SparseExample]:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh.read())


def examples_to_dense(examples: Sequence[SparseExample],
                      n_features: Optional[int] = None):
    """Dense (A, b) with binary labels mapped to {-1, +1}."""
    if not examples:
        raise ValueError("empty dataset")
    d = max((int(ex.indices[-1]) if len(ex.indices) else 0) for ex in examples)
    if n_features is not None:
        if n_features < d:
            raise ValueError(f"n_features={n_features} below max index {d}")
        d = n_features
    A = np.zeros((len(examples), d))
    b = np.empty(len(examples))
    labels = sorted({ex.label for ex in examples})
    if len(labels) > 2:
        raise ValueError(f"expected binary labels, found {len(labels)} classes")
    for row, ex in enumerate(examples):
        if len(ex.indices):
            A[row, ex.indices - 1] = ex.values
        b[row] = -1.0 if ex.label == labels[0] and len(labels) == 2 else 1.0
    return A, b


def normalize_unit_norm(A: np.ndarray, b: np.ndarray):
    """Scale each row of A to unit Euclidean norm; drop all-zero rows.

    Returns (A_normalized, b_kept, n_dropped).
    """
    norms = np.linalg.norm(A, axis=1)
    keep = norms > 0
    return A[keep] / norms[keep, None], b[keep], int((~keep).sum())


# ---------------------------------------------------------------------------
# Logistic regression


def logistic_value(z: float) -> float:
    # log(1 + exp(-z)) without overflow for large |z|
    if z >= 0:
        return math.log1p(math.exp(-z))
    return -z + math.log1p(math.exp(z))


def logistic_sigmoid_neg(z: float) -> float:
    # sigmoid(-z), overflow-safe
    if z >= 0:
        e = math.exp(-z)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(z))


def logistic_component(a: np.ndarray, b: float, x: np.ndarray):
    """Value and gradient of log(1 + exp(-b <a, x>))."""
    z = float(b) * float(a @ x)
    return logistic_value(z), (-float(b) * logistic_sigmoid_neg(z)) * a


class LogisticFiniteSum(FiniteSumObjective):
    """Average logistic loss over dense rows A with labels in {-1, +1}."""

    kind = "logistic"

    def __init__(self, A: np.ndarray, b: np.ndarray,
                 domain: Domain = Unconstrained(),
                 ledger: Optional[QueryLedger] = None):
        A = np.asarray(A, dtype=float)
        b = np.asarray(b, dtype=float)
        if A.ndim != 2 or b.shape != (A.shape[0],):
            raise ValueError("A must be (n, d) with matching label vector")
        self.A = A
        self.b = b
        # smoothness of each component is ||a_i||^2 / 4
        L = float(np.max(np.sum(A * A, axis=1))) / 4.0
        super().__init__(A.shape[0], self._cval, self._cgrad, L,
                         domain=domain, ledger=ledger)

    def _cval(self, i: int, x: np.ndarray) -> float:
        return logistic_value(self.b[i] * float(self.A[i] @ x))

    def _cgrad(self, i: int, x: np.ndarray) -> np.ndarray:
        z = self.b[i] * float(self.A[i] @ x)
        return (-self.b[i] * logistic_sigmoid_neg(z)) * self.A[i]

    def value(self, x: np.ndarray) -> float:
        z = self.b * (self.A @ x)
        # vectorized overflow-safe log1p(exp(-z))
        out = np.where(z >= 0, np.log1p(np.exp(-np.abs(z))),
                       -z + np.log1p(np.exp(-np.abs(z))))
        return float(out.mean())

    def grad_raw(self, x: np.ndarray) -> np.ndarray:
        return -((self.b * self._sigmoid_neg(x)) @ self.A) / self.n

    def component_grads_at(self, x: np.ndarray) -> np.ndarray:
        return (-(self.b * self._sigmoid_neg(x)))[:, None] * self.A

    def _sigmoid_neg(self, x: np.ndarray) -> np.ndarray:
        # sigmoid(-z) elementwise, overflow-safe via exp(-|z|)
        z = self.b * (self.A @ x)
        e = np.exp(-np.abs(z))
        return np.where(z >= 0, e / (1.0 + e), 1.0 / (1.0 + e))


# ---------------------------------------------------------------------------
# Quadratic finite sums


class QuadraticFiniteSum(FiniteSumObjective):
    """Average of components 0.5 x'H_i x + c_i'x + e_i with known optimum."""

    kind = "quadratic"

    def __init__(self, H: np.ndarray, c: np.ndarray, e: Optional[np.ndarray] = None,
                 domain: Domain = Unconstrained(),
                 ledger: Optional[QueryLedger] = None):
        H = np.asarray(H, dtype=float)
        c = np.asarray(c, dtype=float)
        if H.ndim != 3 or H.shape[1] != H.shape[2] or c.shape != H.shape[:2]:
            raise ValueError("H must be (n, d, d) with c of shape (n, d)")
        n, d = c.shape
        self.H = H
        self.c = c
        self.e = np.zeros(n) if e is None else np.asarray(e, dtype=float)
        self.H_mean = H.mean(axis=0)
        self.c_mean = c.mean(axis=0)
        self.e_mean = float(self.e.mean())
        L = max(float(np.linalg.eigvalsh(H[i])[-1]) for i in range(n))
        mean_eigs = np.linalg.eigvalsh(self.H_mean)
        mu = max(0.0, float(mean_eigs[0]))
        super().__init__(n, self._cval, self._cgrad, L, domain=domain,
                         strong_convexity=mu, ledger=ledger)

    def _cval(self, i: int, x: np.ndarray) -> float:
        return 0.5 * float(x @ self.H[i] @ x) + float(self.c[i] @ x) + float(self.e[i])

    def _cgrad(self, i: int, x: np.ndarray) -> np.ndarray:
        return self.H[i] @ x + self.c[i]

    def value(self, x: np.ndarray) -> float:
        return 0.5 * float(x @ self.H_mean @ x) + float(self.c_mean @ x) + self.e_mean

    def grad_raw(self, x: np.ndarray) -> np.ndarray:
        return self.H_mean @ x + self.c_mean

    def component_grads_at(self, x: np.ndarray) -> np.ndarray:
        return self.H @ x + self.c

    def x_star(self) -> np.ndarray:
        return np.linalg.solve(self.H_mean, -self.c_mean)

    def f_star(self) -> float:
        return self.value(self.x_star())

    def exact_prox(self, lam: float, s: np.ndarray) -> np.ndarray:
        return np.linalg.solve(self.H_mean + lam * np.eye(s.shape[0]),
                               lam * s - self.c_mean)


# ---------------------------------------------------------------------------
# Synthetic generators


def synth_finite_sum_quadratic(n: int, d: int, condition_number: float,
                               seed: int) -> QuadraticFiniteSum:
    """Random quadratic finite sum whose average Hessian has the requested
    condition number; the optimum stays available in closed form."""
    if condition_number < 1:
        raise ValueError("condition number must be >= 1")
    rng = np.random.default_rng(seed)
    H = np.empty((n, d, d))
    for i in range(n):
        M = rng.standard_normal((d, d))
        H[i] = M @ M.T / d
    # Mix the mean toward a spectrum with the target condition number.
    mean = H.mean(axis=0)
    w, V = np.linalg.eigh(mean)
    w_target = np.linspace(1.0 / condition_number, 1.0, d)
    target = (V * w_target) @ V.T
    shift = target - mean
    H += shift[None, :, :]
    # Keep each component convex: push up any negative component eigenvalue.
    for i in range(n):
        lo = float(np.linalg.eigvalsh(H[i])[0])
        if lo < 1e-9:
            H[i] += (1e-9 - lo) * np.eye(d)
    # Re-balance so the mean keeps the target spectrum exactly.
    correction = target - H.mean(axis=0)
    H += correction[None, :, :]
    c = rng.standard_normal((n, d)) / math.sqrt(d)
    return QuadraticFiniteSum(H, c)


def synth_logistic(n: int, d: int, seed: int,
                   domain: Domain = Unconstrained()) -> LogisticFiniteSum:
    """Random logistic instance with unit-norm rows, hence smoothness 1/4."""
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((n, d))
    A /= np.linalg.norm(A, axis=1)[:, None]
    x_true = rng.standard_normal(d)
    b = np.where(A @ x_true + 0.5 * rng.standard_normal(n) >= 0, 1.0, -1.0)
    return LogisticFiniteSum(A, b, domain=domain)


@dataclass
class SaddleQuadratic:
    """f(x, y) = 0.5 x'Px + x'By - 0.5 y'Qy + c'x + d'y with closed forms."""

    P: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    c: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        self.P = np.asarray(self.P, dtype=float)
        self.B = np.asarray(self.B, dtype=float)
        self.Q = np.asarray(self.Q, dtype=float)
        self.c = _as_vector(self.c)
        self.d = _as_vector(self.d)
        self.mu = float(np.linalg.eigvalsh(self.Q)[0])
        blocks = np.block([[self.P, self.B], [self.B.T, self.Q]])
        self.L = float(np.linalg.norm(blocks, 2))
        self.M = self.P + self.B @ np.linalg.solve(self.Q, self.B.T)

    def value(self, x, y) -> float:
        return (0.5 * float(x @ self.P @ x) + float(x @ self.B @ y)
                - 0.5 * float(y @ self.Q @ y) + float(self.c @ x) + float(self.d @ y))

    def grad_x(self, x, y):
        return self.P @ x + self.B @ y + self.c

    def grad_y(self, x, y):
        return self.B.T @ x - self.Q @ y + self.d

    def best_response_y(self, x):
        return np.linalg.solve(self.Q, self.B.T @ x + self.d)

    def max_value(self, x) -> float:
        return self.value(x, self.best_response_y(x))

    def x_star(self):
        lin = self.c + self.B @ np.linalg.solve(self.Q, self.d)
        return np.linalg.solve(self.M, -lin)

    def f_star(self) -> float:
        return self.max_value(self.x_star())

    def exact_prox(self, lam: float, s):
        lin = self.c + self.B @ np.linalg.solve(self.Q, self.d)
        return np.linalg.solve(self.M + lam * np.eye(s.shape[0]), lam * s - lin)

    def objective(self, ledger: Optional[QueryLedger] = None,
                  domain_x: Domain = Unconstrained(),
                  domain_y: Domain = Unconstrained()) -> MaxStructuredObjective:
        return MaxStructuredObjective(
            value=self.value, grad_x=self.grad_x, grad_y=self.grad_y,
            smoothness=self.L, strong_concavity=self.mu,
            strong_convexity_x=max(0.0, float(np.linalg.eigvalsh(self.P)[0])),
            domain_x=domain_x, domain_y=domain_y, ledger=ledger,
            argmax_y_oracle=self.best_response_y,
            argmin_x_oracle=lambda y: np.linalg.solve(
                self.P, -(self.B @ y + self.c)))


def synth_saddle_quadratic(dx: int, dy: int, mu: float, seed: int) -> SaddleQuadratic:
    rng = np.random.default_rng(seed)
    Mp = rng.standard_normal((dx, dx))
    P = Mp @ Mp.T / dx + 0.1 * np.eye(dx)
    Mq = rng.standard_normal((dy, dy))
    Q = Mq @ Mq.T / dy
    lo = float(np.linalg.eigvalsh(Q)[0])
    Q += (mu - lo) * np.eye(dy)
    B = rng.standard_normal((dx, dy)) / math.sqrt(max(dx, dy))
    return SaddleQuadratic(P, B, Q, rng.standard_normal(dx) / math.sqrt(dx),
                           rng.standard_normal(dy) / math.sqrt(dy))


def bilinear_box_instance(scale: float = 1.0) -> MaxStructuredObjective:
    """f(x, y) = scale * x*y on [-1, 1]^2; saddle at the origin, gap |x| + |y|."""
    box = Box(np.array([-1.0]), np.array([1.0]))
    return MaxStructuredObjective(
        value=lambda x, y: scale * float(x[0] * y[0]),
        grad_x=lambda x, y: scale * np.asarray([y[0]]),
        grad_y=lambda x, y: scale * np.asarray([x[0]]),
        smoothness=scale, strong_concavity=0.0,
        domain_x=box, domain_y=box)


def bilinear_gap(x, y, scale: float = 1.0) -> float:
    return scale * (abs(float(x[0])) + abs(float(y[0])))
