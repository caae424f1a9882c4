import math
from pathlib import Path

import numpy as np
import pytest

from proxaccel.core import bregman_f
from proxaccel.firstorder import SmoothStronglyConvexProblem, agd
from proxaccel.minimax import duality_gap
from proxaccel.problems import (LibsvmParseError, examples_to_dense,
                                load_libsvm_file, logistic_component,
                                normalize_unit_norm, parse_libsvm,
                                serialize_libsvm, synth_finite_sum_quadratic,
                                synth_logistic, synth_saddle_quadratic)

DATA = Path(__file__).parent / "data"


# ---------------------------------------------------------------------------
# parsing


def test_parser_accepts_fixture():
    examples = load_libsvm_file(DATA / "sample100.libsvm")
    assert len(examples) == 100
    for ex in examples:
        assert ex.label in (1.0, -1.0)
        assert np.all(np.diff(ex.indices) > 0)
        assert ex.indices[0] >= 1


MALFORMED = ["bad_label.libsvm", "bad_token.libsvm", "bad_index_zero.libsvm",
             "bad_index_order.libsvm", "bad_qid.libsvm", "bad_value.libsvm"]


@pytest.mark.parametrize("name", MALFORMED)
def test_parser_rejects_malformed(name):
    with pytest.raises(LibsvmParseError) as exc:
        load_libsvm_file(DATA / name)
    assert exc.value.line_number == 1
    assert "line 1" in str(exc.value)


def test_parser_error_line_number_counts_raw_lines():
    text = "# comment\n+1 1:1\n\n+1 2:1 1:1\n"
    with pytest.raises(LibsvmParseError) as exc:
        parse_libsvm(text)
    assert exc.value.line_number == 4


def test_parser_skips_blank_and_comment_lines():
    text = "\n# header\n+1 1:0.5 2:1.5   # trailing comment\n"
    examples = parse_libsvm(text)
    assert len(examples) == 1
    assert np.allclose(examples[0].values, [0.5, 1.5])


def test_serialize_roundtrip():
    examples = load_libsvm_file(DATA / "sample100.libsvm")
    again = parse_libsvm(serialize_libsvm(examples))
    assert len(again) == len(examples)
    for a, b in zip(examples, again):
        assert a.label == b.label
        assert np.array_equal(a.indices, b.indices)
        assert np.allclose(a.values, b.values)


def test_examples_to_dense_binary_labels():
    examples = parse_libsvm("0 1:1\n1 2:1\n")
    A, b = examples_to_dense(examples)
    assert A.shape == (2, 2)
    assert set(b) == {-1.0, 1.0}
    with pytest.raises(ValueError):
        examples_to_dense(parse_libsvm("0 1:1\n1 1:1\n2 1:1\n"))


# ---------------------------------------------------------------------------
# normalization and logistic pieces


def test_normalize_unit_norm():
    A = np.array([[3.0, 4.0], [0.0, 0.0], [1.0, 0.0]])
    b = np.array([1.0, -1.0, 1.0])
    An, bn, dropped = normalize_unit_norm(A, b)
    assert dropped == 1
    assert np.allclose(An[0], [0.6, 0.8])
    assert np.allclose(An[1], [1.0, 0.0])
    # idempotent on already-unit rows
    An2, _, _ = normalize_unit_norm(An, bn)
    assert np.allclose(An2, An, atol=1e-12)


def test_normalized_logistic_smoothness_is_quarter():
    obj = synth_logistic(32, 7, seed=0)
    assert obj.smoothness == pytest.approx(0.25, abs=1e-12)


def test_logistic_component_at_zero():
    a = np.array([0.2, -0.4])
    val, grad = logistic_component(a, 1.0, np.zeros(2))
    assert val == pytest.approx(math.log(2.0))
    assert np.allclose(grad, -a / 2.0)


def test_logistic_component_large_margin_no_overflow():
    a = np.array([1.0])
    x = np.array([50.0])
    val, grad = logistic_component(a, 1.0, x)
    assert val == pytest.approx(math.exp(-50.0), rel=1e-6)
    assert np.linalg.norm(grad) <= 2.0 * math.exp(-50.0)
    # the mirrored case stays finite too
    val2, grad2 = logistic_component(a, -1.0, x)
    assert val2 == pytest.approx(50.0, rel=1e-6)
    assert np.isfinite(grad2).all()


def test_logistic_component_finite_differences():
    rng = np.random.default_rng(4)
    a = rng.standard_normal(6)
    a /= np.linalg.norm(a)
    x = rng.standard_normal(6)
    _, grad = logistic_component(a, -1.0, x)
    h = 1e-6
    for j in range(6):
        e = np.zeros(6)
        e[j] = h
        vp, _ = logistic_component(a, -1.0, x + e)
        vm, _ = logistic_component(a, -1.0, x - e)
        fd = (vp - vm) / (2 * h)
        assert fd == pytest.approx(grad[j], rel=1e-5, abs=1e-9)


# ---------------------------------------------------------------------------
# objective probes shared by the shipped instances


def _probe_gradient(obj, d, seed):
    rng = np.random.default_rng(seed)
    for _ in range(20):
        x = rng.standard_normal(d)
        g = obj.grad_raw(x)
        h = 1e-6
        for j in range(0, d, max(1, d // 5)):
            e = np.zeros(d)
            e[j] = h
            fd = (obj.value(x + e) - obj.value(x - e)) / (2 * h)
            assert fd == pytest.approx(g[j], rel=1e-5, abs=1e-7)


def _probe_smoothness(obj, d, seed):
    rng = np.random.default_rng(seed)
    for _ in range(100):
        x, y = rng.standard_normal(d), rng.standard_normal(d)
        lhs = np.linalg.norm(obj.grad_raw(x) - obj.grad_raw(y))
        assert lhs <= obj.smoothness * np.linalg.norm(x - y) * (1 + 1e-6)


def _probe_convexity(obj, d, seed):
    rng = np.random.default_rng(seed)
    for _ in range(50):
        a, b = rng.standard_normal(d), rng.standard_normal(d)
        div = bregman_f(obj.value, obj.grad_raw, a, b)
        assert div >= -1e-9


@pytest.mark.parametrize("maker,d", [
    (lambda: synth_logistic(40, 6, seed=1), 6),
    (lambda: synth_finite_sum_quadratic(15, 5, 30.0, seed=2), 5),
])
def test_objective_probes(maker, d):
    obj = maker()
    _probe_gradient(obj, d, 10)
    _probe_smoothness(obj, d, 11)
    _probe_convexity(obj, d, 12)


def test_component_grads_match_loop():
    obj = synth_logistic(12, 4, seed=3)
    x = np.random.default_rng(5).standard_normal(4)
    stacked = obj.component_grads_at(x)
    for i in range(obj.n):
        assert np.allclose(stacked[i], obj._cgrad(i, x), atol=1e-14)


# ---------------------------------------------------------------------------
# synthetic generators


def test_quadratic_generator_minimizer_and_smoothness():
    obj = synth_finite_sum_quadratic(20, 6, condition_number=40.0, seed=1)
    xs = obj.x_star()
    assert np.linalg.norm(obj.grad_raw(xs)) <= 1e-10
    # mean Hessian condition number as requested
    w = np.linalg.eigvalsh(obj.H_mean)
    assert w[-1] / w[0] == pytest.approx(40.0, rel=1e-6)
    # power-iteration check of per-component smoothness
    rng = np.random.default_rng(9)
    for i in range(obj.n):
        v = rng.standard_normal(6)
        for _ in range(200):
            v = obj.H[i] @ v
            v /= np.linalg.norm(v)
        top = float(v @ obj.H[i] @ v)
        assert obj.smoothness >= top - 1e-8


def test_single_identity_quadratic():
    H = np.eye(2)[None, :, :]
    c = np.zeros((1, 2))
    from proxaccel.problems import QuadraticFiniteSum
    obj = QuadraticFiniteSum(H, c)
    assert np.allclose(obj.x_star(), 0.0)
    assert obj.smoothness == pytest.approx(1.0)


def test_generators_deterministic_per_seed():
    a = synth_finite_sum_quadratic(8, 4, 10.0, seed=7)
    b = synth_finite_sum_quadratic(8, 4, 10.0, seed=7)
    assert np.array_equal(a.H, b.H) and np.array_equal(a.c, b.c)
    la = synth_logistic(16, 5, seed=7)
    lb = synth_logistic(16, 5, seed=7)
    assert np.array_equal(la.A, lb.A) and np.array_equal(la.b, lb.b)
    sa = synth_saddle_quadratic(4, 3, 0.5, seed=7)
    sb = synth_saddle_quadratic(4, 3, 0.5, seed=7)
    assert np.array_equal(sa.P, sb.P) and np.array_equal(sa.Q, sb.Q)


def test_saddle_closed_forms():
    sq = synth_saddle_quadratic(5, 4, mu=0.3, seed=2)
    assert sq.mu == pytest.approx(0.3, rel=1e-9)
    rng = np.random.default_rng(6)
    # shipped max-value agrees with accelerated ascent at random x
    for _ in range(20):
        x = rng.standard_normal(5)
        p = SmoothStronglyConvexProblem(
            grad=lambda y: sq.grad_y(x, y), smoothness=sq.L,
            strong_convexity=sq.mu)
        gap0 = sq.L * 100.0
        y = agd(p, np.zeros(4), 1e-12, gap0, maximize=True)
        assert sq.value(x, y) == pytest.approx(sq.max_value(x), abs=1e-8)
    # saddle point has (numerically) zero duality gap
    xs = sq.x_star()
    ys = sq.best_response_y(xs)
    assert duality_gap(sq.objective(), xs, ys) <= 1e-8
    # exact prox is the stationary point of max_value + prox term
    s = rng.standard_normal(5)
    ps = sq.exact_prox(0.7, s)
    g = sq.M @ ps + sq.c + sq.B @ np.linalg.solve(sq.Q, sq.d) + 0.7 * (ps - s)
    assert np.linalg.norm(g) < 1e-10


def test_saddle_decoupled_when_no_coupling():
    sq = synth_saddle_quadratic(3, 2, mu=0.5, seed=1)
    from proxaccel.problems import SaddleQuadratic
    dec = SaddleQuadratic(sq.P, np.zeros((3, 2)), sq.Q, sq.c, np.zeros(2))
    x = np.array([1.0, -2.0, 0.5])
    assert np.allclose(dec.best_response_y(x), 0.0)
    assert dec.max_value(x) == pytest.approx(
        0.5 * float(x @ dec.P @ x) + float(dec.c @ x))
