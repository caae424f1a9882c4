import numpy as np
import pytest

from proxaccel.core import QueryLedger
from proxaccel.minimax import (approx_prox_minimax, best_response,
                               duality_gap, minimax_prox_rounds, mirror_prox,
                               scratch_ledger, warm_start_mirror_prox)
from proxaccel.problems import (bilinear_box_instance, bilinear_gap,
                                synth_saddle_quadratic)


def _saddle(seed=2, dx=5, dy=4, mu=0.3):
    sq = synth_saddle_quadratic(dx, dy, mu=mu, seed=seed)
    return sq, sq.objective()


# ---------------------------------------------------------------------------
# extragradient rounds


def test_mirror_prox_regret_bound_bilinear():
    """On the box-constrained bilinear toy problem, the averaged half-step
    pair obeys the per-comparator regret bound (L / T)(V(x0,u) + V(y0,v))
    for every comparator, and in particular has zero regret against the
    saddle point."""
    obj = bilinear_box_instance()
    L = obj.smoothness
    x0 = np.array([1.0])
    y0 = np.array([1.0])
    rng = np.random.default_rng(0)
    for T in (10, 100, 1000):
        res = mirror_prox(obj, x0, y0, T)
        # saddle point of the bilinear game is the origin
        saddle_regret = obj.value(res.x, np.zeros(1)) \
            - obj.value(np.zeros(1), res.y)
        assert saddle_regret <= (L / T) * (0.5 + 0.5) + 1e-9
        # worst comparators on the box: the bound has V terms up to 2 each
        gap = bilinear_gap(res.x, res.y)
        assert gap <= (L / T) * 4.0 + 1e-9
        # random interior comparators
        for _ in range(20):
            u = rng.uniform(-1, 1, 1)
            v = rng.uniform(-1, 1, 1)
            regret = obj.value(res.x, v) - obj.value(u, res.y)
            bound = (L / T) * (0.5 * (x0 - u) @ (x0 - u)
                               + 0.5 * (y0 - v) @ (y0 - v))
            assert regret <= bound + 1e-9


def test_mirror_prox_counts_two_grads_per_round():
    sq, obj = _saddle()
    mirror_prox(obj, np.zeros(5), np.zeros(4), 17)
    assert obj.ledger.saddle_grads == 2 * 17
    with pytest.raises(ValueError):
        mirror_prox(obj, np.zeros(5), np.zeros(4), 0)


def test_mirror_prox_last_iterate_cycles_on_bilinear():
    """The last full-step iterate is diagnostic only: on the bilinear game
    it stays on a cycle while the average contracts to the saddle point."""
    obj = bilinear_box_instance()
    res = mirror_prox(obj, np.array([1.0]), np.array([1.0]), 2000)
    assert np.abs(res.x) < 1e-2 and np.abs(res.y) < 1e-2
    assert np.abs(res.x_last) > 10 * np.abs(res.x)


# ---------------------------------------------------------------------------
# best response and duality gap


def test_best_response_matches_oracle():
    sq, obj = _saddle(seed=4)
    x = np.ones(5)
    y = best_response(obj, x, np.zeros(4), target=1e-12,
                      gap_bound=sq.L * 100.0)
    assert np.allclose(y, sq.best_response_y(x), atol=1e-4)
    assert obj.ledger.best_response_calls == 1
    assert obj.ledger.saddle_grads > 0


def test_duality_gap_query_neutral_and_nonnegative():
    sq, obj = _saddle(seed=5)
    before = obj.ledger.totals()
    g = duality_gap(obj, np.ones(5), np.ones(4))
    assert obj.ledger.totals() == before
    assert g >= -1e-12
    assert duality_gap(obj, sq.x_star(), sq.best_response_y(sq.x_star())) <= 1e-8


def test_scratch_ledger_restores():
    sq, obj = _saddle(seed=6)
    obj.ledger.add_saddle_grads(1)
    with scratch_ledger(obj) as tmp:
        obj.saddle_grad(np.zeros(5), np.zeros(4))
        assert tmp.saddle_grads == 1
    assert obj.ledger.saddle_grads == 1


# ---------------------------------------------------------------------------
# prox subproblem solver and warm start


def test_minimax_prox_round_count():
    assert minimax_prox_rounds(10.0, 2.0) == int(np.ceil(64 * 12 / 2))


def test_approx_prox_minimax_accuracy():
    """The saddle prox solver lands near the exact proximal point of
    F(x) = max_y f(x, y) at prox weight mu."""
    sq, obj = _saddle(seed=7)
    mu = sq.mu
    s = np.full(5, 0.5)
    exact = sq.exact_prox(mu, s)
    x0 = np.zeros(5)
    x, y = approx_prox_minimax(obj, s, x0, x0, np.zeros(4),
                               radius_bound=50.0)
    assert np.linalg.norm(x - exact) <= 0.05 * max(1.0, np.linalg.norm(x0 - exact))
    # warmer start gets closer
    x2, _ = approx_prox_minimax(obj, s, exact, exact, y, radius_bound=50.0)
    assert np.linalg.norm(x2 - exact) <= np.linalg.norm(x - exact)


def test_approx_prox_minimax_exact_best_response_uses_oracle():
    sq, obj = _saddle(seed=8)
    s = np.zeros(5)
    approx_prox_minimax(obj, s, s, s, np.zeros(4), radius_bound=10.0,
                        exact_best_response=True)
    assert obj.ledger.best_response_calls == 1
    # closed-form oracle path uses no ascent gradients for the warm-up;
    # the extragradient rounds account for all saddle gradients
    T = minimax_prox_rounds(sq.L, sq.mu)
    assert obj.ledger.saddle_grads == 2 * T


def test_warm_start_reaches_high_accuracy():
    sq, obj = _saddle(seed=9)
    fstar = sq.f_star()
    x0 = np.full(5, 3.0)
    r2 = float(np.linalg.norm(x0 - sq.x_star()) ** 2) + 10.0
    x, y = warm_start_mirror_prox(obj, x0, np.zeros(4), radius_bound=r2)
    assert sq.max_value(x) - fstar <= sq.mu * r2
    # on this desk-scale instance the epochs contract far past the target
    assert sq.max_value(x) - fstar <= 1e-8
