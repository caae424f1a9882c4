import math

import numpy as np
import pytest

from proxaccel.mlmc import (MlmcConfig, mlmc_delta, sample_geometric,
                            unbiased_prox_mlmc)


def test_geometric_matches_inverse_cdf():
    rng = np.random.default_rng(0)
    draws = np.array([sample_geometric(rng, 0.5) for _ in range(20000)])
    assert draws.min() == 0
    # failures before the first success: P(G >= k) = (1 - p)^k
    for k in range(1, 6):
        emp = np.mean(draws >= k)
        assert emp == pytest.approx(0.5 ** k, abs=0.02)
    assert draws.mean() == pytest.approx(1.0, abs=0.03)


def test_geometric_certain_success_is_constant():
    rng = np.random.default_rng(1)
    assert all(sample_geometric(rng, 1.0) == 0 for _ in range(100))
    with pytest.raises(ValueError):
        sample_geometric(rng, 0.0)


def test_config_validation_and_expected_calls():
    with pytest.raises(ValueError):
        MlmcConfig(p=1.0, j0=0)
    with pytest.raises(ValueError):
        MlmcConfig(p=-0.1, j0=0)
    with pytest.raises(ValueError):
        MlmcConfig(p=0.5, j0=-1)
    assert MlmcConfig(p=0.5, j0=2).expected_inner_calls() == pytest.approx(4.0)
    assert MlmcConfig(p=0.0, j0=0).expected_inner_calls() == pytest.approx(1.0)


def _contracting_solver(target, rate=0.5):
    """Deterministic inner solver: each call halves the distance to target."""
    def approx_prox(s, x_init, x_prev, rng):
        return target + rate * (x_init - target)
    return approx_prox


def test_degenerate_chain_returns_single_call():
    ap = _contracting_solver(np.array([2.0, -1.0]))
    rng = np.random.default_rng(2)
    out = unbiased_prox_mlmc(ap, np.zeros(2), np.zeros(2),
                             MlmcConfig(p=0.0, j0=0), rng)
    assert out.inner_calls == 1
    assert out.level == 0
    assert np.allclose(out.estimate, out.last_iterate)
    assert np.allclose(out.estimate, np.array([1.0, -0.5]))


def test_chain_structure_and_zero_correction_branch():
    target = np.array([1.0])
    ap = _contracting_solver(target)
    cfg = MlmcConfig(p=0.5, j0=2)
    saw_base = saw_deep = False
    rng = np.random.default_rng(3)

    def x_level(j):
        # x^(j) starts from x_init = s = 0 and contracts once per solve
        return target + 0.5 ** (j + 1) * (0.0 - target)

    for _ in range(200):
        out = unbiased_prox_mlmc(ap, np.zeros(1), np.zeros(1), cfg, rng)
        assert out.inner_calls == 1 + out.level
        assert out.level >= cfg.j0
        j_extra = out.level - cfg.j0
        if j_extra == 0:
            # correction term is exactly zero at the burn-in level
            assert np.array_equal(out.estimate, x_level(cfg.j0))
            saw_base = True
        else:
            saw_deep = True
            p_j = 0.5 * 0.5 ** j_extra
            expect = x_level(cfg.j0) + (x_level(out.level)
                                        - x_level(out.level - 1)) / p_j
            assert np.allclose(out.estimate, expect, atol=1e-14)
            assert np.allclose(out.last_iterate, x_level(out.level), atol=1e-14)
    assert saw_base and saw_deep


def test_unbiasedness_against_exact_prox():
    """The estimator's mean matches the inner chain's limit point, checked
    with a coordinatewise z-test at the 3.1-sigma level."""
    target = np.array([0.7, -1.3, 2.0])
    ap = _contracting_solver(target, rate=0.5)
    cfg = MlmcConfig(p=0.5, j0=2)
    rng = np.random.default_rng(4)
    n = 20000
    samples = np.empty((n, 3))
    for i in range(n):
        samples[i] = unbiased_prox_mlmc(ap, np.zeros(3), np.zeros(3),
                                        cfg, rng).estimate
    se = samples.std(axis=0, ddof=1) / math.sqrt(n)
    z = np.abs(samples.mean(axis=0) - target) / se
    assert np.all(z < 3.1), z


def test_expected_call_count():
    ap = _contracting_solver(np.zeros(1))
    cfg = MlmcConfig(p=0.5, j0=2)
    rng = np.random.default_rng(5)
    calls = [unbiased_prox_mlmc(ap, np.zeros(1), np.zeros(1), cfg, rng).inner_calls
             for _ in range(20000)]
    assert np.mean(calls) == pytest.approx(4.0, abs=0.05)


def test_mlmc_delta_tolerance_schedule_and_collapse():
    """The fixed-accuracy variant requests tolerance delta/8 at the first
    level and divides it by 4 per extra level; with an inner solver that
    returns the target exactly, the reweighted correction vanishes and the
    output collapses to the target."""
    target = np.array([3.0, 4.0])
    tols = []

    def ap_delta(s, x_init, tol, rng):
        tols.append(tol)
        return target.copy()

    rng = np.random.default_rng(6)
    out = mlmc_delta(ap_delta, np.zeros(2), np.zeros(2), 0.8, rng)
    assert np.allclose(out.estimate, target, atol=1e-12)
    assert out.inner_calls == out.level >= 2
    assert tols[0] == pytest.approx(0.8 / 8)
    for a, b in zip(tols, tols[1:]):
        assert b == pytest.approx(a / 4)
    assert len(tols) >= 2
    with pytest.raises(ValueError):
        mlmc_delta(ap_delta, np.zeros(2), np.zeros(2), 0.0, rng)
