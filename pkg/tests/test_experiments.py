import numpy as np
import pytest

from sigmaforest import (McmcConfig, build_graph, cell_seed,
                         compare_pinning_sweep, independence_test,
                         ladder_decay, one_root_monotonicity,
                         single_pin_q_estimate)
from sigmaforest.experiments import fit_power_law, q_parts_estimate
from sigmaforest.graphs import Pinning, augment, ladder_spec, uniform_pinning
from sigmaforest.mcmc import run_chain


def cfg(**kw):
    base = dict(n_samples=4000, burn_in=1000, seed=11)
    base.update(kw)
    return McmcConfig(**base)


def test_cell_seed_is_deterministic_and_distinct():
    assert cell_seed(0, 1, 2) == cell_seed(0, 1, 2)
    seeds = {cell_seed(0, i, j) for i in range(10) for j in range(3)}
    assert len(seeds) == 30
    assert cell_seed(0, 1) != cell_seed(1, 1)


def test_fit_power_law_recovers_exponent():
    eps = np.array([0.2, 0.1, 0.05, 0.02])
    assert fit_power_law(eps, 3.0 * eps ** 1.7) == pytest.approx(1.7, abs=1e-12)
    assert fit_power_law(eps, np.zeros(4)) == np.inf
    with pytest.raises(ValueError):
        fit_power_law(eps, np.array([0.0, 0.0, 0.0, 1.0]))


def test_single_pin_estimate_positive(k2):
    est = single_pin_q_estimate(k2, np.ones(2), 1, 2, 0.1, cfg())
    assert est.mean > 0
    assert est.std_error < est.mean


def test_sweep_requires_decreasing_eps(k2):
    with pytest.raises(ValueError):
        compare_pinning_sweep(k2, np.ones(2), 1, 2, [0.1, 0.2], cfg())


def test_sweep_smoke_and_inequality(k2):
    sweep = compare_pinning_sweep(k2, np.ones(2), 1, 2, [0.2, 0.05],
                                  cfg(n_samples=6000))
    assert len(sweep.rows) == 2
    assert sweep.comparison_holds()
    for row in sweep.rows:
        assert row.eps_green.mean > 0
        assert row.ess_min > 50


def test_multi_root_part_scales_linearly_in_eps(path3):
    # on a 3-path with pair (1, 2) the two-root event {1, 3 both roots,
    # 1 <-> 2} survives, and its Q contribution must vanish like eps
    eps_list = [0.4, 0.2, 0.1, 0.05]
    pi = np.ones(3)
    means = []
    for idx, eps in enumerate(eps_list):
        ag = augment(path3, Pinning(pi=tuple(pi), epsilon=eps))
        batch = run_chain(ag, cfg(n_samples=6000, seed=cell_seed(17, idx)))
        _, multi = q_parts_estimate(batch, ag, 1, 2, pi)
        means.append(multi.mean)
    power = fit_power_law(np.array(eps_list), np.array(means))
    assert power > 0.7


def test_one_root_monotonicity_smoke(k2):
    report = one_root_monotonicity(k2, np.ones(2), 1, 2, [0.4, 0.1, 0.025],
                                   cfg(n_samples=6000))
    assert report.nondecreasing_as_eps_drops


def test_ladder_decay_smoke():
    base = build_graph(1, [])
    spec = ladder_spec(base, 0, 4, 1.0, 1.0)
    fit = ladder_decay(spec, 1.0, 0.2,
                       [(1, 2), (1, 3), (1, 4), (1, 5)],
                       cfg(n_samples=4000))
    assert fit.slope < 0
    assert fit.distances == (1, 2, 3, 4)
    lo, hi = fit.slope_ci()
    assert lo < fit.slope < hi


def test_ladder_decay_needs_three_distances():
    base = build_graph(1, [])
    spec = ladder_spec(base, 0, 4, 1.0, 1.0)
    with pytest.raises(ValueError):
        ladder_decay(spec, 1.0, 0.2, [(1, 2), (1, 3)], cfg())


def test_independence_negative_control(k2):
    # under uniform pinning the single-site block is genuinely coupled to
    # the gradients, so the calibrated statistics must reject
    report = independence_test(
        k2, 1, 0.5, cfg(n_samples=20000, seed=19),
        eps_x_alt=None, pinning=uniform_pinning(2, 0.5),
        allow_any_pinning=True)
    assert report.any_reject


def test_independence_requires_single_pin(k2):
    with pytest.raises(ValueError):
        independence_test(k2, 1, 0.5, cfg(), pinning=uniform_pinning(2, 0.5))
