import math
from itertools import product

import numpy as np
import pytest

from walklab import (ConfigError, ThreeStateChain, chain_sweep, exact_occupation_moments,
                     lemma_bound_check, make_step_law, occupation_covariance,
                     simulate_occupation_moments, walk_to_chain)
from walklab.chains import lemma_bound_check as bound_check


def test_absorbed_start_all_zero():
    c = ThreeStateChain(0.5, 0.3, 0.2, 0.1, 0.4, 0.5, (0, 0, 1))
    m = exact_occupation_moments(c)
    assert m == {"e_l1": 0.0, "e_l2": 0.0, "e_l1l2": 0.0, "cov": 0.0}


def test_q1_zero_geometric_family():
    # state 2 unreachable from 1; holding time at 1 is geometric including t=0
    for p1 in (0.1, 0.5, 0.9):
        c = ThreeStateChain(p1, 0.0, 1.0 - p1, 0.1, 0.4, 0.5, (1, 0, 0))
        m = exact_occupation_moments(c)
        assert abs(m["e_l1"] - 1.0 / (1.0 - p1)) < 1e-12
        assert m["e_l2"] == 0.0
        assert m["cov"] == 0.0


def test_cov_zero_when_state2_unreachable():
    c = ThreeStateChain(0.3, 0.0, 0.7, 0.0, 0.2, 0.8, (0.6, 0.0, 0.4))
    m = exact_occupation_moments(c)
    assert m["cov"] == 0.0


def test_exact_vs_mc_oracle():
    c = ThreeStateChain(0.5, 0.3, 0.2, 0.1, 0.4, 0.5, (1, 0, 0))
    exact = exact_occupation_moments(c)
    mc = simulate_occupation_moments(c, 10**6, 42)
    for key in ("e_l1", "e_l2", "e_l1l2"):
        assert abs(exact[key] - mc[key]) < 4 * mc[key + "_se"]
    assert abs(exact["cov"] - mc["cov"]) < 4 * mc["cov_se"]


def test_non_transient_rejected():
    c = ThreeStateChain(1.0, 0.0, 0.0, 0.0, 1.0, 0.0, (1, 0, 0))
    with pytest.raises(ConfigError, match="spectral radius"):
        exact_occupation_moments(c)


def test_invalid_rows_rejected():
    with pytest.raises(ConfigError, match="probability"):
        ThreeStateChain(0.5, 0.6, -0.1, 0.1, 0.4, 0.5, (1, 0, 0))
    with pytest.raises(ConfigError, match="probability"):
        ThreeStateChain(0.5, 0.3, 0.2, 0.1, 0.4, 0.5, (0.5, 0.4, 0.2))


def test_bracket_special_case_eta1_zero():
    # eta1 = 0, pi1 = 1: the first term vanishes, bracket = q2 - pi2
    c = ThreeStateChain(0.4, 0.6, 0.0, 0.15, 0.35, 0.5, (1, 0, 0))
    assert abs(c.bracket() - 0.15) < 1e-15
    chk = bound_check(c, delta=0.1)
    assert chk["delta_ok"] and not chk["flagged"]
    assert chk["ratio"] == abs(chk["cov"]) / 0.15


def test_bracket_arithmetic():
    c = ThreeStateChain(0.2, 0.5, 0.3, 0.1, 0.3, 0.6, (0.5, 0.2, 0.3))
    expected = 0.5 / 0.8 * 0.5 - 0.2 + 0.1
    assert abs(c.bracket() - expected) < 1e-15


def test_negative_bracket_flagged_not_clipped():
    c = ThreeStateChain(0.2, 0.5, 0.3, 0.1, 0.3, 0.6, (0.2, 0.9 - 0.2, 0.1))
    chk = bound_check(c)
    assert chk["bracket"] < 0
    if chk["abs_cov"] > 1e-12:
        assert chk["flagged"] and chk["ratio"] == math.inf


def test_sweep_grid():
    grid = [ThreeStateChain(p1, q1, 1 - p1 - q1, q2, 0.2, 0.8 - q2, (0.7, 0.1, 0.2))
            for p1, q1, q2 in product((0.1, 0.3), (0.2, 0.4), (0.05, 0.15))]
    rows, max_ratio = chain_sweep(grid, delta=0.1, mc_every=4, mc_trials=4 * 10**4)
    assert len(rows) == 8
    assert math.isfinite(max_ratio) and max_ratio > 0
    assert sum(1 for r in rows if r.get("mc_checked")) == 2


def test_walk_to_chain_deterministic(plus_one_law):
    res = walk_to_chain(plus_one_law, 5, 9, 64, 3)
    est = res["estimates"]
    assert est["pi"][0] == 1.0
    assert est["q1"] == 1.0 and est["p1"] == 0.0   # always reaches n2 next
    assert est["eta2"] == 1.0                       # then never returns
    assert res["direct_cov"] == 0.0


def test_walk_to_chain_consistency(drift_law):
    res = walk_to_chain(drift_law, 100, 200, 8000, 909)
    assert not res["low_cells"]
    # two estimators of the same covariance agree within 4 se
    assert abs(res["direct_cov"] - res["model_cov"]) < 4 * max(res["direct_cov_se"], 1e-3)


def test_walk_to_chain_q2_decreases(drift_law):
    near = walk_to_chain(drift_law, 100, 130, 4000, 11)
    far = walk_to_chain(drift_law, 100, 400, 4000, 11)
    assert far["estimates"]["q2"] <= near["estimates"]["q2"] + 1e-12


def test_estimator_se_scaling(drift_law):
    small = occupation_covariance(drift_law, 50, 100, 2000, 13)
    large = occupation_covariance(drift_law, 50, 100, 20000, 13)
    ratio = small["se"] / large["se"]
    assert math.sqrt(10) / 2 < ratio < math.sqrt(10) * 2
