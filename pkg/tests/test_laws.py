import math

import numpy as np
import pytest

from walklab import ConfigError, make_step_law

SUM_TOL = 1e-12


def test_lazy_srw_d1_table(lazy1):
    table = dict(zip(lazy1.sites[:, 0].tolist(), lazy1.probs.tolist()))
    assert table == {0: 0.5, -1: 0.25, 1: 0.25}
    assert lazy1.alpha == 2.0
    assert lazy1.drift.tolist() == [0.0]
    assert lazy1.variance() == 0.5
    assert lazy1.is_symmetric


def test_lazy_srw_d2_is_product(lazy2):
    assert len(lazy2.probs) == 9
    table = {tuple(s): p for s, p in zip(lazy2.sites.tolist(), lazy2.probs.tolist())}
    for (a, b), p in table.items():
        pa = 0.5 if a == 0 else 0.25
        pb = 0.5 if b == 0 else 0.25
        assert p == pa * pb
    assert np.allclose(lazy2.covariance, np.eye(2) * 0.5)


def test_probabilities_sum_to_one(lazy1, lazy2, drift_law):
    for law in (lazy1, lazy2, drift_law):
        assert abs(math.fsum(law.probs.tolist()) - 1.0) <= SUM_TOL
        assert (law.probs >= 0).all()


def test_sym_stable_tail_shape():
    law = make_step_law("sym_stable_lattice", {"alpha": 1.5, "k_max": 1000})
    assert law.alpha == 1.5
    assert law.drift.tolist() == [0.0]  # symmetry forces exact zero
    k = np.arange(1, 1001, dtype=np.float64)
    pos = law.probs[law.sites[:, 0] > 0]
    ratio = pos / k ** (-2.5)
    assert np.allclose(ratio, ratio[0], rtol=1e-12)  # pure power tail
    assert law.tail_cutoff == 1000
    assert not law.kernel_ok


def test_drift_pareto_exact_drift_mpmath_oracle():
    """Oracle: the defining series summed at 50-digit precision."""
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    v_target, beta, kmax = 0.5, 2.0, 10**5
    z = mp.fsum(mp.mpf(k) ** (-(1 + beta)) for k in range(1, kmax + 1))
    mu = mp.fsum(mp.mpf(k) ** (-beta) for k in range(1, kmax + 1)) / z
    w = (1 + mp.mpf(v_target)) / (1 + mu)
    drift_oracle = -(1 - w) + w * mu
    law = make_step_law("drift_pareto", {"v": v_target, "beta": beta, "k_max": kmax})
    assert abs(float(law.drift[0]) - float(drift_oracle)) < 1e-9


def test_drift_pareto_tail_exponent():
    law = make_step_law("drift_pareto", {"v": 0.5, "beta": 2.0, "k_max": 10**4})
    k = np.arange(1, 10**4 + 1, dtype=np.float64)
    pos = law.probs[law.sites[:, 0] >= 1]
    ratio = pos / k ** (-3.0)
    assert np.allclose(ratio, ratio[0], rtol=1e-12)
    assert law.alpha == 2.0  # min(beta, 2)


def test_alpha_one_rejected():
    with pytest.raises(ConfigError, match="alpha != 1"):
        make_step_law("sym_stable_lattice", {"alpha": 1.0, "k_max": 100})


def test_degenerate_table_rejected():
    # support on 2Z generates an index-2 sublattice
    with pytest.raises(ConfigError, match="non-degeneracy"):
        make_step_law("table", {"sites": [[-2], [2]], "probs": [0.5, 0.5]})


def test_periodic_table_rejected():
    # +-1 walk without laziness returns only at even times
    with pytest.raises(ConfigError, match="aperiodicity"):
        make_step_law("table", {"sites": [[-1], [1]], "probs": [0.5, 0.5]})


def test_d2_sublattice_rejected():
    # checkerboard sublattice (index 2) in d = 2
    with pytest.raises(ConfigError, match="non-degeneracy"):
        make_step_law("table", {"sites": [[1, 1], [1, -1], [-1, -1], [-1, 1]],
                                "probs": [0.25] * 4})


def test_deterministic_plus_one_allowed(plus_one_law):
    # never returns to 0: the aperiodicity gcd condition is vacuously satisfied
    assert plus_one_law.drift.tolist() == [1.0]


def test_zero_mean_table_validates_mean():
    law = make_step_law("zero_mean_finite_var",
                        {"sites": [[-2], [0], [1]], "probs": [0.2, 0.4, 0.4]})
    assert abs(law.drift[0]) < 1e-15
    with pytest.raises(ConfigError, match="nonzero mean"):
        make_step_law("zero_mean_finite_var", {"sites": [[0], [1]], "probs": [0.5, 0.5]})


def test_bad_probability_tables_rejected():
    with pytest.raises(ConfigError, match="sum"):
        make_step_law("table", {"sites": [[0], [1]], "probs": [0.5, 0.6]})
    with pytest.raises(ConfigError, match="nonnegative"):
        make_step_law("table", {"sites": [[0], [1], [-1]], "probs": [1.1, -0.05, -0.05]})
    with pytest.raises(ConfigError, match="unknown step-law preset"):
        make_step_law("nope", {})


def test_cdf_monotone(lazy2, drift_law):
    for law in (lazy2, drift_law):
        assert (np.diff(law.cdf) >= 0).all()
        assert abs(law.cdf[-1] - 1.0) < 1e-9
