import math
from itertools import product

import numpy as np
import pytest

from walklab import (BudgetError, ConfigError, advance_kernel, delta_kernel, kernel_at,
                     llt_report, make_step_law, tail_report)


def enum_distribution(law, n, x0=0):
    """Oracle: exact H(n, .) by enumerating |support|^n paths."""
    probs = {(x0 if law.d == 1 else tuple([0] * law.d)): 1.0}
    for _ in range(n):
        nxt = {}
        for pos, p in probs.items():
            for site, q in zip(law.sites, law.probs):
                if law.d == 1:
                    key = pos + int(site[0])
                else:
                    key = tuple(a + int(b) for a, b in zip(pos, site))
                nxt[key] = nxt.get(key, 0.0) + p * q
        probs = nxt
    return probs


def test_one_step_is_the_step_law(lazy1):
    k = advance_kernel(delta_kernel(lazy1), lazy1)
    assert k.n == 1
    assert {x: k.mass_at(x) for x in (-1, 0, 1)} == {-1: 0.25, 0: 0.5, 1: 0.25}


@pytest.mark.parametrize("n", [2, 4, 6, 8])
def test_kernel_matches_path_enumeration(lazy1, n):
    k = kernel_at(lazy1, n)
    oracle = enum_distribution(lazy1, n)
    for x, p in oracle.items():
        assert abs(k.mass_at(x) - p) < 1e-12
    # H(4, 0) equals the coefficient from expanding ((1 + cos t)/2)^4
    if n == 4:
        assert abs(k.mass_at(0) - 0.2734375) < 1e-15


def test_kernel_matches_enumeration_drifted_table():
    law = make_step_law("table", {"sites": [[1], [2], [-1]], "probs": [0.5, 0.3, 0.2]})
    k = kernel_at(law, 6)
    oracle = enum_distribution(law, 6)
    for x, p in oracle.items():
        assert abs(k.mass_at(x) - p) < 1e-12


def test_kernel_matches_enumeration_d2(lazy2):
    k = kernel_at(lazy2, 3)
    oracle = enum_distribution(lazy2, 3)
    for x, p in oracle.items():
        assert abs(k.mass_at(*x) - p) < 1e-12


def test_conservation_and_symmetry(lazy1):
    k = delta_kernel(lazy1)
    for _ in range(60):
        k = advance_kernel(k, lazy1)
        assert abs(k.total_mass() - 1.0) < 1e-10
    xs = k.coords()[0]
    sym = max(abs(k.mass_at(int(x)) - k.mass_at(-int(x))) for x in xs)
    assert sym < 1e-14


def test_window_grows_at_most_by_support_radius(lazy2):
    k = delta_kernel(lazy2)
    for _ in range(5):
        prev = k.values.shape
        k = advance_kernel(k, lazy2)
        assert all(b - a <= 2 * lazy2.support_radius for a, b in zip(prev, k.values.shape))


def test_truncation_budget_respected(lazy1):
    k = delta_kernel(lazy1, trunc_tol=1e-9, horizon=500)
    for _ in range(500):
        k = advance_kernel(k, lazy1)
    assert 0 < k.truncated_mass < 1e-9
    assert k.values.shape[0] < 500  # trimming really happened


def test_heavy_tail_rejected():
    heavy = make_step_law("sym_stable_lattice", {"alpha": 1.5, "k_max": 10**4})
    with pytest.raises(ConfigError, match="heavy-tailed|sampling"):
        delta_kernel(heavy)


def test_window_overflow_raises(lazy1):
    k = delta_kernel(lazy1, trunc_tol=1e-300, max_window=11)
    with pytest.raises(BudgetError, match="max_window"):
        for _ in range(30):
            k = advance_kernel(k, lazy1)


# --- local limit theorem ------------------------------------------------------


def test_llt_n1_closed_form(lazy1):
    # sup over {-1,0,1} of |sqrt(1) H(1,l) - g(l)| with g the N(0, 1/2) density
    g0 = 1.0 / math.sqrt(2 * math.pi * 0.5)
    expected = max(abs(0.5 - g0), abs(0.25 - g0 * math.exp(-1.0)))
    rows = llt_report(lazy1, [1])
    assert abs(rows[0][1] - expected) < 1e-15


def test_llt_error_decays_d1(lazy1):
    rows = llt_report(lazy1, [100, 400])
    assert rows[1][1] < rows[0][1]
    assert rows[1][1] < 0.01


def test_llt_error_decays_d2(lazy2):
    rows = llt_report(lazy2, [100, 400])
    assert rows[1][1] < rows[0][1]
    assert rows[0][3] < 1e-8  # truncated mass stays controlled


def test_llt_rejects_heavy_tail():
    heavy = make_step_law("sym_stable_lattice", {"alpha": 1.5, "k_max": 10**4})
    with pytest.raises(ConfigError, match="alpha = 2"):
        llt_report(heavy, [10])


# --- moderate-deviation tail --------------------------------------------------


def test_tail_zero_beyond_support_radius(lazy1):
    # at n = 1, eta = 1 the radius is 1: nothing lies strictly outside the
    # closed unit ball; the >= variant keeps the two moving steps
    rep = tail_report(lazy1, 1, 1.0)
    assert rep["mass_strict"] == 0.0
    assert abs(rep["mass"] - 0.5) < 1e-15


def test_tail_values_match_gaussian_oracle(lazy1):
    # oracle scale: P(|S_n| >= n^0.6) for Var = n/2; at n = 1e4 that is ~3.9e-4
    # (the superpolynomial regime needs larger eta; see eta = 0.25 below)
    rep = tail_report(lazy1, 10**4, 0.1)
    z = rep["radius"] / math.sqrt(10**4 * 0.5)
    gauss = 2.0 * (1.0 - 0.5 * (1.0 + math.erf(z / math.sqrt(2.0))) )
    assert rep["mass"] < 1e-3
    assert abs(rep["mass"] - gauss) < 0.3 * gauss  # discrete-vs-Gaussian agreement
    rep2 = tail_report(lazy1, 10**4, 0.25)
    assert rep2["mass"] + rep2["truncated_mass"] < 1e-6


def test_tail_nonincreasing_in_eta(lazy1):
    masses = [tail_report(lazy1, 400, eta)["mass"] for eta in (0.05, 0.1, 0.2)]
    assert masses[0] >= masses[1] >= masses[2]


def test_kernel_csv_export(tmp_path, lazy1):
    k = kernel_at(lazy1, 3)
    path = tmp_path / "kernel.csv"
    k.to_csv(path)
    text = path.read_text().splitlines()
    assert text[0].startswith("#") and "n=3" in text[0] and "truncated_mass" in text[0]
    assert text[1] == "x_1,mass"
    total = sum(float(line.split(",")[1]) for line in text[2:])
    assert abs(total - 1.0) < 1e-12
