"""Exact occupation moments for the three-state absorbing chain.

States 1, 2 are transient with transition rows (p1, q1, eta1) and
(q2, p2, eta2); state 3 absorbs.  Occupation times count every epoch
including time 0, so with start distribution pi restricted to the
transient block, first moments come from the fundamental matrix
N = (I - Q)^(-1) and the cross moment from

    E(l_j l_k) = (pi N)_j N_jk + (pi N)_k N_kj     (j != k),

an identity validated against the Monte Carlo oracle in the tests (the
uniform-integrability proof never writes it down, so it is not trusted
from transcription).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import engine, rng, sampling
from .errors import ConfigError
from .laws import StepLaw

_PROB_TOL = 1e-12


@dataclass(frozen=True)
class ThreeStateChain:
    p1: float
    q1: float
    eta1: float
    q2: float
    p2: float
    eta2: float
    pi: tuple  # (pi1, pi2, pi3)

    def __post_init__(self):
        object.__setattr__(self, "pi", tuple(float(p) for p in self.pi))
        rows = [(self.p1, self.q1, self.eta1), (self.q2, self.p2, self.eta2), self.pi]
        names = ["row 1", "row 2", "initial distribution"]
        for name, row in zip(names, rows):
            if min(row) < 0 or abs(math.fsum(row) - 1.0) > _PROB_TOL:
                raise ConfigError(f"{name} is not a probability vector: {row}")

    @property
    def transient_q(self) -> np.ndarray:
        return np.array([[self.p1, self.q1], [self.q2, self.p2]])

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.transient_q)).max())

    def satisfies_delta(self, delta: float) -> bool:
        """The lemma's applicability condition q1 > delta and eta2 > delta."""
        return self.q1 > delta and self.eta2 > delta

    def bracket(self) -> float:
        """The bound's bracket q1/(q1+eta1) * (1 - pi1) - pi2 + q2, exact."""
        denom = self.q1 + self.eta1
        ratio = self.q1 / denom if denom > 0 else 0.0
        return ratio * (1.0 - self.pi[0]) - self.pi[1] + self.q2


def exact_occupation_moments(chain: ThreeStateChain) -> dict:
    """(E l1, E l2, E l1 l2, Cov) from fundamental-matrix identities."""
    if chain.spectral_radius() >= 1.0 - 1e-12:
        raise ConfigError("transient block has spectral radius >= 1; occupation times diverge")
    # adjugate inverse of the 2x2 (I - Q): keeps structural zeros exact
    det = (1.0 - chain.p1) * (1.0 - chain.p2) - chain.q1 * chain.q2
    n = np.array([[1.0 - chain.p2, chain.q1],
                  [chain.q2, 1.0 - chain.p1]]) / det
    pi_t = np.array(chain.pi[:2])
    visits = pi_t @ n                      # E(l_j)
    cross = visits[0] * n[0, 1] + visits[1] * n[1, 0]
    cov = cross - visits[0] * visits[1]
    return {"e_l1": float(visits[0]), "e_l2": float(visits[1]),
            "e_l1l2": float(cross), "cov": float(cov)}


def simulate_occupation_moments(chain: ThreeStateChain, trials: int, seed: int,
                                max_steps: int = 10**6) -> dict:
    """Monte Carlo oracle: empirical moments with standard errors, vectorized."""
    gen = rng.generator(seed, stream=rng.STREAM_CHAIN)
    state = gen.choice(3, size=trials, p=list(chain.pi)).astype(np.int64)
    l1 = (state == 0).astype(np.int64)
    l2 = (state == 1).astype(np.int64)
    rows = np.array([[chain.p1, chain.q1, chain.eta1],
                     [chain.q2, chain.p2, chain.eta2]])
    cum = np.cumsum(rows, axis=1)
    steps = 0
    while True:
        alive = state < 2
        if not alive.any():
            break
        steps += 1
        if steps > max_steps:
            raise ConfigError("chain simulation exceeded the step budget (non-absorbing?)")
        u = gen.random(int(alive.sum()))
        nxt = (u[:, None] >= cum[state[alive]]).sum(axis=1)
        state[alive] = nxt
        l1[alive] += nxt == 0
        l2[alive] += nxt == 1
    l1 = l1.astype(np.float64)
    l2 = l2.astype(np.float64)
    prod = l1 * l2
    out = {}
    for name, arr in (("e_l1", l1), ("e_l2", l2), ("e_l1l2", prod)):
        out[name] = float(arr.mean())
        out[name + "_se"] = float(arr.std(ddof=1)) / math.sqrt(trials)
    cov, cov_se = _cov_with_se(l1, l2)
    out["cov"], out["cov_se"] = cov, cov_se
    return out


def _cov_with_se(x, y):
    from .birkhoff import jackknife_cov

    return jackknife_cov(np.asarray(x), np.asarray(y))


def lemma_bound_check(chain: ThreeStateChain, delta: float = 0.1) -> dict:
    """|Cov|, the bracket value, and their ratio for one chain.

    A nonpositive bracket with |Cov| > 0 is flagged, never clipped: the
    sweep reports such rows explicitly.
    """
    moments = exact_occupation_moments(chain)
    bracket = chain.bracket()
    abs_cov = abs(moments["cov"])
    flagged = bracket <= 0 and abs_cov > _PROB_TOL
    ratio = abs_cov / bracket if bracket > 0 else math.inf if abs_cov > _PROB_TOL else 0.0
    return {"cov": moments["cov"], "abs_cov": abs_cov, "bracket": bracket,
            "ratio": ratio, "flagged": flagged,
            "delta_ok": chain.satisfies_delta(delta)}


def chain_sweep(grid, delta: float = 0.1, mc_every: int = 0, mc_trials: int = 10**5,
                seed: int = 7):
    """lemma_bound_check over an iterable of chains, with optional MC spot checks.

    Returns (rows, max_ratio over delta-eligible unflagged rows).  Every
    mc_every-th row is re-verified against the Monte Carlo oracle; a
    disagreement beyond 4 standard errors raises.
    """
    rows = []
    max_ratio = 0.0
    for i, chain in enumerate(grid):
        row = lemma_bound_check(chain, delta)
        row["chain"] = chain
        if mc_every and i % mc_every == 0:
            mc = simulate_occupation_moments(chain, mc_trials, seed + i)
            exact = exact_occupation_moments(chain)
            for key in ("e_l1", "e_l2", "e_l1l2"):
                se = max(mc[key + "_se"], 1e-12)
                if abs(mc[key] - exact[key]) > 4 * se:
                    raise AssertionError(
                        f"chain {i}: exact {key}={exact[key]:.6g} vs MC {mc[key]:.6g} "
                        f"(se {se:.2g}) disagree beyond 4 se")
            row["mc_checked"] = True
        if row["delta_ok"] and not row["flagged"] and math.isfinite(row["ratio"]):
            max_ratio = max(max_ratio, row["ratio"])
        rows.append(row)
    return rows, max_ratio


def walk_to_chain(law: StepLaw, n1: int, n2: int, trials: int, seed: int,
                  threads: int = 1, exit_h: Optional[int] = None) -> dict:
    """Estimate the chain the walk induces on states (n1, n2, infinity).

    The chain starts at 1 or 2 according to which site is visited first
    (3 if neither is ever visited); each later visit epoch transitions to
    the next visited site or to 3 on escape.  Cells with fewer than 30
    observations are flagged.  Per-trial (l1, l2) pairs feed the direct
    covariance cross-check.
    """
    if not (0 < n1 < n2):
        raise ConfigError("need 0 < n1 < n2")
    if law.d != 1 or float(law.drift[0]) <= 0:
        raise ConfigError("walk_to_chain needs a positive-drift 1-d law")
    h = int(exit_h if exit_h is not None else sampling.exit_horizon(law, 1e-3))
    stop = int(n2) + h
    counts = np.stack(engine.run_indexed(
        lambda i: engine.pair_visits_trial(law, seed, i, n1, n2, stop), trials, threads))
    l1, l2 = counts[:, 0], counts[:, 1]
    c11, c12, c21, c22 = (counts[:, k].sum() for k in range(2, 6))
    first = counts[:, 7]
    tot1, tot2 = int(l1.sum()), int(l2.sum())
    pi1 = float((first == 1).mean())
    pi2 = float((first == 2).mean())
    est = {
        "p1": c11 / tot1 if tot1 else 0.0, "q1": c12 / tot1 if tot1 else 0.0,
        "q2": c21 / tot2 if tot2 else 0.0, "p2": c22 / tot2 if tot2 else 0.0,
        "pi": (pi1, pi2, 1.0 - pi1 - pi2),
    }
    est["eta1"] = max(1.0 - est["p1"] - est["q1"], 0.0)
    est["eta2"] = max(1.0 - est["q2"] - est["p2"], 0.0)
    low_cells = [name for name, cnt in
                 (("row1", tot1), ("row2", tot2), ("first", trials)) if cnt < 30]
    cov, cov_se = _cov_with_se(l1.astype(float), l2.astype(float))
    chain = ThreeStateChain(est["p1"], est["q1"], est["eta1"],
                            est["q2"], est["p2"], est["eta2"], est["pi"])
    model = exact_occupation_moments(chain) if chain.spectral_radius() < 1 else None
    return {"estimates": est, "chain": chain, "low_cells": low_cells,
            "direct_cov": cov, "direct_cov_se": cov_se,
            "model_cov": model["cov"] if model else None,
            "mean_l1": float(l1.mean()), "mean_l2": float(l2.mean()),
            "trials": trials, "exit_h": h}
