"""Lattice step distributions.

A StepLaw is a finite table of (site in Z^d, probability) pairs together
with its declared stability index alpha and its exact drift (the mean of
the truncated table, never the nominal target).  Heavy-tailed presets
realize pure power tails p(+-k) ~ k^(-1-alpha) truncated at K_max with
the mass renormalized; the truncation is visible in `tail_cutoff`, not
hidden.

Construction validates the walk hypotheses:

* probabilities nonnegative, summing to 1 within 1e-12;
* non-degeneracy: the additive group generated by the support is Z^d;
* aperiodicity: gcd of possible return times to 0 equals 1 (checked by
  exact reachability for explicit tables; parametric presets carry the
  property by construction).  Walks that can never return (e.g. the
  deterministic +1 walk) pass vacuously.

alpha = 1 is rejected at construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Optional

import numpy as np

from .errors import ConfigError

SUM_TOL = 1e-12
_RETURN_TIME_BOUND = 16  # exact return-time scan horizon for explicit tables
_KERNEL_RADIUS_LIMIT = 32  # supports wider than this get no convolution kernel


@dataclass(frozen=True, eq=False)
class StepLaw:
    """Step distribution on Z^d with exact table-derived statistics."""

    d: int
    sites: np.ndarray  # (n_support, d) int64
    probs: np.ndarray  # (n_support,) float64
    alpha: float
    drift: np.ndarray  # (d,) float64, exact mean of the table
    tail_cutoff: Optional[int] = None
    name: str = "table"
    params: dict = field(default_factory=dict)

    # derived, filled in __post_init__
    cdf: np.ndarray = field(init=False, repr=False)
    covariance: np.ndarray = field(init=False, repr=False)
    support_radius: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cdf", np.cumsum(self.probs))
        centered = self.sites.astype(np.float64) - self.drift
        cov = (centered * self.probs[:, None]).T @ centered
        object.__setattr__(self, "covariance", cov)
        object.__setattr__(self, "support_radius", int(np.abs(self.sites).max(initial=0)))

    @property
    def sites1d(self) -> np.ndarray:
        if self.d != 1:
            raise ValueError("sites1d is only defined for d=1 laws")
        return np.ascontiguousarray(self.sites[:, 0])

    @property
    def kernel_ok(self) -> bool:
        """Whether exact convolution kernels are offered for this law."""
        return self.support_radius <= _KERNEL_RADIUS_LIMIT

    @property
    def is_symmetric(self) -> bool:
        table = {tuple(s): p for s, p in zip(self.sites.tolist(), self.probs.tolist())}
        return all(abs(table.get(tuple(-c for c in s), 0.0) - p) < SUM_TOL for s, p in table.items())

    def variance(self) -> float:
        if self.d != 1:
            raise ValueError("scalar variance is only defined for d=1")
        return float(self.covariance[0, 0])

    def descriptor(self) -> dict:
        return {"preset": self.name, "d": self.d, "alpha": self.alpha, **self.params}


def _lattice_index(sites: np.ndarray) -> Optional[int]:
    """Index of the subgroup of Z^d generated by the rows, None if not full rank.

    Integer row reduction to upper-triangular (Hermite-style) form; the
    group is all of Z^d exactly when the product of the pivots is +-1.
    """
    rows = [list(map(int, r)) for r in sites if any(r)]
    if not rows:
        return None
    d = len(rows[0])
    # closure under negation is automatic for groups; work with the rows as-is
    pivots = []
    col = 0
    while col < d and rows:
        nz = [r for r in rows if r[col] != 0]
        if not nz:
            return None
        while True:
            nz.sort(key=lambda r: abs(r[col]))
            piv = nz[0]
            rest = []
            done = True
            for r in nz[1:]:
                q = r[col] // piv[col]
                new = [a - q * b for a, b in zip(r, piv)]
                if new[col] != 0:
                    done = False
                if any(new):
                    rest.append(new)
            nz = [piv] + rest
            if done:
                break
        pivots.append(abs(piv[col]))
        rows = [r[:] for r in nz[1:]] + [r for r in rows if r[col] == 0 and any(r)]
        col += 1
    if len(pivots) < d:
        return None
    idx = 1
    for p in pivots:
        idx *= p
    return idx


def _return_time_gcd(sites: np.ndarray, bound: int = _RETURN_TIME_BOUND) -> int:
    """gcd of {n <= bound : the walk can be back at 0 after n steps}; 0 if none."""
    step_set = {tuple(map(int, s)) for s in sites}
    reachable = {tuple([0] * sites.shape[1])}
    g = 0
    origin = tuple([0] * sites.shape[1])
    for n in range(1, bound + 1):
        reachable = {tuple(a + b for a, b in zip(p, s)) for p in reachable for s in step_set}
        if origin in reachable:
            g = math.gcd(g, n)
            if g == 1:
                break
    return g


def _validate(sites: np.ndarray, probs: np.ndarray, alpha: float,
              check_aperiodic_by_table: bool) -> None:
    if alpha == 1:
        raise ConfigError("alpha = 1 is not supported (the stability index must satisfy alpha != 1)")
    if not (0 < alpha <= 2):
        raise ConfigError(f"stability index alpha must lie in (0, 2], got {alpha}")
    if np.any(probs < 0):
        raise ConfigError("step probabilities must be nonnegative")
    total = math.fsum(probs.tolist())
    if abs(total - 1.0) > SUM_TOL:
        raise ConfigError(f"step probabilities sum to {total!r}, not 1 within {SUM_TOL}")
    if len({tuple(s) for s in sites.tolist()}) != len(sites):
        raise ConfigError("duplicate sites in step table")
    idx = _lattice_index(sites[probs > 0])
    if idx != 1:
        raise ConfigError(
            "non-degeneracy violated: the group generated by the support is "
            f"{'a rank-deficient sublattice' if idx is None else f'a sublattice of index {idx}'}, not Z^d"
        )
    if check_aperiodic_by_table:
        g = _return_time_gcd(sites[probs > 0])
        if g > 1:
            raise ConfigError(f"aperiodicity violated: return times share the common factor {g}")


def _law(sites, probs, alpha, name, params, tail_cutoff=None, aperiodic_by_construction=False):
    sites = np.atleast_2d(np.asarray(sites, dtype=np.int64))
    probs = np.asarray(probs, dtype=np.float64)
    if sites.shape[0] != probs.shape[0]:
        raise ConfigError("site and probability tables have different lengths")
    _validate(sites, probs, alpha, check_aperiodic_by_table=not aperiodic_by_construction)
    drift = np.array(
        [math.fsum((sites[:, j].astype(np.float64) * probs).tolist()) for j in range(sites.shape[1])]
    )
    return StepLaw(
        d=sites.shape[1], sites=sites, probs=probs, alpha=float(alpha),
        drift=drift, tail_cutoff=tail_cutoff, name=name, params=params,
    )


def _lazy_srw(d: int, hold: float) -> StepLaw:
    if not (0 < hold < 1):
        raise ConfigError("hold probability must lie in (0, 1)")
    move = 1.0 - hold
    axis = [(hold, 0), (move / 2, -1), (move / 2, 1)]
    sites, probs = [], []
    for combo in product(axis, repeat=d):
        p = 1.0
        s = []
        for pj, xj in combo:
            p *= pj
            s.append(xj)
        sites.append(s)
        probs.append(p)
    return _law(sites, probs, 2.0, "lazy_srw_d", {"hold": hold},
                aperiodic_by_construction=True)


def _zero_mean_table(sites, probs) -> StepLaw:
    law = _law(sites, probs, 2.0, "zero_mean_finite_var", {})
    if np.abs(law.drift).max() > 1e-9:
        raise ConfigError(f"zero_mean_finite_var table has nonzero mean {law.drift.tolist()}")
    return law


def _drift_pareto(v: float, beta: float, k_max: int) -> StepLaw:
    """One-sided power tail p(k) ~ k^(-1-beta) on k=1..K_max mixed with mass at -1.

    The mixture weight is chosen so the mean of the truncated table hits
    the target v; the `drift` field is the exact table mean (fsum), which
    differs from v only by float rounding of the table entries.
    """
    if v <= 0:
        raise ConfigError("drift_pareto requires a strictly positive target drift v")
    if beta <= 1:
        raise ConfigError("drift_pareto requires tail exponent beta > 1 (finite mean)")
    if k_max < 2:
        raise ConfigError("drift_pareto requires K_max >= 2")
    k = np.arange(1, k_max + 1, dtype=np.float64)
    tail = k ** (-(1.0 + beta))
    z = math.fsum(tail.tolist())
    mu_tail = math.fsum((k * tail).tolist()) / z
    w = (1.0 + v) / (1.0 + mu_tail)
    if not (0 < w < 1):
        raise ConfigError(f"target drift v={v} is not reachable with beta={beta}, K_max={k_max}")
    sites = np.concatenate(([-1], np.arange(1, k_max + 1)))[:, None]
    probs = np.concatenate(([1.0 - w], (w / z) * tail))
    return _law(sites, probs, min(2.0, beta), "drift_pareto",
                {"v": v, "beta": beta, "k_max": k_max}, tail_cutoff=k_max,
                aperiodic_by_construction=True)


def _sym_stable(alpha: float, k_max: int) -> StepLaw:
    if not (0 < alpha < 2) or alpha == 1:
        raise ConfigError("sym_stable_lattice requires alpha in (0,1) or (1,2): "
                          "alpha != 1 is assumed throughout, and alpha = 2 presets "
                          "(lazy_srw_d, zero_mean_finite_var) cover the Gaussian case")
    if k_max < 2:
        raise ConfigError("sym_stable_lattice requires K_max >= 2")
    k = np.arange(1, k_max + 1, dtype=np.float64)
    tail = k ** (-(1.0 + alpha))
    z = 2.0 * math.fsum(tail.tolist())
    sites = np.concatenate((-np.arange(k_max, 0, -1), np.arange(1, k_max + 1)))[:, None]
    probs = np.concatenate((tail[::-1], tail)) / z
    return _law(sites, probs, alpha, "sym_stable_lattice",
                {"k_max": k_max}, tail_cutoff=k_max, aperiodic_by_construction=True)


_PRESETS = {
    "lazy_srw_d": lambda p: _lazy_srw(int(p.get("d", 1)), float(p.get("hold", 0.5))),
    "zero_mean_finite_var": lambda p: _zero_mean_table(p["sites"], p["probs"]),
    "drift_pareto": lambda p: _drift_pareto(float(p["v"]), float(p["beta"]), int(p.get("k_max", 10**5))),
    "sym_stable_lattice": lambda p: _sym_stable(float(p["alpha"]), int(p.get("k_max", 10**6))),
    "table": lambda p: _law(p["sites"], p["probs"], float(p.get("alpha", 2.0)), "table", {}),
}


def make_step_law(preset: str, params: Optional[dict] = None) -> StepLaw:
    """Build a validated StepLaw from a named preset.

    Presets: lazy_srw_d (product of d lazy +-1 walks), zero_mean_finite_var
    (explicit zero-mean table), drift_pareto (positive drift, power tail),
    sym_stable_lattice (symmetric power tail, alpha in (0,1) u (1,2)),
    table (explicit table, drift free).
    """
    if preset not in _PRESETS:
        raise ConfigError(f"unknown step-law preset {preset!r}; choose from {sorted(_PRESETS)}")
    try:
        return _PRESETS[preset](params or {})
    except KeyError as e:
        raise ConfigError(f"preset {preset!r} is missing required parameter {e}") from None
