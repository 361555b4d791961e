"""Streaming Birkhoff sums, occupation-time tallies, and the
counterexample's deterministic event logic."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import engine, sampling
from .errors import ConfigError
from .laws import StepLaw
from .observables import Observable
from .ocean import OceanSchedule


@dataclass
class BirkhoffAccumulator:
    """Checkpointed result of one trial: (n, T_n, S_n) rows plus extremes."""

    checkpoints: list
    records: list          # (n, T_n, S_n copy)
    mins: np.ndarray
    maxs: np.ndarray

    def t_at(self, n: int) -> float:
        for nn, t, _ in self.records:
            if nn == n:
                return t
        raise KeyError(n)


def run_birkhoff(law: StepLaw, obs: Observable, seed: int, checkpoints: Sequence[int],
                 trial: int = 0, x0=None) -> BirkhoffAccumulator:
    """T_N = sum_{n<=N} F(S_n) recorded at each checkpoint, O(chunk) memory."""
    if law.d != obs.d:
        raise ConfigError(f"law dimension {law.d} != observable dimension {obs.d}")
    records, mins, maxs = engine.birkhoff_trial(law, obs, seed, trial, checkpoints, x0=x0)
    return BirkhoffAccumulator([int(c) for c in checkpoints], records, mins, maxs)


# --- occupation times --------------------------------------------------------


@dataclass
class OccupationTally:
    """Visit counts of one drift-walk trial, exit-certified.

    ell(x) approximates the total occupation ell_infinity(x): the trial
    keeps walking until the position exceeds site_horizon + exit_h, so a
    site can only be undercounted if the walk later backtracks across
    the exit margin, which happens with probability below `residual`.
    """

    site_horizon: int
    tally_lo: int
    tally: np.ndarray      # visits of sites tally_lo .. tally_lo + len - 1
    below: int             # visits left of the tally window
    above: int             # visits right of it (final escape jump)
    n_steps: int
    records: list          # (n, T_n, S_n) at the requested step checkpoints
    exit_h: int
    residual: float

    def ell(self, x: int) -> int:
        i = x - self.tally_lo
        if 0 <= i < len(self.tally):
            return int(self.tally[i])
        raise KeyError(f"site {x} outside the tally window")

    def l_prefix(self, k: int) -> int:
        """L_k = sum_{x=1..k} ell(x)."""
        i0 = 1 - self.tally_lo
        return int(self.tally[i0:i0 + k].sum())

    @property
    def l_minus(self) -> int:
        """Total time spent at sites x <= 0 (window part plus below-window spill)."""
        i0 = 1 - self.tally_lo
        return int(self.tally[:i0].sum()) + self.below

    def t_tilde(self, k: int, obs: Observable) -> float:
        """T~_k = sum_{x=1..k} ell(x) F(x)."""
        i0 = 1 - self.tally_lo
        xs = np.arange(1, k + 1, dtype=np.int64)
        fv = obs.values(xs[:, None])
        return float((self.tally[i0:i0 + k] * fv).sum())

    def total_visits(self) -> int:
        return int(self.tally.sum()) + self.below + self.above


def run_occupation(law: StepLaw, obs: Observable, seed: int, site_horizon: int,
                   step_checkpoints: Sequence[int] = (), trial: int = 0,
                   neg_window: int = 256, residual: float = 1e-3,
                   exit_h: Optional[int] = None, eps: float = 0.05) -> OccupationTally:
    """One occupation-time trial for a 1-d walk with positive drift.

    The walk runs past all step checkpoints (T_n needs every step) and
    then until it escapes above site_horizon + exit margin, where the
    margin is calibrated so the return probability is below `residual`
    (geometric occupation tails justify the truncation).
    """
    if law.d != 1 or float(law.drift[0]) <= 0:
        raise ConfigError("occupation runs need a 1-d law with strictly positive drift")
    if obs.d != 1:
        raise ConfigError("occupation runs need a 1-d observable")
    h = int(exit_h if exit_h is not None else sampling.exit_horizon(law, residual))
    v = float(law.drift[0])
    cap = max([int(c) for c in step_checkpoints], default=0)
    stop_above = max(int(site_horizon), int(math.ceil(cap * v * (1 + eps)))) + h
    tally, below, above, n_steps, records, _, _ = engine.occupation_trial(
        law, obs, seed, trial, list(step_checkpoints), stop_above, -int(neg_window))
    return OccupationTally(int(site_horizon), -int(neg_window), tally, below, above,
                           n_steps, records, h, residual)


def occupation_ensemble(law: StepLaw, obs: Observable, seed: int, trials: int,
                        site_horizon: int, step_checkpoints: Sequence[int] = (),
                        threads: int = 1, **kw):
    """Per-trial occupation summaries as arrays (shared exit calibration)."""
    h = kw.pop("exit_h", None)
    if h is None:
        h = sampling.exit_horizon(law, kw.get("residual", 1e-3))

    def one(i):
        return run_occupation(law, obs, seed, site_horizon, step_checkpoints,
                              trial=i, exit_h=h, **kw)

    return engine.run_indexed(one, trials, threads)


def jackknife_cov(x: np.ndarray, y: np.ndarray):
    """Sample covariance and its leave-one-out jackknife standard error."""
    n = x.size
    if n < 3:
        raise ConfigError("jackknife needs >= 3 trials")
    sx, sy = x.sum(), y.sum()
    sxy = (x * y).sum()
    cov = (sxy - sx * sy / n) / (n - 1)
    # leave-one-out covariances, vectorized
    mx = (sx - x) / (n - 1)
    my = (sy - y) / (n - 1)
    cov_i = (sxy - x * y - (n - 1) * mx * my) / (n - 2)
    se = math.sqrt(max((n - 1) / n * ((cov_i - cov_i.mean()) ** 2).sum(), 0.0))
    return float(cov), float(se)


def occupation_covariance(law: StepLaw, n1: int, n2: int, trials: int, seed: int,
                          threads: int = 1, exit_h: Optional[int] = None):
    """Empirical Cov(ell_inf(n1), ell_inf(n2)) with jackknife standard error.

    Only the raw covariance and its error are reported; the paper's
    decay bound has unknown constants, so callers assert trends.
    """
    if not (0 < n1 < n2):
        raise ConfigError("need 0 < n1 < n2")
    if law.d != 1 or float(law.drift[0]) <= 0:
        raise ConfigError("occupation covariance needs a positive-drift 1-d law")
    if trials < 10**3:
        raise ConfigError("occupation covariance needs >= 1000 trials")
    h = int(exit_h if exit_h is not None else sampling.exit_horizon(law, 1e-3))
    stop = int(n2) + h

    counts = engine.run_indexed(
        lambda i: engine.pair_visits_trial(law, seed, i, n1, n2, stop), trials, threads)
    counts = np.stack(counts)
    l1 = counts[:, 0].astype(np.float64)
    l2 = counts[:, 1].astype(np.float64)
    cov, se = jackknife_cov(l1, l2)
    return {"n1": n1, "n2": n2, "cov": cov, "se": se, "trials": trials,
            "mean_l1": float(l1.mean()), "mean_l2": float(l2.mean())}


def t_tilde_decomposition_gap(tally: OccupationTally, obs: Observable, n_steps: int,
                              v: float, eps: float = 0.05):
    """Both sides of |T_N - T~_{floor(N v (1-eps))}| <= ||F||_inf (L^- + L_hi - L_lo).

    Returns (lhs, rhs); the inequality holds pathwise once the tally
    window covers ceil(N v (1+eps)) sites.
    """
    k_lo = int(math.floor(n_steps * v * (1 - eps)))
    k_hi = int(math.ceil(n_steps * v * (1 + eps)))
    if k_hi > tally.site_horizon + tally.exit_h:
        raise ConfigError("tally window too small for the requested decomposition check")
    t_n = None
    for n, t, _ in tally.records:
        if n == n_steps:
            t_n = t
    if t_n is None:
        raise ConfigError(f"step checkpoint {n_steps} was not recorded")
    lhs = abs(t_n - tally.t_tilde(k_lo, obs))
    rhs = obs.bound * (tally.l_minus + tally.l_prefix(k_hi) - tally.l_prefix(k_lo))
    return lhs, rhs


# --- counterexample event logic ----------------------------------------------


def ocean_event_check(obs: Observable, schedule: OceanSchedule, n: int,
                      positions: np.ndarray, alpha: Optional[float] = None):
    """Evaluate the confinement event A_n and its deterministic implication.

    A_n holds when S_k stays inside I_n for every k in [t_n, 3 t_n].
    When it holds, the block structure forces T_{3 t_n} >= 2 t_n for even
    n and T_{3 t_n} <= t_n for odd n; both booleans are returned, the
    bound verified by direct summation over the supplied path.  The
    positions array must cover S_1 .. S_{3 t_n} (d = 1), or an (n, d)
    array for the d >= 2 product-box variant.
    """
    alpha = float(alpha if alpha is not None else obs.params.get("alpha", 2.0))
    t = schedule.t_n(n, alpha)
    pos = np.asarray(positions)
    if pos.ndim == 1:
        pos = pos[:, None]
    if pos.shape[0] < 3 * t:
        raise ConfigError(f"incomplete segment: need positions through step {3 * t}")
    lo2, hi2 = schedule.interval2(n)
    seg = pos[t - 1: 3 * t]  # S_t .. S_{3t} (row k-1 holds S_k)
    in_first = (2 * seg[:, 0] >= lo2) & (2 * seg[:, 0] <= hi2)
    if pos.shape[1] > 1:
        w = schedule.half_width(n)
        rest_ok = (np.abs(seg[:, 1:]) <= w).all(axis=1)
        event = bool((in_first & rest_ok).all())
    else:
        event = bool(in_first.all())
    t_3t = float(obs.values(pos[: 3 * t]).sum())
    if n % 2 == 0:
        implied = t_3t >= 2 * t
    else:
        implied = t_3t <= t
    return {"n": n, "t_n": t, "event": event,
            "implication": implied if event else None, "T_3t": t_3t}
