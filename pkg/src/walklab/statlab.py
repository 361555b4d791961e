"""Trial ensembles and the statistics that turn them into theorem checks.

Covers the arcsine reference law, one-sample Kolmogorov-Smirnov
distances (right-continuous empirical CDF, both one-sided sups), the
affine reduction that maps one-sided means onto the arcsine scale,
growth-exponent regression against checkpoints, the rate-exponent
formulas rho_d(beta) / gamma(d, beta, eps), and weak-LLN exceedance
tables.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np

from . import engine
from .errors import ConfigError
from .fitting import LoglogFit, loglog_fit
from .laws import StepLaw
from .observables import Observable


# --- ensembles --------------------------------------------------------------


@dataclass
class TrialEnsemble:
    """Per-trial (n, T_n, S_n) checkpoint records keyed by trial index."""

    master_seed: int
    checkpoints: list
    records: Dict[int, tuple] = field(default_factory=dict)  # trial -> (T array, S array)
    law_descriptor: dict = field(default_factory=dict)
    obs_descriptor: dict = field(default_factory=dict)

    def add(self, trial: int, t_values, s_values) -> None:
        if trial in self.records:
            raise ConfigError(f"duplicate trial index {trial}")
        self.records[trial] = (np.asarray(t_values, dtype=np.float64),
                               np.asarray(s_values, dtype=np.int64))

    def merge(self, other: "TrialEnsemble") -> "TrialEnsemble":
        if other.checkpoints != self.checkpoints:
            raise ConfigError("cannot merge ensembles with different checkpoints")
        if set(other.records) & set(self.records):
            raise ConfigError("cannot merge ensembles with overlapping trial indices")
        out = TrialEnsemble(self.master_seed, self.checkpoints, dict(self.records),
                            self.law_descriptor, self.obs_descriptor)
        out.records.update(other.records)
        return out

    def validate_complete(self) -> None:
        if sorted(self.records) != list(range(len(self.records))):
            raise ConfigError("ensemble has missing trial indices")

    @property
    def n_trials(self) -> int:
        return len(self.records)

    def t_matrix(self) -> np.ndarray:
        """(trials, checkpoints) Birkhoff sums, rows in trial order."""
        return np.stack([self.records[i][0] for i in sorted(self.records)])

    def s_matrix(self) -> np.ndarray:
        return np.stack([self.records[i][1] for i in sorted(self.records)])


def run_ensemble(law: StepLaw, obs: Observable, seed: int, trials: int,
                 checkpoints: Sequence[int], threads: int = 1, x0=None) -> TrialEnsemble:
    """Independent Birkhoff trials, one Philox stream per trial index."""
    checkpoints = [int(c) for c in checkpoints]
    ens = TrialEnsemble(seed, checkpoints,
                        law_descriptor=law.descriptor(), obs_descriptor=obs.descriptor())

    def one(i):
        records, _, _ = engine.birkhoff_trial(law, obs, seed, i, checkpoints, x0=x0)
        return ([t for (_, t, _) in records], [s for (_, _, s) in records])

    for i, (tv, sv) in enumerate(engine.run_indexed(one, trials, threads)):
        ens.add(i, tv, np.asarray(sv))
    ens.validate_complete()
    return ens


def geometric_checkpoints(start: int, stop: int, ratio: float = 1.25) -> list:
    """Strictly increasing integer schedule n_k ~ start * ratio^k, ending at stop."""
    if not (1 <= start <= stop) or ratio <= 1:
        raise ConfigError("need 1 <= start <= stop and ratio > 1")
    out, x = [], float(start)
    while x < stop:
        n = int(x)
        if not out or n > out[-1]:
            out.append(n)
        x *= ratio
    if not out or out[-1] != stop:
        out.append(stop)
    return out


# --- arcsine law -------------------------------------------------------------


class ArcsineLaw:
    """The parameter-free limit law on [0, 1] for the positive-time fraction."""

    @staticmethod
    def cdf(z):
        z = np.asarray(z, dtype=np.float64)
        if np.any(z < 0) or np.any(z > 1):
            raise ConfigError("arcsine CDF is defined on [0, 1]")
        return (2.0 / math.pi) * np.arcsin(np.sqrt(z))

    @staticmethod
    def ppf(p):
        p = np.asarray(p, dtype=np.float64)
        if np.any(p < 0) or np.any(p > 1):
            raise ConfigError("quantile level must lie in [0, 1]")
        return np.sin(math.pi * p / 2.0) ** 2


def arcsine_cdf(z) -> float:
    return float(ArcsineLaw.cdf(z))


# --- Kolmogorov-Smirnov -------------------------------------------------------


def ks_distance(sample, cdf) -> float:
    """One-sample KS statistic sup |F_hat - F| (both one-sided sups)."""
    x = np.sort(np.asarray(sample, dtype=np.float64))
    if x.size == 0:
        raise ConfigError("KS distance of an empty sample")
    m = x.size
    f = np.asarray(cdf(x), dtype=np.float64)
    d_plus = (np.arange(1, m + 1) / m - f).max()
    d_minus = (f - np.arange(0, m) / m).max()
    return float(max(d_plus, d_minus))


# --- affine reduction ---------------------------------------------------------


def affine_reduce(obs: Observable, n: int, t_values) -> np.ndarray:
    """Map T_N to (T_N - N F-bar_minus) / (N (F-bar_plus - F-bar_minus)).

    The reduced values are the normalized sums whose limit law the
    arcsine comparison applies to.  Requires declared one-sided means
    with F-bar_plus != F-bar_minus; equal means belong to the weak-LLN
    path instead.
    """
    if obs.plus_mean is None or obs.minus_mean is None:
        raise ConfigError("affine_reduce needs declared one-sided means")
    span = obs.plus_mean - obs.minus_mean
    if span == 0:
        raise ConfigError("F-bar_plus equals F-bar_minus; use the weak-LLN check instead")
    t = np.asarray(t_values, dtype=np.float64)
    return (t - n * obs.minus_mean) / (n * span)


def affine_restore(obs: Observable, n: int, reduced) -> np.ndarray:
    span = obs.plus_mean - obs.minus_mean
    return np.asarray(reduced) * (n * span) + n * obs.minus_mean


# --- growth exponents ----------------------------------------------------------


@dataclass
class GrowthFit:
    statistic: str
    fit: LoglogFit
    table: list  # rows (N, stat, std_err)


def _stat_and_se(t: np.ndarray, statistic: str, q: float):
    m = t.shape[0]
    if statistic == "rms":
        s2 = t**2
        stat = math.sqrt(float(s2.mean()))
        se = float(s2.std(ddof=1)) / math.sqrt(m) / (2 * stat) if stat > 0 else 0.0
        return stat, se
    if statistic == "mean-abs":
        a = np.abs(t)
        return float(a.mean()), float(a.std(ddof=1)) / math.sqrt(m)
    if statistic == "quantile":
        return float(np.quantile(t, q)), 0.0
    raise ConfigError(f"unknown growth statistic {statistic!r}")


def growth_exponent(ensemble: TrialEnsemble, statistic: str = "rms",
                    q: float = 0.9) -> GrowthFit:
    """Exponent fit: log statistic(T_N) against log N over the checkpoints.

    RMS is the default (the weak limits concern distributional scale);
    weights come from per-checkpoint standard errors, so synthetic exact
    inputs (all se = 0) reduce to ordinary least squares and recover
    exact slopes.
    """
    cps = np.asarray(ensemble.checkpoints, dtype=np.float64)
    if cps.size < 3:
        raise ConfigError("growth_exponent needs >= 3 checkpoints")
    if cps.size < 4 or cps[-1] / cps[0] < 100:
        import warnings

        warnings.warn("growth fit prefers >= 4 checkpoints spanning >= 2 decades", stacklevel=2)
    t = ensemble.t_matrix()
    stats, ses = [], []
    for j in range(cps.size):
        s, se = _stat_and_se(t[:, j], statistic, q)
        stats.append(s)
        ses.append(se)
    fit = loglog_fit(cps, np.array(stats), np.array(ses))
    return GrowthFit(statistic, fit, list(zip(ensemble.checkpoints, stats, ses)))


def rho_exponent(d: int, beta: float) -> float:
    """Growth exponent rho_d(beta): 1/2 below the critical beta, else d(beta-1)/2 + 1."""
    if d < 1:
        raise ConfigError("d must be >= 1")
    if not (0 <= beta < 1):
        raise ConfigError("beta must lie in [0, 1)")
    if beta <= (d - 1) / d:
        return 0.5
    return d * (beta - 1.0) / 2.0 + 1.0


def gamma_threshold(d: int, beta: float, eps: float) -> float:
    """Translation-range threshold gamma(d, beta, eps): 2/beta for d = 1, else 1/eps."""
    if d < 1:
        raise ConfigError("d must be >= 1")
    if not (0 <= beta < 1):
        raise ConfigError("beta must lie in [0, 1)")
    if eps <= 0:
        raise ConfigError("eps must be positive")
    if d == 1:
        return math.inf if beta == 0 else 2.0 / beta
    return 1.0 / eps


# --- weak law of large numbers ---------------------------------------------------


def weak_lln_check(ensemble: TrialEnsemble, f_bar: float,
                   deltas: Sequence[float] = (0.2,)) -> list:
    """Rows (N, delta, empirical P(|T_N/N - F-bar| > delta), binomial se)."""
    if ensemble.n_trials < 100:
        raise ConfigError("weak_lln_check needs at least 100 trials")
    t = ensemble.t_matrix()
    rows = []
    for j, n in enumerate(ensemble.checkpoints):
        dev = np.abs(t[:, j] / n - f_bar)
        for delta in deltas:
            f = float((dev > delta).mean())
            se = math.sqrt(f * (1 - f) / ensemble.n_trials)
            rows.append((int(n), float(delta), f, se))
    return rows
