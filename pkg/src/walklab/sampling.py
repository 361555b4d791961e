"""Trajectory sampling and hitting-probability estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import engine, rng
from .errors import ConfigError
from .laws import StepLaw


@dataclass(frozen=True)
class Trajectory:
    """Result of one sampled walk; positions kept only when recording was requested."""

    seed: int
    n_steps: int
    final: np.ndarray     # (d,)
    mins: np.ndarray      # running per-coordinate minimum, including S_0 = 0
    maxs: np.ndarray
    positions: Optional[np.ndarray] = None  # (n_steps, d) when recorded


def sample_path(law: StepLaw, seed: int, n_steps: int, record: bool = False,
                trial: int = 0) -> Trajectory:
    """Deterministic walk of n_steps from the origin for (law, seed, trial).

    Bit-identical across runs, backends and any parallel schedule: the
    stream is keyed by (seed, trial) and positions are exact integers.
    """
    if n_steps < 0:
        raise ConfigError("n_steps must be >= 0")
    if n_steps == 0:
        z = np.zeros(law.d, dtype=np.int64)
        return Trajectory(seed, 0, z, z.copy(), z.copy(),
                          np.zeros((0, law.d), dtype=np.int64) if record else None)
    if record:
        path, _, mins, maxs = engine.path_trial(law, seed, trial, n_steps)
        return Trajectory(seed, n_steps, path[-1].copy(), mins, maxs, path)
    from .observables import make_constant

    records, mins, maxs = engine.birkhoff_trial(law, make_constant(law.d, 0.0), seed, trial,
                                                [n_steps])
    return Trajectory(seed, n_steps, records[-1][2], mins, maxs, None)


@dataclass
class MinTailReport:
    """Empirical P(min_n S_n <= -m) over a grid of m, with binomial errors."""

    rows: list            # (m, p_hat, std_err, trials)
    slope: Optional[float]  # log-log slope of p against m over the positive rows

    def probability(self, m: int) -> float:
        for mm, p, _, _ in self.rows:
            if mm == m:
                return p
        raise KeyError(m)


def min_tail_report(law: StepLaw, m_list, trials: int, seed: int,
                    safety: Optional[int] = None, threads: int = 1) -> MinTailReport:
    """Monte Carlo minimum-tail probabilities for a drifting walk.

    Each trial stops once S_n > m + safety: with positive drift the
    minimum has then been attained up to a residual the safety horizon
    controls.  The log-log slope over the positive rows is exposed for
    decay checks against the O(m^-eps) bound.
    """
    if law.d != 1 or float(law.drift[0]) <= 0:
        raise ConfigError("min_tail_report requires a 1-d law with strictly positive drift")
    m_list = [int(m) for m in m_list]
    rows = []
    for j, m in enumerate(m_list):
        if m == 0:
            rows.append((0, 1.0, 0.0, trials))  # S_0 = 0 <= 0 always
            continue
        stop = m + int(safety if safety is not None else max(1024, 8 * m))
        hits = engine.run_indexed(
            lambda i, m=m, stop=stop: engine.min_tail_trial(law, seed, i + j * trials, m, stop),
            trials, threads)
        p = sum(hits) / trials
        se = math.sqrt(p * (1 - p) / trials)
        rows.append((m, p, se, trials))
    pos = [(m, p) for m, p, _, _ in rows if p > 0 and m > 0]
    slope = None
    if len(pos) >= 2:
        x = np.log([m for m, _ in pos])
        y = np.log([p for _, p in pos])
        slope = float(np.polyfit(x, y, 1)[0])
    return MinTailReport(rows, slope)


def exit_horizon(law: StepLaw, residual: float = 1e-3, trials: int = 4000,
                 seed: int = 2024, h_max: int = 1 << 20) -> int:
    """Smallest power-of-two H with empirical P(min <= -H) + 2 se below `residual`.

    Used as the exit-certification margin: once the walk sits above
    x + H, the chance it ever returns to x or below is under `residual`.
    """
    if law.d != 1 or float(law.drift[0]) <= 0:
        raise ConfigError("exit_horizon requires a 1-d law with strictly positive drift")
    h = 16
    while h <= h_max:
        rep = min_tail_report(law, [h], trials, seed)
        _, p, se, _ = rep.rows[0]
        if p + 2 * se < residual:
            return h
        h *= 2
    raise ConfigError(f"no exit horizon up to {h_max} reaches residual {residual}")
