"""Weighted least squares on log-log axes, shared by the exponent fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass
class LoglogFit:
    slope: float
    intercept: float
    slope_se: float
    residuals: np.ndarray  # in log space, per point


def loglog_fit(x, y, y_se=None) -> LoglogFit:
    """Fit log y = intercept + slope * log x.

    Weights are 1/se(log y)^2 with se(log y) = y_se / y (delta method);
    if any se is zero or missing the fit falls back to ordinary least
    squares, which keeps synthetic exact-power-law inputs exact.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.size < 2:
        raise ConfigError("loglog_fit needs >= 2 matching points")
    if np.any(x <= 0) or np.any(y <= 0):
        raise ConfigError("loglog_fit needs strictly positive inputs")
    lx, ly = np.log(x), np.log(y)
    if y_se is not None:
        se = np.asarray(y_se, dtype=np.float64) / y
        w = 1.0 / se**2 if np.all(se > 0) else np.ones_like(lx)
    else:
        w = np.ones_like(lx)
    sw = w.sum()
    mx = (w * lx).sum() / sw
    my = (w * ly).sum() / sw
    sxx = (w * (lx - mx) ** 2).sum()
    if sxx == 0:
        raise ConfigError("loglog_fit needs at least two distinct x values")
    slope = (w * (lx - mx) * (ly - my)).sum() / sxx
    intercept = my - slope * mx
    resid = ly - (intercept + slope * lx)
    dof = max(x.size - 2, 1)
    slope_se = float(np.sqrt((w * resid**2).sum() / dof / sxx))
    return LoglogFit(float(slope), float(intercept), slope_se, resid)
