"""Exact n-step distributions by convolution.

A LatticeKernel holds the law of S_n on a finite window plus the mass
that has been trimmed off the window edges (`truncated_mass`), so that
window sum + truncated mass = 1 at every step.  Windows grow by at most
the support radius per convolution and are trimmed back greedily under
a linear truncation budget: by step n the cumulative trimmed mass may
reach trunc_tol * n / horizon, which keeps windows near the diffusive
scale instead of growing linearly.

Heavy-tailed laws (support radius beyond the kernel limit) get no
kernel: their windows would be unbounded.  Only sampling is offered
for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from .errors import BudgetError, ConfigError
from .laws import StepLaw

DEFAULT_TRUNC_TOL = 1e-9
DEFAULT_HORIZON = 1 << 20


@dataclass(frozen=True)
class LatticeKernel:
    """Distribution of S_n on a window; immutable, safe for concurrent reads."""

    n: int
    lo: np.ndarray        # (d,) coordinates of values[0, ..., 0]
    values: np.ndarray    # d-dim probability masses
    truncated_mass: float
    trunc_tol: float = DEFAULT_TRUNC_TOL
    horizon: int = DEFAULT_HORIZON
    max_window: Optional[int] = None

    @property
    def d(self) -> int:
        return self.values.ndim

    def windows(self):
        """Per-dimension (lo, hi) inclusive coordinate bounds."""
        return [(int(l), int(l) + s - 1) for l, s in zip(self.lo, self.values.shape)]

    def coords(self):
        """Per-dimension coordinate arrays."""
        return [np.arange(l, l + s, dtype=np.int64) for l, s in zip(self.lo, self.values.shape)]

    def mass_at(self, *x: int) -> float:
        idx = tuple(int(c) - int(l) for c, l in zip(x, self.lo))
        if any(i < 0 or i >= s for i, s in zip(idx, self.values.shape)):
            return 0.0
        return float(self.values[idx])

    def total_mass(self) -> float:
        return float(self.values.sum()) + self.truncated_mass

    def to_csv(self, path) -> None:
        from .reports import write_csv

        pts = np.stack([g.ravel() for g in np.meshgrid(*self.coords(), indexing="ij")], axis=1)
        rows = [list(p) + [v] for p, v in zip(pts.tolist(), self.values.ravel().tolist())]
        write_csv(path, [f"x_{j + 1}" for j in range(self.d)] + ["mass"], rows,
                  meta={"n": self.n, "truncated_mass": self.truncated_mass})


def delta_kernel(law: StepLaw, x0=None, trunc_tol: float = DEFAULT_TRUNC_TOL,
                 horizon: int = DEFAULT_HORIZON, max_window: Optional[int] = None) -> LatticeKernel:
    """H(0, .) = delta at x0 (default origin)."""
    if not law.kernel_ok:
        raise ConfigError(
            f"law {law.name!r} has support radius {law.support_radius}; exact kernels are "
            "disabled for heavy-tailed laws (window would be unbounded), use sampling instead")
    x0 = np.array(x0 if x0 is not None else [0] * law.d, dtype=np.int64)
    values = np.ones([1] * law.d, dtype=np.float64)
    return LatticeKernel(0, x0, values, 0.0, trunc_tol, horizon, max_window)


def _trim(values: np.ndarray, lo: np.ndarray, allowance: float):
    """Greedily cut low/high slabs whose mass fits in the allowance."""
    trimmed = 0.0
    lo = lo.copy()
    changed = True
    while changed and values.size > 1:
        changed = False
        for axis in range(values.ndim):
            if values.shape[axis] <= 1:
                continue
            sl = [slice(None)] * values.ndim
            sl[axis] = 0
            face = float(values[tuple(sl)].sum())
            if face <= allowance - trimmed:
                trimmed += face
                keep = [slice(None)] * values.ndim
                keep[axis] = slice(1, None)
                values = values[tuple(keep)]
                lo[axis] += 1
                changed = True
            if values.shape[axis] <= 1:
                continue
            sl[axis] = values.shape[axis] - 1
            face = float(values[tuple(sl)].sum())
            if face <= allowance - trimmed:
                trimmed += face
                keep = [slice(None)] * values.ndim
                keep[axis] = slice(None, -1)
                values = values[tuple(keep)]
                changed = True
    return np.ascontiguousarray(values), lo, trimmed


def advance_kernel(kernel: LatticeKernel, law: StepLaw) -> LatticeKernel:
    """Exact convolution H(n+1, .) = H(n, .) * step law, then window trim."""
    if not law.kernel_ok:
        raise ConfigError("heavy-tailed law: kernel path disabled")
    if law.d != kernel.d:
        raise ConfigError("kernel and law dimensions differ")
    smin = law.sites.min(axis=0)
    smax = law.sites.max(axis=0)
    out_shape = tuple(s + int(hi - lo) for s, lo, hi in zip(kernel.values.shape, smin, smax))
    out = np.zeros(out_shape)
    for site, p in zip(law.sites, law.probs):
        off = site - smin
        sl = tuple(slice(int(o), int(o) + s) for o, s in zip(off, kernel.values.shape))
        out[sl] += p * kernel.values
    n_new = kernel.n + 1
    budget = kernel.trunc_tol * min(1.0, n_new / kernel.horizon)
    values, lo, trimmed = _trim(out, kernel.lo + smin, budget - kernel.truncated_mass)
    if kernel.max_window is not None and max(values.shape) > kernel.max_window:
        raise BudgetError(
            f"kernel window {values.shape} exceeds max_window={kernel.max_window} "
            f"while holding mass 1 - {kernel.trunc_tol}")
    return replace(kernel, n=n_new, lo=lo, values=values,
                   truncated_mass=kernel.truncated_mass + trimmed)


def kernel_at(law: StepLaw, n: int, **kw) -> LatticeKernel:
    k = delta_kernel(law, **kw)
    for _ in range(n):
        k = advance_kernel(k, law)
    return k


def kernel_history(law: StepLaw, n_max: int, **kw):
    """[H(0), H(1), ..., H(n_max)] advanced once and kept."""
    ks = [delta_kernel(law, **kw)]
    for _ in range(n_max):
        ks.append(advance_kernel(ks[-1], law))
    return ks


def gaussian_density(law: StepLaw):
    """Centered Gaussian density with the law's exact covariance matrix."""
    cov = law.covariance
    d = law.d
    det = float(np.linalg.det(cov))
    if det <= 0:
        raise ConfigError("law covariance is singular; no Gaussian comparison density")
    inv = np.linalg.inv(cov)
    norm = 1.0 / ((2.0 * math.pi) ** (d / 2.0) * math.sqrt(det))

    def g(y: np.ndarray) -> np.ndarray:
        y = np.atleast_2d(y)
        q = np.einsum("ij,jk,ik->i", y, inv, y)
        return norm * np.exp(-0.5 * q)

    return g


def llt_sup_error(kernel: LatticeKernel, law: StepLaw, g=None) -> float:
    """sup over the kernel window of |n^{d/2} H(n, l) - g((l - n v)/sqrt(n))|."""
    n = kernel.n
    if n < 1:
        raise ConfigError("llt error needs n >= 1")
    g = g or gaussian_density(law)
    pts = np.stack([gr.ravel() for gr in np.meshgrid(*kernel.coords(), indexing="ij")], axis=1)
    y = (pts.astype(np.float64) - n * law.drift) / math.sqrt(n)
    approx = g(y)
    exact = kernel.values.ravel() * float(n) ** (kernel.d / 2.0)
    return float(np.abs(exact - approx).max())


def llt_report(law: StepLaw, n_list, trunc_tol: float = DEFAULT_TRUNC_TOL,
               max_window: Optional[int] = None) -> list:
    """Rows (n, sup error, window width, truncated mass) for increasing n.

    Only alpha = 2 laws are supported: the limiting density is then the
    Gaussian with the law's exact covariance.  Stable densities for
    alpha < 2 are out of scope.
    """
    if law.alpha != 2.0:
        raise ConfigError(
            f"llt_report supports alpha = 2 presets only (got alpha = {law.alpha}); "
            "stable limiting densities are not implemented")
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])) or (n_list and n_list[0] < 1):
        raise ConfigError("n_list must be strictly increasing and >= 1")
    g = gaussian_density(law)
    rows = []
    k = delta_kernel(law, trunc_tol=trunc_tol, horizon=max(n_list), max_window=max_window)
    for n in n_list:
        while k.n < n:
            k = advance_kernel(k, law)
        rows.append((n, llt_sup_error(k, law, g), max(k.values.shape), k.truncated_mass))
    return rows


def tail_report(law: StepLaw, n: int, eta: float,
                trunc_tol: float = DEFAULT_TRUNC_TOL) -> dict:
    """Mass of H(n, .) outside the Euclidean ball of radius n^(1/2 + eta).

    Exact up to the kernel's truncated mass, which is reported alongside.
    """
    if law.alpha != 2.0:
        raise ConfigError("tail_report requires an alpha = 2 law")
    if eta <= 0:
        raise ConfigError("eta must be positive")
    k = kernel_at(law, n, trunc_tol=trunc_tol, horizon=max(n, 1))
    r = float(n) ** (0.5 + eta)
    pts = np.stack([gr.ravel() for gr in np.meshgrid(*k.coords(), indexing="ij")], axis=1)
    norms = np.sqrt((pts.astype(np.float64) ** 2).sum(axis=1))
    mass = float(k.values.ravel()[norms >= r].sum())
    mass_strict = float(k.values.ravel()[norms > r].sum())  # outside the closed ball
    return {"n": n, "eta": eta, "radius": r, "mass": mass, "mass_strict": mass_strict,
            "truncated_mass": k.truncated_mass}
