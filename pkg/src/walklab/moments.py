"""Exact expectations of T_N and of F(S_{n1}) F(S_{n2}) via kernels.

The pair moment is the nested convolution

    E_{n1,n2}(x0) = sum_{x1} H(n1, x1) F(x0 + x1) g1(x1),
    g1(x1) = sum_{x2} H(n2 - n1, x2 - x1) F(x0 + x2),

with one g1 per elapsed time n2 - n1, cached.  Start-at-x0 moments
translate the observable, never the kernels, so one kernel history
serves every x0.  The second moment sums c_{n1,n2} E_{n1,n2} over
1 <= n1 <= n2 <= N with c = 1 on the diagonal and 2 off it (T_N starts
at n = 1; the path-enumeration oracle in the tests pins this down).

d = 1 runs through a correlate/BLAS fast path that handles horizons in
the thousands; higher dimensions use a direct slice-sum path guarded by
a small horizon budget (the enumeration cross-checks only need N <= 8).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetError, ConfigError
from .kernels import DEFAULT_TRUNC_TOL, kernel_history
from .laws import StepLaw
from .observables import Observable

_GENERIC_HORIZON_LIMIT = 128
_ROW_BLOCK = 256


@dataclass
class MomentPlan:
    law: StepLaw
    obs: Observable
    horizon: int
    x0: Sequence[int] = None
    trunc_tol: float = DEFAULT_TRUNC_TOL
    max_horizon: int = 1 << 13

    _hist: list = field(default=None, repr=False)

    def __post_init__(self):
        if self.law.d != self.obs.d:
            raise ConfigError("law and observable dimensions differ")
        if not self.law.kernel_ok:
            raise ConfigError("exact moments need a kernel-capable law (heavy tails rejected)")
        if self.horizon < 1:
            raise ConfigError("moment horizon must be >= 1")
        if self.horizon > self.max_horizon:
            raise BudgetError(f"moment horizon {self.horizon} exceeds budget {self.max_horizon}")
        if self.law.d > 1 and self.horizon > _GENERIC_HORIZON_LIMIT:
            raise BudgetError(
                f"d = {self.law.d} exact moments are limited to horizon {_GENERIC_HORIZON_LIMIT}")
        self.x0 = tuple(int(c) for c in (self.x0 if self.x0 is not None else [0] * self.law.d))

    def history(self):
        if self._hist is None:
            self._hist = kernel_history(self.law, self.horizon,
                                        trunc_tol=self.trunc_tol, horizon=self.horizon)
        return self._hist


def _f_window(plan: MomentPlan, lo, shape) -> np.ndarray:
    """F(x0 + u) over the box [lo, lo + shape), as a d-dim array."""
    axes = [np.arange(l, l + s, dtype=np.int64) + c
            for l, s, c in zip(lo, shape, plan.x0)]
    if plan.law.d == 1:
        pts = axes[0][:, None]
    else:
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    return plan.obs.values(pts).reshape(shape)


def exact_mean_T(plan: MomentPlan, horizon: Optional[int] = None):
    """E_{x0}(T_N) plus the per-step contributions E F(S_n).

    The per-step values make the local-global mixing limit checkable:
    for global observables they tend to the infinite-volume mean.
    """
    N = int(horizon or plan.horizon)
    if N > plan.horizon:
        raise BudgetError("requested horizon exceeds the plan horizon")
    hist = plan.history()
    contrib = np.empty(N + 1)
    contrib[0] = 0.0
    for n in range(1, N + 1):
        k = hist[n]
        f = _f_window(plan, k.lo, k.values.shape)
        contrib[n] = float((k.values * f).sum())
    return {"per_step": contrib[1:], "mean": float(contrib[1:].sum()),
            "cumulative": np.cumsum(contrib)[1:]}


def _g1_generic(plan, m, lo_t, shape_t, f_ext, ext_lo):
    """g1_m over the target window by explicit shift sums (any d, small windows)."""
    hist = plan.history()
    k = hist[m]
    g1 = np.zeros(shape_t)
    if m == 0:
        sl = tuple(slice(int(lt - el), int(lt - el) + st) for lt, el, st in zip(lo_t, ext_lo, shape_t))
        return f_ext[sl].copy()
    it = np.ndindex(*k.values.shape)
    for idx in it:
        p = k.values[idx]
        if p == 0.0:
            continue
        w = [int(k.lo[j]) + idx[j] for j in range(plan.law.d)]
        sl = tuple(slice(int(lt + wj - el), int(lt + wj - el) + st)
                   for lt, wj, el, st in zip(lo_t, w, ext_lo, shape_t))
        g1 += p * f_ext[sl]
    return g1


def _ext_window(plan, m_max, lo_t, hi_t):
    """Extended F window covering x0 + y + w for every y in the target window
    and every w in any kernel window H(m), m <= m_max (m = 0 keeps 0 inside)."""
    hist = plan.history()
    d = plan.law.d
    wlo = [min(int(hist[m].lo[j]) for m in range(m_max + 1)) for j in range(d)]
    whi = [max(int(hist[m].lo[j]) + hist[m].values.shape[j] - 1 for m in range(m_max + 1))
           for j in range(d)]
    ext_lo = [int(lt) + wl for lt, wl in zip(lo_t, wlo)]
    ext_hi = [int(ht) + wh for ht, wh in zip(hi_t, whi)]
    shape = tuple(h - l + 1 for l, h in zip(ext_lo, ext_hi))
    return np.array(ext_lo), _f_window(plan, ext_lo, shape)


def exact_pair_moment(plan: MomentPlan, n1: int, n2: int) -> float:
    """E_{x0}(F(S_{n1}) F(S_{n2})) for 0 <= n1 <= n2 <= horizon."""
    if not (0 <= n1 <= n2 <= plan.horizon):
        raise ConfigError("need 0 <= n1 <= n2 <= horizon")
    hist = plan.history()
    k1 = hist[n1]
    m = n2 - n1
    lo_t = [int(c) for c in k1.lo]
    hi_t = [int(c) + s - 1 for c, s in zip(k1.lo, k1.values.shape)]
    ext_lo, f_ext = _ext_window(plan, m, lo_t, hi_t)
    g1 = _g1_generic(plan, m, lo_t, k1.values.shape, f_ext, ext_lo)
    f1 = _f_window(plan, k1.lo, k1.values.shape)
    return float((k1.values * f1 * g1).sum())


def _second_moment_d1(plan: MomentPlan, n_grid):
    """E(T_N^2) for each N in n_grid, d = 1 fast path (correlate + matmul)."""
    hist = plan.history()
    N = max(n_grid)
    los = np.array([int(hist[n].lo[0]) for n in range(N + 1)])
    his = np.array([int(hist[n].lo[0]) + hist[n].values.shape[0] - 1 for n in range(N + 1)])
    ymin, ymax = int(los[1:].min()), int(his[1:].max())
    width = ymax - ymin + 1
    wlo, whi = int(los.min()), int(his.max())  # over m = 0..N, so wlo <= 0 <= whi
    ext_lo = ymin + wlo
    ext_hi = ymax + whi
    f_ext = _f_window(plan, [ext_lo], (ext_hi - ext_lo + 1,))

    g_rows = np.empty((N + 1, width))
    for m in range(N + 1):
        h = hist[m].values
        off = (ymin + int(los[m])) - ext_lo
        g_rows[m] = np.correlate(f_ext[off: off + width + h.shape[0] - 1], h, mode="valid")

    targets = sorted(set(int(n) for n in n_grid))
    second = {n: 0.0 for n in targets}
    for start in range(1, N + 1, _ROW_BLOCK):
        stop = min(start + _ROW_BLOCK, N + 1)
        a_blk = np.zeros((stop - start, width))
        for n1 in range(start, stop):
            h = hist[n1].values
            off = int(los[n1]) - ymin
            f1 = f_ext[(int(los[n1]) - ext_lo): (int(los[n1]) - ext_lo) + h.shape[0]]
            a_blk[n1 - start, off: off + h.shape[0]] = h * f1
        e_blk = a_blk @ g_rows.T  # e_blk[i, m] = E_{start+i, start+i+m}
        pref = np.cumsum(e_blk, axis=1)
        for i in range(stop - start):
            n1 = start + i
            for n in targets:
                if n >= n1:
                    second[n] += 2.0 * float(pref[i, n - n1]) - float(e_blk[i, 0])
    return second


def _second_moment_generic(plan: MomentPlan, n_grid):
    hist = plan.history()
    N = max(n_grid)
    kN = hist[N]
    lo_t = [int(c) for c in kN.lo]
    hi_t = [int(c) + s - 1 for c, s in zip(kN.lo, kN.values.shape)]
    ext_lo, f_ext = _ext_window(plan, N, lo_t, hi_t)
    targets = sorted(set(int(n) for n in n_grid))
    second = {n: 0.0 for n in targets}
    for n1 in range(1, N + 1):
        k1 = hist[n1]
        f1 = _f_window(plan, k1.lo, k1.values.shape)
        af = k1.values * f1
        lo1 = [int(c) for c in k1.lo]
        for n2 in range(n1, N + 1):
            g1 = _g1_generic(plan, n2 - n1, lo1, k1.values.shape, f_ext, ext_lo)
            e = float((af * g1).sum())
            c = 1.0 if n2 == n1 else 2.0
            for n in targets:
                if n >= n2:
                    second[n] += c * e
    return second


def exact_second_moment(plan: MomentPlan, n_grid: Optional[Sequence[int]] = None):
    """E_{x0}(T_N^2) and Var(T_N) for each N in n_grid (default: just the horizon)."""
    n_grid = [int(n) for n in (n_grid or [plan.horizon])]
    if max(n_grid) > plan.horizon or min(n_grid) < 1:
        raise ConfigError("n_grid entries must lie in [1, horizon]")
    mean = exact_mean_T(plan)
    second = (_second_moment_d1 if plan.law.d == 1 else _second_moment_generic)(plan, n_grid)
    rows = []
    for n in sorted(set(n_grid)):
        m = float(mean["cumulative"][n - 1])
        s = second[n]
        rows.append({"N": n, "mean": m, "second": s, "var": s - m * m})
    return rows


@dataclass
class VarianceScan:
    slope: float
    intercept: float
    residuals: np.ndarray
    rows: list  # (N, var)
    degenerate: bool


def variance_exponent_scan(plan: MomentPlan, n_list: Sequence[int]) -> VarianceScan:
    """Least-squares slope of log Var(T_N) against log N over a geometric grid."""
    n_list = [int(n) for n in n_list]
    if len(n_list) < 3:
        raise ConfigError("variance scan needs at least 3 horizons")
    rows = exact_second_moment(plan, n_list)
    var = np.array([r["var"] for r in rows])
    ns = np.array([r["N"] for r in rows], dtype=np.float64)
    if np.any(var <= 0):
        return VarianceScan(float("nan"), float("nan"), np.zeros(0),
                            [(r["N"], r["var"]) for r in rows], True)
    slope, intercept = np.polyfit(np.log(ns), np.log(var), 1)
    resid = np.log(var) - (slope * np.log(ns) + intercept)
    return VarianceScan(float(slope), float(intercept), resid,
                        [(r["N"], r["var"]) for r in rows], False)


def enumerate_moments(law: StepLaw, obs: Observable, n: int, x0=None,
                      pairs: Optional[Sequence] = None) -> dict:
    """Brute-force oracle: every |support|^n path, summed exactly.

    Independent of the convolution path on purpose; keep n small
    (|support|^n paths).
    """
    from itertools import product as iproduct

    if len(law.probs) ** n > 4 * 10**6:
        raise BudgetError("enumeration oracle limited to |support|^n <= 4e6 paths")
    x0 = np.array(x0 if x0 is not None else [0] * law.d, dtype=np.int64)
    sites = law.sites
    probs = law.probs
    mean = np.zeros(n + 1)
    second = np.zeros(n + 1)
    pair_vals = {tuple(p): 0.0 for p in (pairs or [])}
    for combo in iproduct(range(len(probs)), repeat=n):
        p = 1.0
        pos = x0.copy()
        path_f = []
        for k, idx in enumerate(combo):
            p *= probs[idx]
            pos = pos + sites[idx]
            path_f.append(float(obs.values(pos[None, :])[0]))
        t = 0.0
        for k, f in enumerate(path_f, start=1):
            t += f
            mean[k] += p * t
            second[k] += p * t * t
        for (a, b) in pair_vals:
            fa = path_f[a - 1] if a >= 1 else float(obs.values(x0[None, :])[0])
            fb = path_f[b - 1] if b >= 1 else float(obs.values(x0[None, :])[0])
            pair_vals[(a, b)] += p * fa * fb
    return {"mean": mean[1:], "second": second[1:],
            "var": second[1:] - mean[1:] ** 2, "pairs": pair_vals}


def derivative_table(law: StepLaw, n_list, k_max: int = 2,
                     trunc_tol: float = DEFAULT_TRUNC_TOL) -> list:
    """Diagnostic sup_x |grad^k H(n, x)| along the first axis, k = 0..k_max."""
    from .kernels import kernel_at

    rows = []
    for n in sorted(set(int(n) for n in n_list)):
        k = kernel_at(law, n, trunc_tol=trunc_tol, horizon=max(n_list))
        vals = k.values
        for kk in range(0, k_max + 1):
            arr = vals
            for _ in range(kk):
                arr = np.diff(arr, axis=0, prepend=0.0)
            rows.append((n, kk, float(np.abs(arr).max())))
    return rows
