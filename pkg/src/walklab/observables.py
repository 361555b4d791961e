"""The global-observable library.

Every observable is a bounded deterministic map Z^d -> R.  Evaluation
semantics live in one place: a small "program" encoding (kind tag plus
int/float parameter arrays) interpreted identically by the vectorized
numpy evaluator below and by the compiled walk kernels.  Observables are
immutable and safe for concurrent evaluation; the scenery kind is a
keyed stateless hash, so it needs no stored field and no locking.

Kinds: periodic, quasiperiodic, scenery, heaviside, ocean,
ocean_multidim, table.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import rng
from .errors import BudgetError, ConfigError
from .ocean import OceanSchedule

TWO_PI = 2.0 * math.pi

K_HEAVISIDE = 1
K_PERIODIC = 2
K_QUASIPERIODIC = 3
K_SCENERY = 4
K_OCEAN = 5
K_OCEAN_MD = 6
K_TABLE = 7

_MIX_MULT = 0xD1342543DE82EF95
_MIX_PHI = 0x9E3779B97F4A7C15
_MASK64 = (1 << 64) - 1

DEFAULT_CUBE_BUDGET = 1 << 26


@dataclass(frozen=True)
class ObsProgram:
    """Flat encoding of an observable for the walk kernels."""

    kind: int
    d: int
    iargs: np.ndarray  # int64
    fargs: np.ndarray  # float64


def _mix64(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return z ^ (z >> np.uint64(31))


def scenery_values(seed: int, pos: np.ndarray, v_minus: float, v_plus: float) -> np.ndarray:
    """Stateless keyed-hash field: same (seed, x) always gives the same value."""
    h = np.full(pos.shape[0], np.uint64(seed & _MASK64))
    for j in range(pos.shape[1]):
        salt = np.uint64((_MIX_PHI * (j + 1)) & _MASK64)
        h = _mix64(h ^ (pos[:, j].astype(np.uint64) * np.uint64(_MIX_MULT) + salt))
    return np.where((h >> np.uint64(63)).astype(bool), v_plus, v_minus)


def eval_program(prog: ObsProgram, pos: np.ndarray) -> np.ndarray:
    """Vectorized reference evaluator; the compiled kernels mirror it step-for-step."""
    pos = np.ascontiguousarray(pos, dtype=np.int64)
    if pos.ndim == 1:
        pos = pos[:, None]
    if pos.shape[1] != prog.d:
        raise ConfigError(f"positions have dimension {pos.shape[1]}, observable expects {prog.d}")
    ia, fa = prog.iargs, prog.fargs
    n, d = pos.shape

    if prog.kind == K_HEAVISIDE:
        return (pos[:, 0] > 0).astype(np.float64)

    if prog.kind == K_PERIODIC:
        period = ia[:d]
        shape = tuple(int(p) for p in period)
        flat = np.zeros(n, dtype=np.int64)
        stride = 1
        for j in range(d - 1, -1, -1):
            flat += (pos[:, j] % period[j]) * stride
            stride *= shape[j]
        return fa[flat]

    if prog.kind == K_QUASIPERIODIC:
        dt, nh = int(ia[0]), int(ia[1])
        m = ia[2:2 + nh * dt].reshape(nh, dt)
        omega = fa[:dt]
        rot = fa[dt:dt + d * dt].reshape(d, dt)
        amp = fa[dt + d * dt: dt + d * dt + nh]
        phase = fa[dt + d * dt + nh: dt + d * dt + 2 * nh]
        theta = np.empty((n, dt))
        for c in range(dt):
            t = np.zeros(n)
            for i in range(d):
                t = t + pos[:, i] * rot[i, c]
            t -= np.floor(t)
            theta[:, c] = omega[c] + t
        out = np.zeros(n)
        for h in range(nh):
            s = np.zeros(n)
            for c in range(dt):
                s = s + m[h, c] * theta[:, c]
            out += amp[h] * np.cos(TWO_PI * s + phase[h])
        return out

    if prog.kind == K_SCENERY:
        seed = int(ia[:1].view(np.uint64)[0])
        return scenery_values(seed, pos, fa[0], fa[1])

    if prog.kind in (K_OCEAN, K_OCEAN_MD):
        b = ia
        x0 = pos[:, 0]
        a = np.abs(x0)
        if a.size and int(a.max()) >= (int(b[-1]) if b.size else 0):
            raise BudgetError("ocean program does not cover the requested sites; rebuild via program_for")
        idx = np.searchsorted(b, a, side="right")
        val = np.where(a == 0, 0.0, np.where(idx % 2 == 0, 1.0, 0.0))
        if prog.kind == K_OCEAN_MD:
            rest = np.abs(pos[:, 1:]).max(axis=1) if d > 1 else np.zeros(n)
            val = np.where(rest <= a, val, 0.5)
        return val

    if prog.kind == K_TABLE:
        lo = ia[:d]
        shape = ia[d:2 * d]
        idx = pos - lo
        ok = np.all((idx >= 0) & (idx < shape), axis=1)
        flat = np.zeros(n, dtype=np.int64)
        stride = 1
        for j in range(d - 1, -1, -1):
            flat += idx[:, j] * stride
            stride *= int(shape[j])
        out = np.full(n, fa[0])
        out[ok] = fa[1:][flat[ok]]
        return out

    raise ConfigError(f"unknown observable program kind {prog.kind}")


@dataclass(frozen=True, eq=False)
class Observable:
    """Bounded deterministic map Z^d -> R with declared means when known."""

    kind: str
    d: int
    bound: float
    nominal_mean: Optional[float]
    program: ObsProgram
    plus_mean: Optional[float] = None   # limit of averages over [0, v]
    minus_mean: Optional[float] = None  # limit of averages over [-v, 0]
    params: dict = field(default_factory=dict)
    schedule: Optional[OceanSchedule] = None

    def values(self, pos: np.ndarray) -> np.ndarray:
        return eval_program(self.program_for_positions(pos), pos)

    def value(self, *x: int) -> float:
        return float(self.values(np.array([x], dtype=np.int64))[0])

    def program_for(self, max_abs: int) -> ObsProgram:
        """Program whose tables cover all sites with |coordinate| <= max_abs."""
        if self.schedule is None:
            return self.program
        if int(max_abs) >= (1 << 61):
            raise BudgetError(
                f"ocean evaluation at |x| ~ {float(max_abs):.3g} exceeds the int64 kernel range")
        n = self.schedule.extend_past(int(max_abs))
        b = np.array(self.schedule.b[:n], dtype=np.int64)
        return ObsProgram(self.program.kind, self.d, b, self.program.fargs)

    def program_for_positions(self, pos: np.ndarray) -> ObsProgram:
        if self.schedule is None or pos.size == 0:
            return self.program
        return self.program_for(int(np.abs(pos).max()))

    def descriptor(self) -> dict:
        return {"kind": self.kind, "d": self.d, **self.params}


# --- constructors ----------------------------------------------------------


def make_periodic(d: int, period: Sequence[int], table) -> Observable:
    """Periodic observable: F(x + period * k) = F(x); nominal mean = table mean."""
    period = [int(p) for p in period]
    if len(period) != d or any(p < 1 for p in period):
        raise ConfigError("period must list one positive integer per coordinate")
    tab = np.asarray(table, dtype=np.float64).reshape(tuple(period))
    prog = ObsProgram(K_PERIODIC, d, np.array(period, dtype=np.int64), tab.ravel().copy())
    mean = float(tab.mean())
    return Observable("periodic", d, float(np.abs(tab).max()), mean, prog,
                      plus_mean=mean if d == 1 else None,
                      minus_mean=mean if d == 1 else None,
                      params={"period": period})


_GOLDEN_FAMILY = [(math.sqrt(5.0) - 1.0) / 2.0, math.sqrt(2.0) - 1.0, math.sqrt(3.0) - 1.0,
                  math.sqrt(7.0) - 2.0, math.sqrt(11.0) - 3.0]


def make_quasiperiodic(d: int, profile="cos", rotations="golden", omega=None) -> Observable:
    """Torus-translation observable F(x) = profile(omega + sum_j x_j alpha_(j)).

    The profile is a finite trigonometric polynomial with zero constant
    term (so the infinite-volume mean is exactly 0): a list of
    (integer frequency vector, amplitude, phase) harmonics, or the name
    "cos" for the single harmonic cos(2 pi <1, theta>).  The "golden"
    rotation preset uses one badly-approximable quadratic irrational per
    axis, led by the golden mean.
    """
    if profile == "cos":
        harmonics = [(tuple([1] * d), 1.0, 0.0)]
    else:
        harmonics = [(tuple(int(c) for c in m), float(a), float(p)) for (m, a, p) in profile]
    if not harmonics:
        raise ConfigError("quasiperiodic profile needs at least one harmonic")
    if any(all(c == 0 for c in m) for m, _, _ in harmonics):
        raise ConfigError("quasiperiodic profile must have zero constant term (no m = 0 harmonic)")
    if rotations == "golden":
        if d > len(_GOLDEN_FAMILY):
            raise ConfigError(f"golden rotation preset covers d <= {len(_GOLDEN_FAMILY)}")
        rot = np.diag(_GOLDEN_FAMILY[:d]).astype(np.float64)
    else:
        rot = np.asarray(rotations, dtype=np.float64).reshape(d, d)
        warnings.warn("custom rotation vectors: Diophantine quality is only probed empirically",
                      stacklevel=2)
    dt = d
    om = np.zeros(dt) if omega is None else np.asarray(omega, dtype=np.float64).reshape(dt)
    nh = len(harmonics)
    m = np.array([m for m, _, _ in harmonics], dtype=np.int64)
    amp = np.array([a for _, a, _ in harmonics])
    phase = np.array([p for _, _, p in harmonics])
    iargs = np.concatenate(([dt, nh], m.ravel())).astype(np.int64)
    fargs = np.concatenate((om, rot.ravel(), amp, phase))
    prog = ObsProgram(K_QUASIPERIODIC, d, iargs, fargs)
    bound = float(np.abs(amp).sum())
    return Observable("quasiperiodic", d, bound, 0.0, prog,
                      plus_mean=0.0 if d == 1 else None,
                      minus_mean=0.0 if d == 1 else None,
                      params={"profile": "cos" if profile == "cos" else harmonics,
                              "rotations": "golden" if rotations == "golden" else rot.tolist(),
                              "omega": om.tolist()})


def make_scenery(d: int, seed: int, values=(-1.0, 1.0)) -> Observable:
    """IID-style +-1 field via a keyed stateless hash; pure, O(1) memory."""
    v_minus, v_plus = float(values[0]), float(values[1])
    iargs = np.array([seed & _MASK64], dtype=np.uint64).view(np.int64)
    prog = ObsProgram(K_SCENERY, d, iargs, np.array([v_minus, v_plus]))
    mean = (v_minus + v_plus) / 2.0
    return Observable("scenery", d, max(abs(v_minus), abs(v_plus)), mean, prog,
                      plus_mean=mean if d == 1 else None,
                      minus_mean=mean if d == 1 else None,
                      params={"seed": seed, "values": [v_minus, v_plus]})


def make_heaviside() -> Observable:
    """F(x) = 1 for x > 0, else 0; one-sided means (0, 1) recorded."""
    prog = ObsProgram(K_HEAVISIDE, 1, np.zeros(0, dtype=np.int64), np.zeros(0))
    return Observable("heaviside", 1, 1.0, None, prog, plus_mean=1.0, minus_mean=0.0, params={})


def make_ocean(alpha: float, b1: int = 16, a_rule: str = "log2"):
    """Counterexample observable (0/1 blocks) plus its schedule.

    F(0) = 0; on block [b_n, b_{n+1}) the value is 1 for even n, 0 for
    odd n; the initial segment 0 < |x| < b_1 takes value 1; F(-x) = F(x).
    Cube averages over [0, v] converge to 1/2 since b_{n+1}/b_n -> 1.
    """
    if alpha == 1 or not (0 < alpha <= 2):
        raise ConfigError("ocean requires the walk index alpha in (0, 2], alpha != 1")
    sched = OceanSchedule(b1=b1, a_rule=a_rule)
    sched.extend_to(8)
    b = np.array(sched.b, dtype=np.int64)
    prog = ObsProgram(K_OCEAN, 1, b, np.zeros(0))
    obs = Observable("ocean", 1, 1.0, 0.5, prog, plus_mean=0.5, minus_mean=0.5,
                     params={"alpha": alpha, "b1": b1, "a_rule": a_rule}, schedule=sched)
    return obs, sched


def make_ocean_multidim(d: int, ocean_obs: Observable) -> Observable:
    """F(x) = ocean(x_1) when |x_i| <= |x_1| for i >= 2, else 1/2."""
    if d < 2:
        raise ConfigError("ocean_multidim requires d >= 2")
    if ocean_obs.kind != "ocean":
        raise ConfigError("ocean_multidim wraps a 1-d ocean observable")
    prog = ObsProgram(K_OCEAN_MD, d, ocean_obs.program.iargs, np.zeros(0))
    return Observable("ocean_multidim", d, 1.0, 0.5, prog, plus_mean=None, minus_mean=None,
                      params={"base": ocean_obs.params}, schedule=ocean_obs.schedule)


def make_table_observable(d: int, sites, values, default: float = 0.0) -> Observable:
    """Explicit (site, value) table, `default` outside the listed window."""
    sites = np.atleast_2d(np.asarray(sites, dtype=np.int64))
    values = np.asarray(values, dtype=np.float64)
    if sites.shape[0] != values.shape[0] or sites.shape[1] != d:
        raise ConfigError("table observable needs matching (site, value) rows of dimension d")
    lo = sites.min(axis=0)
    hi = sites.max(axis=0)
    shape = tuple((hi - lo + 1).tolist())
    if np.prod(shape) > DEFAULT_CUBE_BUDGET:
        raise BudgetError("table observable window too large")
    dense = np.full(shape, default)
    for s, v in zip(sites - lo, values):
        dense[tuple(s.tolist())] = v
    iargs = np.concatenate((lo, np.array(shape))).astype(np.int64)
    fargs = np.concatenate(([default], dense.ravel()))
    prog = ObsProgram(K_TABLE, d, iargs, fargs)
    bound = float(max(np.abs(values).max(initial=0.0), abs(default)))
    return Observable("table", d, bound, None, prog, params={"n_sites": int(sites.shape[0])})


def make_constant(d: int, c: float) -> Observable:
    """Constant observable as a period-1 periodic table (handy in smoke configs)."""
    return make_periodic(d, [1] * d, [c] if d == 1 else np.full([1] * d, c))


# --- cubes and averages ----------------------------------------------------


@dataclass(frozen=True)
class CubeSpec:
    """Box z + V(a_1 L, b_1 L, ..., a_d L, b_d L) on Z^d."""

    a: tuple
    b: tuple
    L: int
    z: tuple

    def __post_init__(self):
        if len(self.a) != len(self.b) or len(self.a) != len(self.z):
            raise ConfigError("cube corner/offset tuples must share one dimension")
        if any(ai > bi for ai, bi in zip(self.a, self.b)):
            raise ConfigError("cube requires a_i <= b_i per coordinate")
        if self.L < 1:
            raise ConfigError("cube scale L must be >= 1")

    @property
    def d(self) -> int:
        return len(self.a)

    def bounds(self):
        lo = [z + a * self.L for z, a in zip(self.z, self.a)]
        hi = [z + b * self.L for z, b in zip(self.z, self.b)]
        return lo, hi

    @property
    def size(self) -> int:
        lo, hi = self.bounds()
        n = 1
        for l, h in zip(lo, hi):
            n *= (h - l + 1)
        return n


def cube(d: int, L: int, a=None, b=None, z=None) -> CubeSpec:
    return CubeSpec(tuple(a or [0] * d), tuple(b if b is not None else [1] * d),
                    int(L), tuple(z or [0] * d))


def _ocean_ones_interval(sched: OceanSchedule, lo: int, hi: int) -> int:
    """#{x in [lo, hi] : ocean F(x) = 1}, exact, O(number of blocks)."""
    if lo > hi:
        return 0
    total = 0
    pos_lo, pos_hi = max(lo, 1), hi
    if pos_lo <= pos_hi:
        total += sched.ones_upto(pos_hi) - sched.ones_upto(pos_lo - 1)
    neg_lo, neg_hi = max(1, -hi), -lo  # mirror of the negative part
    if neg_lo <= neg_hi:
        total += sched.ones_upto(neg_hi) - sched.ones_upto(neg_lo - 1)
    return total


def _periodic_cube_mean(obs: Observable, spec: CubeSpec) -> float:
    period = obs.program.iargs[:obs.d]
    tab = obs.program.fargs.reshape(tuple(int(p) for p in period))
    lo, hi = spec.bounds()
    counts = []
    for j in range(obs.d):
        p = int(period[j])
        n = hi[j] - lo[j] + 1
        base, extra = divmod(n, p)
        cnt = np.full(p, base, dtype=np.float64)
        start = lo[j] % p
        for k in range(extra):
            cnt[(start + k) % p] += 1
        counts.append(cnt)
    weight = counts[0]
    for c in counts[1:]:
        weight = np.multiply.outer(weight, c)
    return float((tab * weight).sum() / spec.size)


def cube_average(obs: Observable, spec: CubeSpec, budget: int = DEFAULT_CUBE_BUDGET) -> float:
    """Exact arithmetic mean of F over the box.

    Periodic, heaviside and 1-d ocean kinds take closed-form paths
    (O(period volume) or O(blocks)); everything else sums directly,
    guarded by the evaluation budget.
    """
    if spec.d != obs.d:
        raise ConfigError(f"cube dimension {spec.d} != observable dimension {obs.d}")
    lo, hi = spec.bounds()

    if obs.kind == "periodic":
        return _periodic_cube_mean(obs, spec)
    if obs.kind == "heaviside":
        pos = max(0, hi[0] - max(lo[0], 1) + 1)
        return pos / spec.size
    if obs.kind == "ocean":
        return _ocean_ones_interval(obs.schedule, lo[0], hi[0]) / spec.size

    if spec.size > budget:
        raise BudgetError(f"cube of |V| = {spec.size} exceeds the evaluation budget {budget}")
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
    if obs.d == 1:
        pts = axes[0][:, None]
    else:
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    return float(obs.values(pts).sum() / spec.size)


def cube_average_direct(obs: Observable, spec: CubeSpec, budget: int = DEFAULT_CUBE_BUDGET) -> float:
    """Direct-summation path regardless of kind (oracle for the closed forms)."""
    if spec.size > budget:
        raise BudgetError(f"cube of |V| = {spec.size} exceeds the evaluation budget {budget}")
    lo, hi = spec.bounds()
    axes = [np.arange(l, h + 1, dtype=np.int64) for l, h in zip(lo, hi)]
    if obs.d == 1:
        pts = axes[0][:, None]
    else:
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1)
    return float(obs.values(pts).sum() / spec.size)


# --- diagnostics -----------------------------------------------------------


def diophantine_quality(alpha, M: int, sigma: float, budget: int = DEFAULT_CUBE_BUDGET) -> float:
    """min over 0 < |m| <= M of |e^{2 pi i <m, alpha>} - 1| * |m|^sigma.

    Exhaustive scan of the integer ball; 0 for rational alpha once M
    reaches the denominator, bounded below for badly approximable alpha.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=np.float64))
    if M < 1:
        raise ConfigError("diophantine_quality requires M >= 1")
    dim = alpha.shape[0]
    if dim == 1:
        m = np.arange(1, M + 1, dtype=np.float64)  # |f(m)| = |f(-m)|
        dots = m * alpha[0]
        norms = m
    else:
        if (2 * M + 1) ** dim > budget:
            raise BudgetError("diophantine scan ball too large")
        axes = [np.arange(-M, M + 1, dtype=np.int64)] * dim
        grids = np.meshgrid(*axes, indexing="ij")
        pts = np.stack([g.ravel() for g in grids], axis=1).astype(np.float64)
        norms = np.sqrt((pts ** 2).sum(axis=1))
        keep = (norms > 0) & (norms <= M)
        pts, norms = pts[keep], norms[keep]
        dots = pts @ alpha
    dist = 2.0 * np.abs(np.sin(math.pi * dots))  # |e^{2 pi i t} - 1|
    return float((dist * norms ** sigma).min())


def sample_offsets(d: int, radius: float, count: int, seed: int, stream_index: int = 0) -> np.ndarray:
    """Uniform integer points with Euclidean |z| < max(radius, 1), rejection-sampled."""
    r = max(int(math.floor(radius)), 0)
    gen = rng.generator(seed, trial=stream_index, stream=rng.STREAM_BETA)
    if r == 0:
        return np.zeros((count, d), dtype=np.int64)
    out = np.empty((count, d), dtype=np.int64)
    got = 0
    while got < count:
        cand = gen.integers(-r, r + 1, size=(2 * count, d))
        ok = (cand.astype(np.float64) ** 2).sum(axis=1) < radius ** 2
        cand = cand[ok]
        take = min(count - got, cand.shape[0])
        out[got:got + take] = cand[:take]
        got += take
    return out


@dataclass
class BetaFit:
    beta_hat: float
    c_hat: float
    table: list  # rows (L, max deviation, samples used)
    degenerate: bool
    zero_rows_dropped: int


def beta_fit(obs: Observable, f_bar: float, gamma: float, L_list: Sequence[int],
             z_samples: int = 64, box_a=None, box_b=None, seed: int = 0,
             budget: int = DEFAULT_CUBE_BUDGET) -> BetaFit:
    """Probe membership in the rate class via err(L) = max_z |mean_{z+V(L)} F - F-bar|.

    Offsets z are sampled uniformly from |z| < L^gamma (the definition's
    "for all z" is unverifiable exhaustively; the max over a fixed-size
    sample is the honest surrogate).  Least squares of log err against
    log L gives d(beta-1), hence beta_hat; rows with err = 0 cannot
    enter the log fit and are dropped (counted).  All-zero input returns
    the -inf sentinel with the degenerate flag.
    """
    L_list = [int(L) for L in L_list]
    if any(b <= a for a, b in zip(L_list, L_list[1:])):
        raise ConfigError("L_list must be strictly increasing")
    d = obs.d
    box_a = tuple(box_a or [0] * d)
    box_b = tuple(box_b if box_b is not None else [1] * d)
    rows = []
    for i, L in enumerate(L_list):
        zs = sample_offsets(d, float(L) ** gamma, z_samples, seed, stream_index=i)
        err = 0.0
        for z in zs:
            spec = CubeSpec(box_a, box_b, L, tuple(int(c) for c in z))
            err = max(err, abs(cube_average(obs, spec, budget=budget) - f_bar))
        rows.append((L, err, z_samples))
    errs = np.array([e for (_, e, _) in rows])
    nonzero = errs > 0
    dropped = int((~nonzero).sum())
    if not nonzero.any():
        return BetaFit(float("-inf"), 0.0, rows, True, dropped)
    if nonzero.sum() < 3:
        return BetaFit(float("-inf"), 0.0, rows, True, dropped)
    x = np.log(np.array(L_list, dtype=np.float64)[nonzero])
    y = np.log(errs[nonzero])
    slope, intercept = np.polyfit(x, y, 1)
    return BetaFit(1.0 + float(slope) / d, float(math.exp(intercept)), rows, False, dropped)
