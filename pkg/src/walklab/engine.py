"""Chunked per-trial drivers and the trial-parallel runner.

Drivers own the RNG (one Philox stream per (seed, trial, stream id)) and
cut uniforms into fixed-size chunks, with extra cuts at checkpoints, so
the consumed stream is identical for every backend and thread budget.
Kernels that stop early report how many uniforms they used; the unused
tail of that chunk is discarded deterministically.

Parallelism is across trials only; results are keyed by trial index, so
assembled output is independent of completion order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import backends, rng
from .errors import ConfigError

CHUNK = 1 << 15
_FAR = (1 << 62) - 1


def resolve_threads(threads=None) -> int:
    if threads is None:
        threads = os.environ.get("WALKLAB_THREADS", "1")
    threads = int(threads)
    if threads < 1:
        raise ConfigError("thread budget must be >= 1")
    return threads


def run_indexed(fn, n: int, threads: int = 1) -> list:
    """[fn(0), ..., fn(n-1)], computed with up to `threads` workers, in index order."""
    threads = resolve_threads(threads)
    if threads == 1 or n <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=min(threads, n)) as ex:
        return list(ex.map(fn, range(n)))


def _walk_program(law, obs, n_steps, x0):
    reach = int(np.abs(np.asarray(x0)).max(initial=0)) + n_steps * max(law.support_radius, 1)
    return obs.program_for(reach)


def birkhoff_trial(law, obs, seed: int, trial: int, checkpoints, x0=None, backend=None):
    """One trial: walk to max(checkpoints), recording (n, T_n, S_n) at each checkpoint.

    Returns (records, mins, maxs); records is a list of (n, T, position copy).
    """
    be = backend or backends.get()
    checkpoints = [int(c) for c in checkpoints]
    if any(b <= a for a, b in zip(checkpoints, checkpoints[1:])) or (checkpoints and checkpoints[0] < 0):
        raise ConfigError("checkpoints must be strictly increasing and nonnegative")
    pos = np.array(x0 if x0 is not None else [0] * law.d, dtype=np.int64)
    if pos.shape != (law.d,):
        raise ConfigError("x0 must have one coordinate per walk dimension")
    prog = _walk_program(law, obs, checkpoints[-1] if checkpoints else 0, pos)
    gen = rng.generator(seed, trial, rng.STREAM_WALK)
    mins, maxs = pos.copy(), pos.copy()
    tval, done, records = 0.0, 0, []
    for cp in checkpoints:
        remaining = cp - done
        while remaining > 0:
            take = min(CHUNK, remaining)
            pos, tval, mins, maxs = be.birkhoff_chunk(
                law.sites, law.cdf, prog, pos, tval, mins, maxs, gen.random(take))
            remaining -= take
        done = cp
        records.append((cp, tval, np.asarray(pos).copy()))
    return records, np.asarray(mins).copy(), np.asarray(maxs).copy()


def path_trial(law, seed: int, trial: int, n_steps: int, obs=None, x0=None):
    """Positions S_1..S_n as an (n, d) array (always the numpy kernels; positions
    are exact integers, so this matches the compiled backend bit for bit)."""
    from .backends import pycore
    from .observables import make_constant

    obs = obs or make_constant(law.d, 0.0)
    pos = np.array(x0 if x0 is not None else [0] * law.d, dtype=np.int64)
    prog = _walk_program(law, obs, n_steps, pos)
    gen = rng.generator(seed, trial, rng.STREAM_WALK)
    mins, maxs = pos.copy(), pos.copy()
    tval, out, remaining = 0.0, [], n_steps
    while remaining > 0:
        take = min(CHUNK, remaining)
        pos, tval, mins, maxs, path = pycore.birkhoff_chunk_path(
            law.sites, law.cdf, prog, pos, tval, mins, maxs, gen.random(take))
        out.append(path)
        remaining -= take
    empty = np.zeros((0, law.d), dtype=np.int64)
    return (np.concatenate(out, axis=0) if out else empty), tval, mins, maxs


def occupation_trial(law, obs, seed: int, trial: int, checkpoints, stop_above: int,
                     tally_lo: int, backend=None, stream: int = rng.STREAM_WALK):
    """1-d drift-walk trial with visit tallies.

    Phase A walks to the last step checkpoint with no early exit (T_n at a
    checkpoint must see every step); phase B keeps walking until the walk
    escapes above `stop_above`.  Returns (tally, below, above, n_steps,
    records, final_x, tval).
    """
    be = backend or backends.get()
    if law.d != 1:
        raise ConfigError("occupation runs are defined for d = 1")
    checkpoints = [int(c) for c in checkpoints]
    tally = np.zeros(int(stop_above) - int(tally_lo) + 1, dtype=np.int64)
    gen = rng.generator(seed, trial, stream)
    # phase-A positions stay within cp_max * radius; phase-B ones within stop_above + radius
    radius = max(law.support_radius, 1)
    reach = max(max(checkpoints, default=0) * radius, int(stop_above) + radius, abs(int(tally_lo))) + 1
    prog = obs.program_for(reach)
    x, tval, below, above, n_steps = 0, 0.0, 0, 0, 0
    records = []
    for cp in checkpoints:
        remaining = cp - n_steps
        while remaining > 0:
            take = min(CHUNK, remaining)
            x, tval, b, a, used, _ = be.occupation_chunk(
                law.sites1d, law.cdf, prog, x, tval, tally, tally_lo, _FAR, gen.random(take))
            below += b
            above += a
            n_steps += used
            remaining -= used
        records.append((cp, tval, x))
    escaped = x > stop_above
    while not escaped:
        x, tval, b, a, used, escaped = be.occupation_chunk(
            law.sites1d, law.cdf, prog, x, tval, tally, tally_lo, stop_above, gen.random(CHUNK))
        below += b
        above += a
        n_steps += used
    return tally, below, above, n_steps, records, x, tval


def min_tail_trial(law, seed: int, trial: int, m: int, stop_above: int, backend=None) -> bool:
    """True iff the walk reaches min <= -m before escaping above stop_above."""
    be = backend or backends.get()
    gen = rng.generator(seed, trial, rng.STREAM_MINTAIL)
    x, status = 0, 0
    while status == 0:
        x, _, status = be.min_tail_chunk(law.sites1d, law.cdf, x, -int(m), int(stop_above),
                                         gen.random(CHUNK))
    return status == 1


def pair_visits_trial(law, seed: int, trial: int, n1: int, n2: int, stop_above: int,
                      backend=None) -> np.ndarray:
    """Visit-epoch counters for sites n1 < n2: [l1, l2, c11, c12, c21, c22, last, first]."""
    be = backend or backends.get()
    gen = rng.generator(seed, trial, rng.STREAM_PAIR)
    counts = np.zeros(8, dtype=np.int64)
    x, escaped = 0, False
    while not escaped:
        x, _, escaped = be.pair_visits_chunk(law.sites1d, law.cdf, x, int(n1), int(n2),
                                             int(stop_above), counts, gen.random(CHUNK))
    return counts
