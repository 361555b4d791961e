"""Pure-numpy walk kernels (fallback backend).

Per-step semantics shared with the compiled backend, in this exact order:

  1. site index = searchsorted(cdf, u, side="right"), clamped to the table;
  2. position += site;
  3. (occupation kernels) tally the landing site;
  4. T += F(position);
  5. check stop conditions (hit before escape).

T accumulates strictly sequentially (ufunc accumulate is a left fold),
so integer-valued observables give bit-identical sums across backends.
Early-stopping kernels report how many uniforms they consumed; the
driver discards the rest of the chunk, which keeps streams aligned
between backends because positions are exact integers.
"""

from __future__ import annotations

import numpy as np

from ..observables import eval_program

NAME = "python"


def _indices(cdf: np.ndarray, u: np.ndarray) -> np.ndarray:
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(cdf) - 1)


def _seq_sum(t0: float, fv: np.ndarray) -> float:
    return float(np.add.accumulate(np.concatenate(([t0], fv)))[-1])


def birkhoff_chunk(sites, cdf, prog, pos, tval, mins, maxs, u):
    """Advance one chunk; returns (pos, tval, mins, maxs)."""
    steps = sites[_indices(cdf, u)]
    path = pos[None, :] + np.cumsum(steps, axis=0)
    tval = _seq_sum(tval, eval_program(prog, path))
    np.minimum(mins, path.min(axis=0), out=mins)
    np.maximum(maxs, path.max(axis=0), out=maxs)
    return path[-1].copy(), tval, mins, maxs


def birkhoff_chunk_path(sites, cdf, prog, pos, tval, mins, maxs, u):
    """Like birkhoff_chunk but also returns the chunk's positions (n, d)."""
    steps = sites[_indices(cdf, u)]
    path = pos[None, :] + np.cumsum(steps, axis=0)
    tval = _seq_sum(tval, eval_program(prog, path))
    np.minimum(mins, path.min(axis=0), out=mins)
    np.maximum(maxs, path.max(axis=0), out=maxs)
    return path[-1].copy(), tval, mins, maxs, path


def occupation_chunk(sites1, cdf, prog, x, tval, tally, tally_lo, stop_above, u):
    """1-d chunk with visit tallies; stops after the step that exceeds stop_above.

    Returns (x, tval, below, above, used, escaped).  Every landing is
    counted (in the tally window, or in below/above), so the tally total
    plus overflow counters always equals the number of steps taken.
    """
    path = x + np.cumsum(sites1[_indices(cdf, u)])
    esc = np.nonzero(path > stop_above)[0]
    used = int(esc[0]) + 1 if esc.size else len(path)
    path = path[:used]
    rel = path - tally_lo
    inwin = (rel >= 0) & (rel < len(tally))
    np.add.at(tally, rel[inwin], 1)
    below = int((rel < 0).sum())
    above = int((rel >= len(tally)).sum())
    tval = _seq_sum(tval, eval_program(prog, path[:, None]))
    return int(path[-1]), tval, below, above, used, bool(esc.size)


def min_tail_chunk(sites1, cdf, x, neg_m, stop_above, u):
    """Walk until x <= neg_m (status 1) or x > stop_above (status 2).

    Returns (x, used, status); status 0 means the chunk ran out first.
    """
    path = x + np.cumsum(sites1[_indices(cdf, u)])
    hit = np.nonzero(path <= neg_m)[0]
    esc = np.nonzero(path > stop_above)[0]
    ih = int(hit[0]) if hit.size else len(path)
    ie = int(esc[0]) if esc.size else len(path)
    if ih >= len(path) and ie >= len(path):
        return int(path[-1]), len(path), 0
    if ih <= ie:
        return int(path[ih]), ih + 1, 1
    return int(path[ie]), ie + 1, 2


def pair_visits_chunk(sites1, cdf, x, n1, n2, stop_above, counts, u):
    """Track visit epochs at sites n1 < n2 until escape.

    counts (int64[8], mutated): l1, l2, c11, c12, c21, c22, last, first
    where last/first are 0 (none), 1, or 2.  Returns (x, used, escaped).
    """
    path = x + np.cumsum(sites1[_indices(cdf, u)])
    esc = np.nonzero(path > stop_above)[0]
    used = int(esc[0]) + 1 if esc.size else len(path)
    path = path[:used]
    v1 = path == n1
    v2 = path == n2
    sel = np.nonzero(v1 | v2)[0]
    if sel.size:
        s = np.where(v1[sel], 1, 2).astype(np.int64)
        counts[0] += int((s == 1).sum())
        counts[1] += int((s == 2).sum())
        prev = np.concatenate(([counts[6]], s[:-1]))
        for a, b, slot in ((1, 1, 2), (1, 2, 3), (2, 1, 4), (2, 2, 5)):
            counts[slot] += int(((prev == a) & (s == b)).sum())
        if counts[7] == 0:
            counts[7] = int(s[0])
        counts[6] = int(s[-1])
    return int(path[-1]), used, bool(esc.size)
