"""Block schedule for the counterexample observable.

The schedule is the integer skeleton behind the alternating 0/1 block
function: a slowly increasing sequence a_n (unit increments), block
endpoints b_{n+1} = b_n + floor(b_n / a_n), block centers c_n =
(b_n + b_{n+1})/2, event times t_n = floor(c_n^alpha) and confinement
intervals I_n of half-width floor(b_n / 4 a_n) around c_n.

Everything is exact Python-int arithmetic (c_n is kept as twice its
value to stay integral; t_n is exact for alpha = 2 and float-evaluated
otherwise).  Every generated prefix satisfies

    a_n - a_{n-1} in {0, 1},   a_n <= n < b_n < b_{n+1} <= b_1 * 2^n,

which is asserted on materialization.  The textbook dyadic bound
b_n < 2^(n+1) requires b_1 < 4 as its induction base, so with the
required b_1 >= 16 it only holds from some finite index onward
(`dyadic_holds_from`, = 6 for b_1 = 16); once it holds it holds for
every later n because the ratio b_{n+1}/b_n <= 2.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field

from .errors import BudgetError, ConfigError

_INT63 = 1 << 62  # evaluation guard: sites beyond this overflow the int64 kernels


def a_rule_log2(n: int, prev: int) -> int:
    """Default a-sequence: 1 + floor(log2(n+1)), clamped to unit increments and a_n <= n."""
    return min(prev + 1, n, 1 + int(math.log2(n + 1)))


_A_RULES = {"log2": a_rule_log2}


@dataclass
class OceanSchedule:
    """Materialized-on-demand block schedule; grow-only, idempotent."""

    b1: int = 16
    a_rule: str = "log2"
    a: list = field(default_factory=list)  # a[n-1] = a_n
    b: list = field(default_factory=list)  # b[n-1] = b_n

    def __post_init__(self):
        if self.b1 < 16:
            raise ConfigError("ocean schedule requires b1 >= 16 (the construction needs b1 >> 1)")
        if self.a_rule not in _A_RULES:
            raise ConfigError(f"unknown a_rule {self.a_rule!r}; choose from {sorted(_A_RULES)}")
        if not self.b:
            self.a = [1]
            self.b = [self.b1]

    def _check(self, n: int) -> None:
        a_n, b_n = self.a[n - 1], self.b[n - 1]
        ok = a_n <= n < b_n and b_n <= self.b1 * 2 ** (n - 1)
        if n >= 2:
            ok = ok and (a_n - self.a[n - 2]) in (0, 1) and self.b[n - 2] < b_n
        if not ok:
            raise AssertionError(f"schedule bounds violated at n={n}: a={a_n}, b={b_n}")

    def extend_to(self, n: int) -> None:
        """Materialize a_1..a_n, b_1..b_n (no-op if already long enough)."""
        rule = _A_RULES[self.a_rule]
        while len(self.b) < n:
            m = len(self.b) + 1  # index of the entry being appended
            self.a.append(rule(m, self.a[-1]))
            self.b.append(self.b[-1] + self.b[-1] // self.a[m - 2])
            self._check(m)

    def extend_past(self, x: int) -> int:
        """Materialize until some b_n > x; returns the smallest such n."""
        while self.b[-1] <= x:
            self.extend_to(len(self.b) + 1)
        return bisect.bisect_right(self.b, x) + 1

    def b_n(self, n: int) -> int:
        self.extend_to(n)
        return self.b[n - 1]

    def a_n(self, n: int) -> int:
        self.extend_to(n)
        return self.a[n - 1]

    def dyadic_holds_from(self, n_max: int) -> int:
        """Smallest n0 with b_n < 2^(n+1) for all n0 <= n <= n_max (-1 if none).

        Once true it stays true (b at most doubles per block), so n0 is
        stable under further materialization.
        """
        self.extend_to(n_max)
        n0 = -1
        for n in range(n_max, 0, -1):
            if self.b[n - 1] < 2 ** (n + 1):
                n0 = n
            else:
                break
        return n0

    def c2_n(self, n: int) -> int:
        """Twice the block center c_n = (b_n + b_{n+1})/2, kept integral."""
        self.extend_to(n + 1)
        return self.b[n - 1] + self.b[n]

    def t_n(self, n: int, alpha: float) -> int:
        """Event time floor(c_n^alpha); exact for alpha = 2."""
        c2 = self.c2_n(n)
        if alpha == 2.0:
            t = (c2 * c2) // 4
        else:
            t = math.floor((c2 / 2.0) ** alpha)
        if t >= _INT63:
            raise BudgetError(f"t_n at n={n} exceeds the integer range")
        return t

    def half_width(self, n: int) -> int:
        """Half-width floor(b_n / 4 a_n) of the confinement interval I_n."""
        self.extend_to(n)
        return self.b[n - 1] // (4 * self.a[n - 1])

    def interval2(self, n: int) -> tuple:
        """I_n as (2*lo, 2*hi): site x belongs to I_n iff 2x in [2c-2w, 2c+2w]."""
        c2 = self.c2_n(n)
        w = self.half_width(n)
        return (c2 - 2 * w, c2 + 2 * w)

    # --- block values and exact partial sums -------------------------------

    def block_value(self, n: int) -> int:
        """Value of F on [b_n, b_{n+1}): 1 for even n, 0 for odd n."""
        return 1 if n % 2 == 0 else 0

    def ones_upto(self, v: int) -> int:
        """Number of sites x in [1, v] with F(x) = 1, by closed-form block sums."""
        if v <= 0:
            return 0
        self.extend_past(v)
        # initial segment [1, b_1) carries value 1 (virtual even block 0)
        total = min(v, self.b[0] - 1)
        n = 1
        while self.b[n - 1] <= v:
            lo = self.b[n - 1]
            hi = min(v + 1, self.b_n(n + 1))
            if self.block_value(n):
                total += hi - lo
            n += 1
        return total

    def mean_zero_to(self, v: int) -> float:
        """Exact cube average of F over [0, v] (F(0) = 0)."""
        if v < 0:
            raise ConfigError("mean_zero_to expects v >= 0")
        return self.ones_upto(v) / (v + 1)

    def trace(self, n_blocks: int) -> list:
        """Rows (n, b_n, mean over [0, b_n]) of the cube-average convergence trace."""
        self.extend_to(n_blocks)
        return [(n, self.b[n - 1], self.mean_zero_to(self.b[n - 1])) for n in range(1, n_blocks + 1)]

    def oscillation_settled(self, n_blocks: int, tol: float = 0.05) -> int:
        """Smallest n0 with |mean([0, b_n]) - 1/2| < tol for all n0 <= n <= n_blocks; -1 if none."""
        means = [m for (_, _, m) in self.trace(n_blocks)]
        n0 = -1
        for n in range(n_blocks, 0, -1):
            if abs(means[n - 1] - 0.5) < tol:
                n0 = n
            else:
                break
        return n0
