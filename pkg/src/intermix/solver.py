"""Solver for the rank-deficient system (cI - a 1^T) x = b with c = sum(a).

The matrix has rank k-1 and its null space is spanned by ``a`` itself, so the
general solution is ``x_p + lam * a`` where ``x_p`` is the particular solution
with its last coordinate fixed at zero. Requiring x >= 0 with at least one zero
coordinate pins ``lam`` down; we try each coordinate as the forced zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cbn import Prob
from .errors import Degenerate, Inconsistent

#: relative tolerance on c == sum(a) for float systems
FLOAT_SUM_TOL = 1e-9
#: float coordinates down to -NONNEG_TOL * c count as zero in solve_exact
NONNEG_TOL = 1e-9
#: float coordinates with magnitude at or below this are rounding residue, read as 0
FLOAT_ZERO_TOL = 1e-12


def _exact(xs) -> bool:
    return all(isinstance(x, (Fraction, int)) for x in xs)


@dataclass(frozen=True)
class StructuredSystem:
    a: tuple
    b: tuple
    c: Prob

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(self.a))
        object.__setattr__(self, "b", tuple(self.b))
        if len(self.a) != len(self.b) or not self.a:
            raise Degenerate("a and b must be non-empty and of equal length")

    @classmethod
    def from_ab(cls, a: Sequence[Prob], b: Sequence[Prob]) -> "StructuredSystem":
        return cls(tuple(a), tuple(b), sum(a, 0))

    @property
    def k(self) -> int:
        return len(self.a)

    @property
    def is_exact(self) -> bool:
        return _exact(self.a) and _exact(self.b) and _exact([self.c])

    def check(self):
        if any(not aj > 0 for aj in self.a) or not self.c > 0:
            raise Degenerate(f"coefficients must be positive: a={self.a}, c={self.c}")
        s = sum(self.a, 0)
        if self.is_exact:
            if s != self.c:
                raise Degenerate(f"c={self.c} differs from sum(a)={s}")
        elif abs(s - self.c) > FLOAT_SUM_TOL * self.c:
            raise Degenerate(f"c={self.c} differs from sum(a)={s}")

    def matrix(self) -> list[list[Prob]]:
        k = self.k
        return [[(self.c if i == j else 0) - self.a[i] for j in range(k)] for i in range(k)]

    def apply(self, x: Sequence[Prob]) -> list[Prob]:
        s = sum(x, 0)
        return [self.c * xi - ai * s for xi, ai in zip(x, self.a)]

    def residual(self, x: Sequence[Prob]) -> Prob:
        return sum(((ax - bi) ** 2 for ax, bi in zip(self.apply(x), self.b)), 0)


@dataclass(frozen=True)
class ConstrainedSolution:
    x: tuple
    zero_index: int
    residual: Prob


def particular_solution(sys: StructuredSystem) -> list[Prob]:
    """Solution of the row-reduced system with the last coordinate set to 0.

    After R_i <- R_i - (a_i/a_k) R_k the first k-1 rows read
    c x_i - (a_i/a_k) c x_k = b_i - (a_i/a_k) b_k.
    """
    a, b, c = sys.a, sys.b, sys.c
    ak, bk = a[-1], b[-1]
    return [(b[i] - a[i] * bk / ak) / c for i in range(sys.k - 1)] + [0 * bk]


def candidates(sys: StructuredSystem) -> list[list[Prob]]:
    """For each coordinate z, the null-space shift of x_p making x_z = 0."""
    xp = particular_solution(sys)
    out = []
    for z in range(sys.k):
        lam = -xp[z] / sys.a[z]
        x = [xi + lam * ai for xi, ai in zip(xp, sys.a)]
        x[z] = 0 * x[z]
        out.append(x)
    return out


def _clamp(x: list, exact: bool) -> list:
    floor = 0 if exact else FLOAT_ZERO_TOL
    return [xi if xi > floor else 0 * xi for xi in x]


def solve_exact(sys: StructuredSystem) -> ConstrainedSolution:
    sys.check()
    exact = sys.is_exact
    tol = 0 if exact else NONNEG_TOL * sys.c
    for z, x in enumerate(candidates(sys)):
        if all(xi >= -tol for xi in x):
            if not exact:
                x = _clamp(x, False)
            r = sys.residual(x)
            if exact and r != 0:
                raise Inconsistent(f"system has no solution (residual {r})")
            return ConstrainedSolution(tuple(x), z, r)
    raise Inconsistent("no zero-constrained candidate is non-negative")


def solve_scored(sys: StructuredSystem) -> ConstrainedSolution:
    """Clamp each candidate at zero and keep the one with least squared residual."""
    sys.check()
    exact = sys.is_exact
    best = None
    for z, x in enumerate(candidates(sys)):
        x = _clamp(x, exact)
        r = sys.residual(x)
        if best is None or r < best.residual:
            best = ConstrainedSolution(tuple(x), z, r)
    return best
