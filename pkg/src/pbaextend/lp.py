"""Exact two-phase simplex with Bland's rule.

Solves ``min c.x`` subject to ``A_eq x = b_eq``, ``A_ub x <= b_ub`` and
``x >= 0``.  Arithmetic is done in ``gmpy2.mpq`` (float inputs are
converted exactly), so every verdict is a statement about the given numbers.
When phase 1 ends with a positive residual the duals of the artificial
columns give a Farkas vector ``y`` with ``y.A <= 0`` on every column and
``y.b > 0``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from gmpy2 import mpq

_ZERO = mpq(0)
_ONE = mpq(1)


def to_q(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def from_q(q) -> Fraction:
    return Fraction(int(q.numerator), int(q.denominator))


@dataclass
class LPResult:
    status: str  # "optimal", "infeasible" or "unbounded"
    x: list | None = None
    value: Fraction | None = None
    farkas: list | None = None
    # L1 distance of phase 1 from feasibility (0 when feasible)
    residual: Fraction = Fraction(0)
    pivots: int = field(default=0, repr=False)

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"


class _Tableau:
    def __init__(self, rows, rhs, basis):
        self.rows = rows
        self.rhs = rhs
        self.basis = basis
        self.pivots = 0

    def pivot(self, r: int, j: int, cost: list, obj: list) -> None:
        row = self.rows[r]
        inv = _ONE / row[j]
        row = [v * inv for v in row]
        self.rows[r] = row
        self.rhs[r] *= inv
        nz = [t for t, v in enumerate(row) if v]
        for i, other in enumerate(self.rows):
            if i == r:
                continue
            f = other[j]
            if f:
                for t in nz:
                    other[t] -= f * row[t]
                self.rhs[i] -= f * self.rhs[r]
        f = cost[j]
        if f:
            for t in nz:
                cost[t] -= f * row[t]
            obj[0] -= f * self.rhs[r]
        self.basis[r] = j
        self.pivots += 1

    def run(self, cost: list, obj: list, allowed: int) -> str:
        """Bland-rule iterations on columns ``< allowed``; obj holds ``-z``."""
        while True:
            j = next((t for t in range(allowed) if cost[t] < 0), None)
            if j is None:
                return "optimal"
            best, r = None, None
            for i, row in enumerate(self.rows):
                a = row[j]
                if a > 0:
                    ratio = self.rhs[i] / a
                    if best is None or ratio < best or (ratio == best and self.basis[i] < self.basis[r]):
                        best, r = ratio, i
            if r is None:
                return "unbounded"
            self.pivot(r, j, cost, obj)


def solve_lp(
    c: Sequence | None,
    A_eq: Sequence[Sequence] = (),
    b_eq: Sequence = (),
    A_ub: Sequence[Sequence] = (),
    b_ub: Sequence = (),
    n: int | None = None,
) -> LPResult:
    """Minimize ``c.x``; ``c=None`` only tests feasibility.

    The Farkas vector, when present, is indexed by ``A_ub`` rows followed by
    ``A_eq`` rows; on ``A_ub`` rows its entries are ``<= 0``.
    """
    if n is None:
        n = len(c) if c is not None else len((list(A_eq) + list(A_ub))[0])
    m_ub, m_eq = len(A_ub), len(A_eq)
    m = m_ub + m_eq
    nvar = n + m_ub
    rows, rhs, sign = [], [], []
    for i, (a, b) in enumerate(list(zip(A_ub, b_ub)) + list(zip(A_eq, b_eq))):
        row = [to_q(v) for v in a] + [_ZERO] * m_ub
        if i < m_ub:
            row[n + i] = _ONE
        b = to_q(b)
        s = -1 if b < 0 else 1
        if s < 0:
            row = [-v for v in row]
            b = -b
        row += [_ZERO] * m
        row[nvar + i] = _ONE
        rows.append(row)
        rhs.append(b)
        sign.append(s)
    width = nvar + m
    tab = _Tableau(rows, rhs, [nvar + i for i in range(m)])

    # phase 1: minimize the sum of artificials
    cost = [_ZERO] * width
    for row in rows:
        for t in range(nvar):
            cost[t] -= row[t]
    obj = [-sum(rhs, _ZERO)]
    tab.run(cost, obj, nvar)
    residual = -obj[0]
    if residual > 0:
        y = [from_q((_ONE - cost[nvar + i]) * sign[i]) for i in range(m)]
        return LPResult("infeasible", farkas=y, residual=from_q(residual), pivots=tab.pivots)

    # drive zero-level artificials out of the basis, dropping redundant rows
    i = 0
    while i < len(tab.rows):
        if tab.basis[i] >= nvar:
            j = next((t for t in range(nvar) if tab.rows[i][t]), None)
            if j is None:
                del tab.rows[i], tab.rhs[i], tab.basis[i]
                continue
            tab.pivot(i, j, cost, obj)
        i += 1

    x = [_ZERO] * nvar
    if c is None:
        for r, j in enumerate(tab.basis):
            x[j] = tab.rhs[r]
        return LPResult("optimal", x=[from_q(v) for v in x[:n]], value=Fraction(0), pivots=tab.pivots)

    cq = [to_q(v) for v in c] + [_ZERO] * (width - n)
    cost = list(cq)
    obj = [_ZERO]
    for r, j in enumerate(tab.basis):
        f = cq[j]
        if f:
            row = tab.rows[r]
            for t in range(width):
                cost[t] -= f * row[t]
            obj[0] -= f * tab.rhs[r]
    status = tab.run(cost, obj, nvar)
    if status == "unbounded":
        return LPResult("unbounded", pivots=tab.pivots)
    for r, j in enumerate(tab.basis):
        x[j] = tab.rhs[r]
    return LPResult("optimal", x=[from_q(v) for v in x[:n]], value=from_q(-obj[0]), pivots=tab.pivots)


def minimize(c, A_eq, b_eq, **kw) -> LPResult:
    return solve_lp(c, A_eq, b_eq, **kw)


def maximize(c, A_eq, b_eq, **kw) -> LPResult:
    res = solve_lp([-to_q(v) for v in c], A_eq, b_eq, **kw)
    if res.status == "optimal":
        res.value = -res.value
    return res


__all__ = ["LPResult", "solve_lp", "minimize", "maximize", "to_q", "from_q"]
