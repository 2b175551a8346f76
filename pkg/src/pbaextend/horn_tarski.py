"""Partial measures on subsets of a finite Boolean algebra and their extension.

Sequences are compared with the preorder ``<A_0..A_{m-1}> <= <B_0..B_{n-1}>``:
for every ``k < m`` the points covered by at least ``k+1`` of the ``A``'s are
covered by at least ``k+1`` of the ``B``'s.  On a finite algebra this is the
same as a pointwise comparison of atom multiplicities, which is what the
vectorized searches below use; :func:`seq_leq` keeps the union-of-intersections
form so the two can be checked against each other.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce
from itertools import combinations, combinations_with_replacement
from math import lcm
from typing import Iterable, Mapping, Sequence

import numpy as np

from .boolean_core import Element, Measure, intersection_element
from .errors import ArityMismatch, NotExtensible, NotPartialMeasure, ValueOutOfBand
from .lp import solve_lp
from .scalars import FLOAT_TOL, is_exact

DEFAULT_MAX_LEN = 4
_CHUNK = 512


@dataclass(frozen=True)
class ElementSequence:
    items: tuple

    def __post_init__(self):
        items = tuple(self.items)
        if not items:
            raise ValueError("element sequences are nonempty")
        if len({e.arity for e in items}) != 1:
            raise ArityMismatch("sequence elements must share one arity")
        object.__setattr__(self, "items", items)

    @property
    def arity(self) -> int:
        return self.items[0].arity

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self):
        return iter(self.items)


def _level_sets(seq: Sequence[Element], k: int) -> Element:
    """Union over index sets of size ``k+1`` of the intersection of those elements."""
    arity = seq[0].arity
    out = Element.zero(arity)
    for r in combinations(range(len(seq)), k + 1):
        out = out | reduce(lambda x, y: x & y, (seq[i] for i in r))
    return out


def seq_leq(a: ElementSequence | Sequence[Element], b: ElementSequence | Sequence[Element]) -> bool:
    a, b = tuple(a), tuple(b)
    if a and b and a[0].arity != b[0].arity:
        raise ArityMismatch("sequences live in algebras of different arity")
    if not b:
        return all(not x for x in a)
    return all(_level_sets(a, k) <= _level_sets(b, k) for k in range(len(a)))


def multiplicity(seq: Iterable[Element], arity: int) -> list[int]:
    """Number of sequence elements containing each atom."""
    counts = [0] * (1 << arity)
    for e in seq:
        for a in e.atoms():
            counts[a] += 1
    return counts


# --- partial functions --------------------------------------------------------------


@dataclass(frozen=True)
class PartialFunction:
    arity: int
    values: Mapping = field(hash=False)

    def __post_init__(self):
        vals = dict(self.values)
        for e, v in vals.items():
            if e.arity != self.arity:
                raise ArityMismatch("domain elements must share the function's arity")
            if v < 0:
                raise NotPartialMeasure(f"negative value {v} at {e}")
        one = Element.one(self.arity)
        if one not in vals:
            raise NotPartialMeasure("the unit must belong to the domain")
        if vals[one] != 1 and not (not is_exact(vals[one]) and abs(vals[one] - 1) <= FLOAT_TOL):
            raise NotPartialMeasure("the unit must have value 1")
        object.__setattr__(self, "values", vals)

    @property
    def domain(self) -> list[Element]:
        return sorted(self.values, key=lambda e: e.mask)

    @property
    def exact(self) -> bool:
        return all(is_exact(v) for v in self.values.values())

    def __call__(self, e: Element):
        return self.values[e]

    def with_value(self, e: Element, v) -> PartialFunction:
        vals = dict(self.values)
        vals[e] = v
        return PartialFunction(self.arity, vals)

    @classmethod
    def restrict_measure(cls, m: Measure, domain: Iterable[Element]) -> PartialFunction:
        dom = set(domain) | {Element.one(m.arity)}
        return cls(m.arity, {e: m(e) for e in dom})

    @classmethod
    def from_correlations(cls, spec, p: Sequence) -> PartialFunction:
        """Values ``p`` on the intersections of ``spec``'s monomials, plus the unit."""
        vals = {Element.one(spec.n): Fraction(1) if all(is_exact(v) for v in p) else 1.0}
        for s, v in zip(spec.monomials, p):
            vals[intersection_element(s, spec.n)] = v
        return cls(spec.n, vals)


def is_subalgebra(domain: Iterable[Element]) -> bool:
    s = set(domain)
    if not s:
        return False
    return all(~x in s for x in s) and all(x & y in s for x in s for y in s)


# --- vectorized multiset tables -----------------------------------------------------------


def _scaled(values: Sequence) -> tuple[list, object]:
    """Integer (exact) or float images of ``values`` plus the common scale."""
    if all(is_exact(v) for v in values):
        fr = [Fraction(v) for v in values]
        scale = lcm(*(x.denominator for x in fr)) if fr else 1
        return [int(x * scale) for x in fr], scale
    return [float(v) for v in values], 1


def _table(elems: Sequence[Element], vals: Sequence, arity: int, sizes: Iterable[int]):
    """Atom multiplicities, value sums and index tuples of all multisets with the given sizes."""
    atoms = 1 << arity
    masks = np.array([[(e.mask >> a) & 1 for a in range(atoms)] for e in elems], dtype=np.int16).reshape(len(elems), atoms)
    combos = [c for size in sizes for c in combinations_with_replacement(range(len(elems)), size)]
    counts = np.zeros((len(combos), atoms), dtype=np.int16)
    exact = isinstance(vals[0], int) if vals else True
    dtype = object if exact and max((abs(v) for v in vals), default=0) > 2**55 else (np.int64 if exact else float)
    sums = np.zeros(len(combos), dtype=dtype)
    v = np.array(vals, dtype=dtype)
    for i, c in enumerate(combos):
        if c:
            counts[i] = masks[list(c)].sum(axis=0)
            sums[i] = v[list(c)].sum()
    return counts, sums, combos


def _dominated(lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Boolean matrix ``[i, j]``: ``lo[i] <= hi[j]`` pointwise."""
    return np.all(lo[:, None, :] <= hi[None, :, :], axis=2)


@dataclass
class Verdict:
    passed: bool
    max_len: int
    witness: tuple | None = None  # (A sequence, B sequence, sum f(A), sum f(B))

    @property
    def bounded(self) -> bool:
        return self.passed

    def __str__(self) -> str:
        if self.passed:
            return f"PassBounded(max_len={self.max_len})"
        a, b, fa, fb = self.witness
        return f"Fail: {a} <= {b} but {fa} > {fb}"


def is_partial_measure(f: PartialFunction, max_len: int = DEFAULT_MAX_LEN, tol: float | None = None) -> Verdict:
    """Check the sequence inequality for all multiset pairs of length at most ``max_len``."""
    if max_len < 1:
        raise ValueError("max_len must be at least 1")
    elems = f.domain
    raw = [f(e) for e in elems]
    vals, scale = _scaled(raw)
    if tol is None:
        tol = 0 if f.exact else FLOAT_TOL
    counts, sums, combos = _table(elems, vals, f.arity, range(0, max_len + 1))
    # A-side: nonempty sequences only; B-side may be empty
    for start in range(1, len(combos), _CHUNK):
        sl = slice(start, min(start + _CHUNK, len(combos)))
        dom = _dominated(counts[sl], counts)
        bad = dom & (sums[sl][:, None] > sums[None, :] + tol * scale)
        if bad.any():
            i, j = np.argwhere(bad)[0]
            a = tuple(elems[t] for t in combos[start + i])
            b = tuple(elems[t] for t in combos[j])
            return Verdict(False, max_len, (a, b, sum(f(x) for x in a), sum((f(x) for x in b), 0 * raw[0])))
    return Verdict(True, max_len)


# --- interior and exterior measures ------------------------------------------------------------


@dataclass
class Band:
    lower: object
    upper: object
    exact: bool  # False when obtained from the bounded sequence search
    method: str = ""

    def __iter__(self):
        return iter((self.lower, self.upper))

    @property
    def midpoint(self):
        return (self.lower + self.upper) / 2

    def contains(self, v, tol=0) -> bool:
        return self.lower - tol <= v <= self.upper + tol


def _subalgebra_band(f: PartialFunction, x: Element) -> Band:
    below = [f(y) for y in f.values if y <= x]
    above = [f(y) for y in f.values if x <= y]
    return Band(max(below), min(above), True, "subalgebra")


def _ratio(v, d, exact):
    return Fraction(int(v), d) if exact else float(v) / d


def _search_band(f: PartialFunction, x: Element, max_len: int) -> Band:
    """Bracketing band from the xi-form bounds over sequences of length at most ``max_len``.

    The returned lower bound is at most the true interior measure and the
    upper bound at least the true exterior measure.
    """
    elems = f.domain
    vals, scale = _scaled([f(e) for e in elems])
    exact = f.exact
    counts, sums, combos = _table(elems, vals, f.arity, range(0, max_len + 1))
    sizes = np.array([len(c) for c in combos])
    xv = np.array([(x.mask >> a) & 1 for a in range(1 << f.arity)], dtype=np.int16)
    best_hi = None
    best_lo = None
    for m in range(1, max_len + 1):
        left = counts[sizes <= max_len - m] + m * xv
        lsum = sums[sizes <= max_len - m]
        # exterior: <B, x^m> <= <A>, xi = (f(A) - f(B)) / m, minimized
        # interior: <A> <= <B, x^m>, xi = (f(A) - f(B)) / m, maximized
        for start in range(0, len(left), _CHUNK):
            sl = slice(start, start + _CHUNK)
            il, ia = np.nonzero(_dominated(left[sl], counts))
            if len(il):
                xi = _ratio(min(sums[ia] - lsum[sl][il]), scale * m, exact)
                best_hi = xi if best_hi is None else min(best_hi, xi)
            ia, il = np.nonzero(_dominated(counts, left[sl]))
            if len(ia):
                xi = _ratio(max(sums[ia] - lsum[sl][il]), scale * m, exact)
                best_lo = xi if best_lo is None else max(best_lo, xi)
    return Band(best_lo, best_hi, False, f"search(max_len={max_len})")


def _atom_rows(f: PartialFunction):
    atoms = 1 << f.arity
    rows, rhs = [], []
    for e in f.domain:
        rows.append([(e.mask >> a) & 1 for a in range(atoms)])
        rhs.append(f(e))
    return rows, rhs


def lp_band(f: PartialFunction, x: Element) -> Band:
    """Exact range of ``mu(x)`` over measures agreeing with ``f``; raises NotExtensible if there is none."""
    rows, rhs = _atom_rows(f)
    c = [(x.mask >> a) & 1 for a in range(1 << f.arity)]
    lo = solve_lp(c, rows, rhs)
    if lo.status == "infeasible":
        raise NotExtensible("no measure agrees with the partial function", certificate=_certificate(f, lo.farkas))
    hi = solve_lp([-v for v in c], rows, rhs)
    return Band(lo.value, -hi.value, True, "lp")


def _certificate(f: PartialFunction, y) -> dict:
    """Farkas weights ``y`` on the domain: ``sum y_s [s] <= 0`` on every atom yet ``sum y_s f(s) > 0``."""
    return {"weights": {e: Fraction(v) for e, v in zip(f.domain, y) if v}, "value": sum(Fraction(v) * Fraction(f(e)) for e, v in zip(f.domain, y))}


def interior_exterior(f: PartialFunction, x: Element, max_len: int = DEFAULT_MAX_LEN) -> Band:
    """``(f_i(x), f_e(x))``: exact on subalgebra domains, a bracketing search otherwise."""
    if x.arity != f.arity:
        raise ArityMismatch("element and function live in algebras of different arity")
    if x in f.values:
        return Band(f(x), f(x), True, "domain")
    if is_subalgebra(f.values):
        return _subalgebra_band(f, x)
    return _search_band(f, x, max_len)


def extend_one(f: PartialFunction, x: Element, v, max_len: int = DEFAULT_MAX_LEN, band: Band | None = None, verify: bool = True) -> PartialFunction:
    """``f`` extended by ``x -> v`` when ``v`` lies in the admissible band."""
    tol = 0 if f.exact and is_exact(v) else FLOAT_TOL
    if verify:
        verdict = is_partial_measure(f, max_len)
        if not verdict.passed:
            raise NotPartialMeasure(str(verdict))
    if band is None:
        band = interior_exterior(f, x, max_len)
    if not band.contains(v, tol):
        raise ValueOutOfBand(f"value {v} outside [{band.lower}, {band.upper}]")
    g = f.with_value(x, v)
    if verify:
        verdict = is_partial_measure(g, max_len)
        if not verdict.passed:
            raise NotPartialMeasure(f"extension failed the re-check: {verdict}")
    return g


# --- full extension ---------------------------------------------------------------------------------


def _nearest_consistent(f: PartialFunction, tol: float) -> PartialFunction:
    """Float data: replace values by those of the nearest measure (L1) when within ``tol``."""
    rows, rhs = _atom_rows(f)
    atoms, m = 1 << f.arity, len(rows)
    # variables: atom weights, then s+ and s- per row
    a_eq = [r + [1 if j == i else 0 for j in range(m)] + [-1 if j == i else 0 for j in range(m)] for i, r in enumerate(rows)]
    res = solve_lp([0] * atoms + [1] * (2 * m), a_eq, rhs)
    if res.value > tol:
        raise NotExtensible(
            f"values are {float(res.value):.3g} (L1) away from any measure", certificate={"residual": float(res.value)}
        )
    w = res.x[:atoms]
    return PartialFunction(f.arity, {e: sum((w[a] for a in e.atoms()), Fraction(0)) for e in f.values})


def extend_full(f: PartialFunction, tol: float | None = None) -> Measure:
    """A measure on the whole algebra agreeing with ``f``.

    Atoms are fixed one at a time at the midpoint of their admissible band.
    Bands come from the exact LP over atom weights, so an infeasible LP
    certifies that ``f`` was not a partial measure.
    """
    exact = f.exact
    g = f if exact else _nearest_consistent(f, FLOAT_TOL if tol is None else tol)
    for a in range(1 << g.arity):
        x = Element(g.arity, 1 << a)
        band = lp_band(g, x)
        g = extend_one(g, x, band.midpoint, band=band, verify=False)
    weights = tuple(g(Element(g.arity, 1 << a)) for a in range(1 << g.arity))
    return Measure(g.arity, weights if exact else tuple(float(w) for w in weights))

