"""Correlation polytopes: vertices, exact membership, missing-term bounds, facets.

A spec lists monomials (sets of generators).  The vertex for an atom ``eps``
has coordinate ``prod(eps[i] for i in S)`` on monomial ``S``.  Membership is
decided by the exact simplex in :mod:`pbaextend.lp`; when ``p`` is outside,
the Farkas vector is turned into an affine separator ``c.u <= c0 < c.p``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from itertools import combinations
from math import gcd, lcm
from typing import Iterable, Sequence

from .boolean_core import MAX_ARITY, Measure, evaluate, intersection_element
from .errors import InfeasibleBase, LimitExceeded
from .lp import solve_lp
from .scalars import FLOAT_TOL, is_exact

MAX_FACET_DIM = 12
MAX_FACET_VERTICES = 64


@dataclass(frozen=True)
class CorrelationSpec:
    n: int
    monomials: tuple

    def __post_init__(self):
        mons = tuple(tuple(sorted(set(s))) for s in self.monomials)
        object.__setattr__(self, "monomials", mons)
        if not 0 < self.n <= MAX_ARITY:
            raise LimitExceeded(f"generator count {self.n} outside 1..{MAX_ARITY}")
        if len(set(mons)) != len(mons):
            raise ValueError("duplicate monomials")
        for s in mons:
            if not s or s[0] < 0 or s[-1] >= self.n:
                raise ValueError(f"bad monomial {s}")
        missing = [i for i in range(self.n) if (i,) not in mons]
        if missing:
            raise ValueError(f"singleton monomials missing for generators {missing}")

    @classmethod
    def from_contexts(cls, n: int, contexts: Iterable[Sequence[int]], extra: Iterable[Sequence[int]] = ()) -> CorrelationSpec:
        """All nonempty sub-meets of the given contexts, ordered by size then lexicographically."""
        mons = {(i,) for i in range(n)}
        for ctx in contexts:
            ctx = sorted(ctx)
            for r in range(1, len(ctx) + 1):
                mons.update(combinations(ctx, r))
        mons.update(tuple(sorted(s)) for s in extra)
        return cls(n, tuple(sorted(mons, key=lambda s: (len(s), s))))

    @property
    def dim(self) -> int:
        return len(self.monomials)

    def index(self, monomial: Sequence[int]) -> int:
        return self.monomials.index(tuple(sorted(monomial)))


def vertex(spec: CorrelationSpec, atom: int) -> tuple[int, ...]:
    return tuple(int(all((atom >> i) & 1 for i in s)) for s in spec.monomials)


def vertices(spec: CorrelationSpec, limit: int = MAX_ARITY) -> list[tuple[int, ...]]:
    """One vertex per atom, in atom order (duplicates kept)."""
    if spec.n > limit:
        raise LimitExceeded(f"{spec.n} generators exceeds limit {limit}")
    return [vertex(spec, a) for a in range(1 << spec.n)]


def _integer_separator(c: Sequence[Fraction], c0: Fraction) -> tuple[tuple[int, ...], int]:
    den = reduce(lcm, (Fraction(x).denominator for x in (*c, c0)), 1)
    ints = [int(Fraction(x) * den) for x in (*c, c0)]
    g = reduce(gcd, ints, 0) or 1
    ints = [x // g for x in ints]
    return tuple(ints[:-1]), ints[-1]


@dataclass(frozen=True)
class FeasibilityCertificate:
    """Either convex weights over the vertices or an affine separator.

    ``weights[a]`` is the weight of the vertex of atom ``a``.  A separator
    satisfies ``c.u <= c0`` on every vertex and ``c.p > c0``.
    """

    spec: CorrelationSpec
    p: tuple
    feasible: bool
    weights: tuple | None = None
    separator: tuple | None = None
    offset: int | None = None
    residual: Fraction = Fraction(0)
    tol: float = 0

    @property
    def violation(self) -> Fraction | None:
        if self.feasible:
            return None
        return sum(Fraction(c) * Fraction(x) for c, x in zip(self.separator, self.p)) - self.offset

    def measure(self) -> Measure:
        if not self.feasible:
            raise ValueError("no extension: point lies outside the polytope")
        return Measure(self.spec.n, self.weights)

    def verify(self) -> bool:
        """Re-check the certificate by substitution."""
        verts = vertices(self.spec)
        if self.feasible:
            w = self.weights
            if any(x < -self.tol for x in w) or abs(sum(w) - 1) > self.tol:
                return False
            for j in range(self.spec.dim):
                got = sum(x for x, u in zip(w, verts) if u[j])
                if abs(got - self.p[j]) > self.tol:
                    return False
            return True
        c, c0 = self.separator, self.offset
        if any(sum(a * b for a, b in zip(c, u)) > c0 for u in verts):
            return False
        return self.violation > 0


def _lp_rows(spec: CorrelationSpec, verts):
    A = [[1] * len(verts)]
    for j in range(spec.dim):
        A.append([u[j] for u in verts])
    return A


def membership(p: Sequence, spec: CorrelationSpec, tol: float | None = None) -> FeasibilityCertificate:
    """Decide ``p in conv{u_eps}``.

    Exact inputs are decided exactly.  If any coordinate is a float the
    decision allows an L1 residual up to ``tol`` (default 1e-9); the returned
    separator is still exact for the given numbers.
    """
    p = tuple(p)
    if len(p) != spec.dim:
        raise ValueError(f"vector has {len(p)} coordinates, spec has {spec.dim}")
    verts = vertices(spec)
    exact = all(is_exact(x) for x in p)
    if tol is None:
        tol = 0 if exact else FLOAT_TOL
    res = solve_lp(None, _lp_rows(spec, verts), [1, *p], n=len(verts))
    if res.feasible or res.residual <= tol:
        if res.feasible:
            w = tuple(res.x)
        else:
            w = _phase1_weights(spec, verts, p)
        if not exact:
            w = tuple(float(x) for x in w)
        return FeasibilityCertificate(spec, p, True, weights=w, residual=res.residual, tol=tol)
    y = res.farkas
    # y.(1, u) <= 0 on vertices and y.(1, p) > 0: separator c = y[1:], c0 = -y[0]
    c, c0 = _integer_separator(y[1:], -y[0])
    return FeasibilityCertificate(spec, p, False, separator=c, offset=c0, residual=res.residual, tol=tol)


def _phase1_weights(spec, verts, p):
    """Weights of the nearest point in L1 (slack-augmented LP) for nearly feasible float data."""
    m = spec.dim
    nv = len(verts)
    # variables: lambda (nv), s+ (m), s- (m); minimize sum s
    A = [[1] * nv + [0] * (2 * m)]
    for j in range(m):
        row = [u[j] for u in verts] + [0] * (2 * m)
        row[nv + j] = 1
        row[nv + m + j] = -1
        A.append(row)
    c = [0] * nv + [1] * (2 * m)
    res = solve_lp(c, A, [1, *p])
    return tuple(res.x[:nv])


def project_feasible(p: Sequence, spec: CorrelationSpec) -> tuple:
    """Nearest polytope point in L1, as exact rationals."""
    verts = vertices(spec)
    w = _phase1_weights(spec, verts, tuple(p))
    return tuple(sum((x for x, u in zip(w, verts) if u[j]), Fraction(0)) for j in range(spec.dim))


def bounds_missing_term(p: Sequence, spec: CorrelationSpec, target: Sequence[int] | Sequence[Sequence[int]], coeffs=None, tol: float | None = None):
    """Exact range ``[alpha, beta]`` of a linear form in missing monomials over the fibre of ``p``.

    ``target`` is a monomial, or a list of monomials combined with ``coeffs``
    (default all 1).  Float data within ``tol`` of the polytope are first
    moved to the nearest polytope point.
    """
    p = tuple(p)
    if target and isinstance(target[0], int):
        targets, coeffs = [tuple(sorted(target))], [1]
    else:
        targets = [tuple(sorted(t)) for t in target]
        coeffs = list(coeffs) if coeffs is not None else [1] * len(targets)
    for t in targets:
        if not t or max(t) >= spec.n:
            raise ValueError(f"bad monomial {t}")
    cert = membership(p, spec, tol)
    if not cert.feasible:
        raise InfeasibleBase(f"base vector outside the polytope (violation {cert.violation})")
    if not all(is_exact(x) for x in p):
        p = project_feasible(p, spec)
    verts = vertices(spec)
    obj = [sum(c * int(all((a >> i) & 1 for i in t)) for c, t in zip(coeffs, targets)) for a in range(1 << spec.n)]
    A = _lp_rows(spec, verts)
    lo = solve_lp(obj, A, [1, *p])
    hi = solve_lp([-x for x in obj], A, [1, *p])
    return lo.value, -hi.value


def values_from_measure(m: Measure, spec: CorrelationSpec) -> tuple:
    return tuple(evaluate(m, intersection_element(s, m.arity)) for s in spec.monomials)


def classical_representable(ppt, tol: float | None = None) -> FeasibilityCertificate:
    """Decide whether a PPT extends to one measure on all its generators."""
    spec = CorrelationSpec.from_contexts(ppt.pba.n, ppt.pba.contexts)
    return membership(ppt.correlation_vector(spec), spec, tol)


# ---------------------------------------------------------------------------
# facets by double description


@dataclass(frozen=True, order=True)
class Facet:
    """``coeffs . p  (<= | >=)  rhs`` with integer data, gcd 1 and first nonzero coefficient positive."""

    coeffs: tuple
    rhs: int
    sense: str  # "<=" or ">="

    def holds(self, p: Sequence) -> bool:
        lhs = sum(c * x for c, x in zip(self.coeffs, p))
        return lhs <= self.rhs if self.sense == "<=" else lhs >= self.rhs

    def slack(self, p: Sequence):
        lhs = sum(c * x for c, x in zip(self.coeffs, p))
        return self.rhs - lhs if self.sense == "<=" else lhs - self.rhs

    def support(self) -> list[int]:
        return [j for j, c in enumerate(self.coeffs) if c]

    def render(self, spec: CorrelationSpec, names=None) -> str:
        def mon(s):
            labels = [names[i] if names else str(i + 1) for i in s]
            return "p" + "".join(labels) if not names else "p(" + ",".join(labels) + ")"

        terms = []
        for c, s in zip(self.coeffs, spec.monomials):
            if c:
                sign = "-" if c < 0 else "+"
                mag = "" if abs(c) == 1 else f"{abs(c)}*"
                terms.append(f"{sign} {mag}{mon(s)}")
        lhs = " ".join(terms).lstrip("+ ") or "0"
        return f"{lhs} {self.sense} {self.rhs}"


def _normalize(v: Sequence[int]) -> tuple[int, ...]:
    g = reduce(gcd, v, 0)
    return tuple(x // g for x in v) if g > 1 else tuple(v)


def _rank(rows: list[list[int]]) -> int:
    """Exact rank by fraction-free elimination."""
    m = [list(r) for r in rows]
    rank, ncols = 0, len(m[0]) if m else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        pr = m[rank]
        for i in range(rank + 1, len(m)):
            f = m[i][col]
            if f:
                a = pr[col]
                m[i] = [a * x - f * y for x, y in zip(m[i], pr)]
        rank += 1
        if rank == len(m):
            break
    return rank


def _solve_square(rows: list[list[int]]) -> list[list[Fraction]]:
    """Inverse of a nonsingular integer matrix, as columns of Fractions."""
    d = len(rows)
    aug = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(d)] for i, r in enumerate(rows)]
    for col in range(d):
        piv = next(i for i in range(col, d) if aug[i][col])
        aug[col], aug[piv] = aug[piv], aug[col]
        inv = 1 / aug[col][col]
        aug[col] = [x * inv for x in aug[col]]
        for i in range(d):
            if i != col and aug[i][col]:
                f = aug[i][col]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[col])]
    return [[aug[i][d + j] for i in range(d)] for j in range(d)]


def double_description(rows: list[tuple[int, ...]]) -> list[tuple[int, ...]]:
    """Extreme rays of the pointed cone ``{x : r.x >= 0 for r in rows}``.

    Rows are processed in lexicographic order; new rays come from adjacent
    (+, -) pairs, adjacency decided by the rank of the common tight rows.
    """
    order = sorted(set(rows))
    D = len(order[0])
    if _rank(order) < D:
        raise ValueError("cone is not pointed: rows do not span the space")
    basis: list[tuple[int, ...]] = []
    for r in order:
        if _rank(basis + [r]) > len(basis):
            basis.append(r)
            if len(basis) == D:
                break
    cols = _solve_square([list(r) for r in basis])
    rays = []
    for col in cols:
        den = reduce(lcm, (x.denominator for x in col), 1)
        rays.append(_normalize([int(x * den) for x in col]))
    done = list(basis)
    remaining = [r for r in order if r not in set(basis)]

    def dot(r, x):
        return sum(a * b for a, b in zip(r, x))

    # tight sets as bitmasks over processed rows
    tight = [sum(1 << i for i, r in enumerate(done) if dot(r, x) == 0) for x in rays]
    for row in remaining:
        vals = [dot(row, x) for x in rays]
        pos = [i for i, v in enumerate(vals) if v > 0]
        neg = [i for i, v in enumerate(vals) if v < 0]
        new_rays, new_tight = [], []
        for i in pos:
            for j in neg:
                common = tight[i] & tight[j]
                if bin(common).count("1") < D - 2:
                    continue
                sub = [done[t] for t in range(len(done)) if (common >> t) & 1]
                if _rank(sub) != D - 2:
                    continue
                x = _normalize([vals[i] * b - vals[j] * a for a, b in zip(rays[i], rays[j])])
                new_rays.append(x)
                new_tight.append(common)
        keep = [i for i, v in enumerate(vals) if v >= 0]
        k = len(done)
        rays = [rays[i] for i in keep] + new_rays
        tight = [tight[i] | ((vals[i] == 0) << k) for i in keep] + [t | (1 << k) for t in new_tight]
        done.append(row)
    return sorted(set(rays))


def enumerate_facets(spec: CorrelationSpec) -> list[Facet]:
    """Complete irredundant facet list of the correlation polytope of ``spec``.

    Correlation polytopes are full-dimensional (distinct monomials are
    linearly independent functions on ``{0,1}^n``), so facets correspond to
    extreme rays of ``{(a0, a) : a0 + a.u >= 0 for all vertices u}``.
    """
    if spec.dim > MAX_FACET_DIM or (1 << spec.n) > MAX_FACET_VERTICES:
        raise LimitExceeded(f"facet enumeration limited to dim {MAX_FACET_DIM} and {MAX_FACET_VERTICES} vertices")
    verts = vertices(spec)
    rays = double_description([(1, *u) for u in verts])
    facets = []
    for a0, *a in rays:
        # a0 + a.p >= 0  <=>  -a.p <= a0
        coeffs = [-x for x in a]
        first = next((x for x in coeffs if x), 0)
        if first >= 0:
            facets.append(Facet(tuple(coeffs), a0, "<="))
        else:
            facets.append(Facet(tuple(-x for x in coeffs), -a0, ">="))
    return sorted(facets)
