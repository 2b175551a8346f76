"""Constructive extensions of partial states.

Three observables with two measured pairs, gluing of two measures along a
shared block, products over disjoint blocks, gluing along a running
intersection order of a forest-shaped compatibility graph, and the interval
conditions for the Bell square and the bipartite 3x3 topology.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import networkx as nx

from .boolean_core import Measure, measure_from_intersections, restrict
from .errors import (
    BlocksOverlap,
    ChiEtaOutOfBox,
    InvalidThreeSpec,
    NoRunningIntersectionOrder,
    NotAForest,
    NotExtensible,
    OverlapMismatch,
    WrongTopology,
)
from .lp import solve_lp
from .polytope import CorrelationSpec, Facet, bounds_missing_term
from .ppt import Ppt, check_ks_property, compatibility_graph, merge_cliques
from .scalars import close, tol_for

# --- three observables ------------------------------------------------------


@dataclass(frozen=True)
class ThreeSpec:
    """Values of A1, A2, A3, A1&A3 and A2&A3 (A1 and A2 never measured together)."""

    p1: object
    p2: object
    p3: object
    p13: object
    p23: object

    def __post_init__(self):
        vals = (self.p1, self.p2, self.p3, self.p13, self.p23)
        t = tol_for(vals)
        if any(v < -t or v > 1 + t for v in vals):
            raise InvalidThreeSpec("values must lie in [0, 1]")
        if self.p13 > min(self.p1, self.p3) + t or self.p23 > min(self.p2, self.p3) + t:
            raise InvalidThreeSpec("joint value exceeds a marginal")
        if self.p1 + self.p3 - self.p13 > 1 + t or self.p2 + self.p3 - self.p23 > 1 + t:
            raise InvalidThreeSpec("union value exceeds 1")


@dataclass(frozen=True)
class ChiEtaBox:
    eta_lo: object
    eta_hi: object
    chi_lo: object
    chi_hi: object

    @property
    def p12_range(self):
        """Values of A1&A2 = chi + eta over the box."""
        return self.chi_lo + self.eta_lo, self.chi_hi + self.eta_hi


def chi_eta_intervals(s: ThreeSpec) -> ChiEtaBox:
    """Ranges of eta = f(A1&A2&A3) and chi = f(A1&A2&~A3) keeping every atom weight nonnegative."""
    zero = 0 * s.p1
    eta_lo = max(zero, s.p13 + s.p23 - s.p3)
    eta_hi = min(s.p13, s.p23)
    chi_lo = max(zero, s.p1 + s.p2 + s.p3 - s.p13 - s.p23 - 1)
    chi_hi = min(s.p1 - s.p13, s.p2 - s.p23)
    return ChiEtaBox(eta_lo, eta_hi, chi_lo, chi_hi)


def three_weights(s: ThreeSpec, chi, eta) -> list:
    """Atom weights indexed by eps1 + 2*eps2 + 4*eps3."""
    p1, p2, p3, p13, p23 = s.p1, s.p2, s.p3, s.p13, s.p23
    w = [None] * 8
    w[0b000] = 1 - (p1 + p2 + p3 - p13 - p23) + chi
    w[0b001] = p1 - p13 - chi
    w[0b010] = p2 - p23 - chi
    w[0b100] = eta + p3 - p13 - p23
    w[0b011] = chi
    w[0b101] = p13 - eta
    w[0b110] = p23 - eta
    w[0b111] = eta
    return w


def extend_three(s: ThreeSpec, chi=None, eta=None) -> Measure:
    box = chi_eta_intervals(s)
    t = tol_for((s.p1, s.p2, s.p3, s.p13, s.p23, chi or 0, eta or 0))
    if chi is None:
        chi = (box.chi_lo + box.chi_hi) / 2
    if eta is None:
        eta = (box.eta_lo + box.eta_hi) / 2
    if not (box.chi_lo - t <= chi <= box.chi_hi + t and box.eta_lo - t <= eta <= box.eta_hi + t):
        raise ChiEtaOutOfBox(f"(chi, eta) = ({chi}, {eta}) outside {box}")
    w = three_weights(s, chi, eta)
    if t:
        w = [max(0.0, float(x)) for x in w]
    return Measure(3, w)


# --- gluing -----------------------------------------------------------------


def _project(atom: int, src: Sequence[int], dst: Sequence[int]) -> int:
    """Local atom index over ``dst`` of an atom over ``src`` (dst a subset of src)."""
    out = 0
    for j, g in enumerate(dst):
        out |= ((atom >> src.index(g)) & 1) << j
    return out


def glue_pair(m1: Measure, gens1: Sequence[int], m2: Measure, gens2: Sequence[int], tol=None):
    """Conditional-product gluing of two measures agreeing on their shared generators.

    Returns ``(measure, gens)`` with ``gens`` the sorted union.  Weights are
    ``f1 * f2 / f_overlap`` and zero where the overlap marginal vanishes.
    """
    gens1, gens2 = list(gens1), list(gens2)
    if m1.arity != len(gens1) or m2.arity != len(gens2):
        raise ValueError("measure arity must match its generator list")
    shared = sorted(set(gens1) & set(gens2))
    union = sorted(set(gens1) | set(gens2))
    if shared:
        r1 = restrict(m1, [gens1.index(g) for g in shared])
        r2 = restrict(m2, [gens2.index(g) for g in shared])
        t = tol_for(r1.weights + r2.weights, tol)
        if not all(close(a, b, t) for a, b in zip(r1.weights, r2.weights)):
            raise OverlapMismatch(f"marginals on generators {shared} differ")
        overlap = r1.weights
    else:
        overlap = (m1.weights[0] * 0 + 1,)
    w = []
    for a in range(1 << len(union)):
        den = overlap[_project(a, union, shared)]
        if den == 0:
            w.append(den * 0)
            continue
        w.append(m1.weights[_project(a, union, gens1)] * m2.weights[_project(a, union, gens2)] / den)
    return Measure(len(union), w), tuple(union)


def glue_four(f123: Measure, f124: Measure) -> Measure:
    """Glue measures on (A1,A2,A3) and (A1,A2,A4) along (A1,A2)."""
    m, _ = glue_pair(f123, (0, 1, 2), f124, (0, 1, 3))
    return m


def product_disjoint(m1: Measure, m2: Measure, gens1: Sequence[int] | None = None, gens2: Sequence[int] | None = None):
    """Product measure over disjoint generator blocks.

    Without explicit blocks the generators of ``m2`` follow those of ``m1``
    and only the measure is returned.
    """
    if gens1 is None and gens2 is None:
        m, _ = glue_pair(m1, range(m1.arity), m2, range(m1.arity, m1.arity + m2.arity))
        return m
    if set(gens1) & set(gens2):
        raise BlocksOverlap(f"blocks share generators {sorted(set(gens1) & set(gens2))}")
    return glue_pair(m1, gens1, m2, gens2)


# --- forests ----------------------------------------------------------------


@dataclass(frozen=True)
class TreePlan:
    """Gluing order: ``steps[i] = (node, overlap with earlier nodes, parent or None)``."""

    steps: tuple


def running_intersection_order(nodes: Sequence[Sequence[int]]) -> TreePlan:
    """Order nodes so each one meets the earlier ones inside a single earlier node.

    Found by repeatedly removing an ear: a node whose intersection with the
    rest is contained in one other remaining node (or is empty).
    """
    remaining = [tuple(v) for v in nodes]
    removed = []
    while remaining:
        for idx, v in enumerate(remaining):
            others = remaining[:idx] + remaining[idx + 1 :]
            rest = set().union(*others) if others else set()
            shared = set(v) & rest
            if not shared:
                removed.append((v, (), None))
                break
            parent = next((o for o in others if shared <= set(o)), None)
            if parent is not None:
                removed.append((v, tuple(sorted(shared)), parent))
                break
        else:
            raise NoRunningIntersectionOrder(f"no ear among nodes {remaining}")
        remaining.pop(idx)
    return TreePlan(tuple(reversed(removed)))


def forest_graph(ppt: Ppt, nodes: Sequence[Sequence[int]] | None = None):
    """Compatibility graph used by :func:`extend_tree` (cliques merged when possible)."""
    g = compatibility_graph(ppt, nodes)
    if check_ks_property(ppt.pba)[0]:
        g = merge_cliques(g, ppt.pba)
    return g


def extend_tree(ppt: Ppt, nodes: Sequence[Sequence[int]] | None = None, tol=None) -> Measure:
    """Glue node marginals along a running intersection order.

    The compatibility graph of ``nodes`` (default: single generators, with
    cliques merged) must be a forest.  Every context must sit inside a node
    so that the result reproduces the whole state.
    """
    g = forest_graph(ppt, nodes)
    if not nx.is_forest(g.to_networkx()):
        cycle = nx.cycle_basis(g.to_networkx())[0]
        raise NotAForest(f"compatibility graph has a cycle through nodes {[g.nodes[i] for i in cycle]}")
    for c in ppt.pba.contexts:
        if not any(set(c) <= set(v) for v in g.nodes):
            raise WrongTopology(f"context {c} is not contained in any node")
    plan = running_intersection_order(g.nodes)
    cur, cur_gens = None, ()
    for node, _, _ in plan.steps:
        m = ppt.marginal(node)
        if cur is None:
            cur, cur_gens = m, tuple(node)
        else:
            cur, cur_gens = glue_pair(cur, cur_gens, m, node, tol)
    assert cur_gens == tuple(range(ppt.pba.n))
    return cur


# --- Bell square ------------------------------------------------------------


def bell_sides(pba, first: Sequence[int] | None = None) -> tuple[tuple, tuple]:
    """Split four generators into the two pairs never measured together."""
    if pba.n != 4 or len(pba.contexts) != 4 or any(len(c) != 2 for c in pba.contexts):
        raise WrongTopology("expected four generators in four two-element contexts")
    pairs = {frozenset(c) for c in pba.contexts}
    missing = [frozenset(p) for p in combinations(range(4), 2) if frozenset(p) not in pairs]
    if len(missing) != 2 or missing[0] & missing[1]:
        raise WrongTopology("contexts do not form a Bell square")
    x = next(m for m in missing if (first is None and 0 in m) or (first is not None and m == frozenset(first)))
    y = next(m for m in missing if m != x)
    return tuple(sorted(x)), tuple(sorted(y))


@dataclass
class ChshResult:
    holds: bool
    pair: tuple
    alphas: dict
    betas: dict

    @property
    def interval(self):
        return max(self.alphas.values()), min(self.betas.values())


def _pair_bounds(ppt: Ppt, a: int, b: int, s: int):
    spec = CorrelationSpec(3, [(0,), (1,), (2,), (0, 2), (1, 2)])
    p = [ppt.value((a,)), ppt.value((b,)), ppt.value((s,)), ppt.value((a, s)), ppt.value((b, s))]
    return bounds_missing_term(p, spec, (0, 1))


def chsh_condition(bell_ppt: Ppt, pair: Sequence[int] | None = None) -> ChshResult:
    """Interval condition on the unmeasured correlation of ``pair``.

    For each generator ``s`` on the other side the exact range of
    ``f(A_a & A_b)`` given the data on ``{a, b, s}`` is ``[alpha_s, beta_s]``;
    the state extends iff the ranges overlap.
    """
    x, y = bell_sides(bell_ppt.pba, pair)
    alphas, betas = {}, {}
    for s in y:
        alphas[s], betas[s] = _pair_bounds(bell_ppt, x[0], x[1], s)
    return ChshResult(max(alphas.values()) <= min(betas.values()), x, alphas, betas)


def ch_expression_value(bell_ppt: Ppt) -> tuple:
    """Largest violation of the Clauser-Horne inequalities ``-1 <= CH <= 0``.

    ``CH`` is the sum of three pair correlations minus the fourth and minus
    the marginals of the generators outside the subtracted pair.  Returns
    ``(value, (special pair), "upper" | "lower")``; a positive value means a violation.
    """
    (a1, a2), (b1, b2) = bell_sides(bell_ppt.pba)
    best = None
    for xs in (a1, a2):
        for ys in (b1, b2):
            xo = a2 if xs == a1 else a1
            yo = b2 if ys == b1 else b1
            u = (
                sum(bell_ppt.value((i, j)) for i in (a1, a2) for j in (b1, b2) if (i, j) != (xs, ys))
                - bell_ppt.value((xs, ys))
                - bell_ppt.value((xo,))
                - bell_ppt.value((yo,))
            )
            for v, form in ((u, "upper"), (-1 - u, "lower")):
                if best is None or v > best[0]:
                    best = (v, (xs, ys), form)
    return best


def extend_bell(bell_ppt: Ppt, pair: Sequence[int] | None = None) -> Measure:
    """Classical extension of a Bell-square state by gluing two three-generator measures.

    The unmeasured correlation of ``pair`` is set to the midpoint of the
    interval from :func:`chsh_condition`; each triple ``pair + (s,)`` then
    gets a measure whose triple meet sits mid-range, and the two are glued
    along ``pair``.
    """
    res = chsh_condition(bell_ppt, pair)
    if not res.holds:
        lo, hi = res.interval
        raise NotExtensible(f"interval condition fails: max alpha {lo} > min beta {hi}", certificate=res)
    a, b = res.pair
    lo, hi = res.interval
    p_ab = (lo + hi) / 2
    full = CorrelationSpec(3, [(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)])
    parts = []
    for s in sorted(res.alphas):
        v = bell_ppt.value
        p = [v((a,)), v((b,)), v((s,)), p_ab, v((a, s)), v((b, s))]
        t_lo, t_hi = bounds_missing_term(p, full, (0, 1, 2))
        vals = dict(zip([(0,), (1,), (2,), (0, 1), (0, 2), (1, 2)], p))
        vals[(0, 1, 2)] = (t_lo + t_hi) / 2
        parts.append((measure_from_intersections(vals, 3), (a, b, s)))
    (m1, g1), (m2, g2) = parts
    m, _ = glue_pair(m1, g1, m2, g2)
    return m


# --- bipartite 3x3 ----------------------------------------------------------

# unknown monomials over local generators (x1, x2, x3) = (0, 1, 2)
UNKNOWN = ((0, 1), (0, 2), (1, 2), (0, 1, 2))
EXPRESSIONS = (
    ("p12", (1, 0, 0, 0)),
    ("p13", (0, 1, 0, 0)),
    ("p23", (0, 0, 1, 0)),
    ("p123", (0, 0, 0, 1)),
    ("p12-p123", (1, 0, 0, -1)),
    ("p13-p123", (0, 1, 0, -1)),
    ("p23-p123", (0, 0, 1, -1)),
    ("p12+p13-p123", (1, 1, 0, -1)),
    ("p12+p23-p123", (1, 0, 1, -1)),
    ("p13+p23-p123", (0, 1, 1, -1)),
    ("p12+p13+p23-p123", (1, 1, 1, -1)),
)
EXPRESSION_TYPE = {name: t for t, names in ((1, range(4)), (2, range(4, 7)), (3, range(7, 10)), (4, range(10, 11))) for name in (EXPRESSIONS[i][0] for i in names)}
KNOWN_MONOMIALS = ((0,), (1,), (2,), (3,), (0, 3), (1, 3), (2, 3))


def example32_spec() -> CorrelationSpec:
    """Per-``s`` polytope over (x1, x2, x3, s): 11 monomials, 16 vertices."""
    return CorrelationSpec(4, KNOWN_MONOMIALS + UNKNOWN)


def bipartite_sides(pba, first: Sequence[int] | None = None) -> tuple[tuple, tuple]:
    if pba.n != 6 or len(pba.contexts) != 9 or any(len(c) != 2 for c in pba.contexts):
        raise WrongTopology("expected six generators in nine two-element contexts")
    g = nx.Graph(list(pba.contexts))
    if not nx.is_bipartite(g) or not nx.is_connected(g):
        raise WrongTopology("contexts do not form a complete bipartite 3x3 graph")
    left, right = nx.bipartite.sets(g)
    if len(left) != 3 or g.number_of_edges() != 9:
        raise WrongTopology("contexts do not form a complete bipartite 3x3 graph")
    if first is not None:
        x = tuple(sorted(first))
        if set(x) not in (left, right):
            raise WrongTopology(f"{x} is not one side of the bipartition")
    else:
        x = tuple(sorted(left if 0 in left else right))
    y = tuple(sorted(set(range(6)) - set(x)))
    return x, y


@dataclass
class ThreeByThreeReport:
    feasible: bool
    sides: tuple
    alphas: dict  # expression -> {s: alpha}
    betas: dict
    lower: dict = field(default_factory=dict)  # expression -> max_s alpha
    upper: dict = field(default_factory=dict)  # expression -> min_s beta
    solution: tuple | None = None  # (p12, p13, p23, p123) when feasible


def three_by_three_condition(ppt: Ppt, first: Sequence[int] | None = None) -> ThreeByThreeReport:
    """The 11-inequality system in p12, p13, p23, p123 and its feasibility.

    Each bound is the exact LP range of the expression over the extensions
    of the data on ``{x1, x2, x3, s}``.
    """
    x, y = bipartite_sides(ppt.pba, first)
    spec = CorrelationSpec(4, KNOWN_MONOMIALS)
    alphas = {name: {} for name, _ in EXPRESSIONS}
    betas = {name: {} for name, _ in EXPRESSIONS}
    for s in y:
        local = (*x, s)
        p = [ppt.value(tuple(local[i] for i in mon)) for mon in KNOWN_MONOMIALS]
        for name, coeffs in EXPRESSIONS:
            lo, hi = bounds_missing_term(p, spec, UNKNOWN, coeffs)
            alphas[name][s], betas[name][s] = lo, hi
    lower = {n: max(v.values()) for n, v in alphas.items()}
    upper = {n: min(v.values()) for n, v in betas.items()}
    A_ub, b_ub = [], []
    for name, coeffs in EXPRESSIONS:
        A_ub.append(list(coeffs))
        b_ub.append(upper[name])
        A_ub.append([-c for c in coeffs])
        b_ub.append(-lower[name])
    res = solve_lp([0, 0, 0, 0], A_ub=A_ub, b_ub=b_ub)
    sol = tuple(res.x) if res.feasible else None
    return ThreeByThreeReport(res.feasible, (x, y), alphas, betas, lower, upper, sol)


def classify_example32_facets(facets: Sequence[Facet], spec: CorrelationSpec | None = None) -> dict:
    """Group facets by their part in the unknown monomials.

    Keys: ``"type1"``..``"type4"`` for facets whose unknown part matches an
    expression (up to sign) and whose bound depends on the data,
    ``"constant"`` for typed facets free of data (such as ``p123 >= 0``),
    ``"known_only"`` for facets without unknowns and ``"other"`` otherwise.
    """
    spec = spec or example32_spec()
    unk = [spec.index(m) for m in UNKNOWN]
    known = [j for j in range(spec.dim) if j not in unk]
    shapes = {}
    for name, coeffs in EXPRESSIONS:
        shapes[coeffs] = shapes[tuple(-c for c in coeffs)] = f"type{EXPRESSION_TYPE[name]}"
    out = {k: [] for k in ("type1", "type2", "type3", "type4", "constant", "known_only", "other")}
    for f in facets:
        u = tuple(f.coeffs[j] for j in unk)
        if not any(u):
            out["known_only"].append(f)
        elif u not in shapes:
            out["other"].append(f)
        elif not any(f.coeffs[j] for j in known) and f.rhs == 0:
            out["constant"].append(f)
        else:
            out[shapes[u]].append(f)
    return out
