"""Partial Boolean algebras over global generators and their states.

A :class:`Pba` stores only maximal contexts, each a sorted tuple of global
generator indices.  A state assigns one :class:`Measure` per context; local
generator ``j`` of a context is its ``j``-th listed global generator.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Mapping, Sequence

import networkx as nx

from .boolean_core import Element, Measure, evaluate, intersection_element, restrict
from .errors import InvalidPba, InvalidState, KsPropertyRequired, LimitExceeded, NodeNotInPba
from .scalars import close, tol_for

Context = tuple  # sorted tuple of global generator indices
State = dict  # Context -> Measure


@dataclass(frozen=True)
class Pba:
    n: int
    contexts: tuple
    names: tuple | None = None

    def __post_init__(self):
        ctxs = []
        for c in self.contexts:
            c = tuple(sorted(set(c)))
            if not c:
                raise InvalidPba("empty context")
            if c[0] < 0 or c[-1] >= self.n:
                raise InvalidPba(f"context {c} has generators outside 0..{self.n - 1}")
            if c not in ctxs:
                ctxs.append(c)
        for a, b in combinations(ctxs, 2):
            if set(a) <= set(b) or set(b) <= set(a):
                raise InvalidPba(f"context {a} and {b} are nested; only maximal contexts are stored")
        covered = set().union(*ctxs) if ctxs else set()
        if covered != set(range(self.n)):
            raise InvalidPba(f"generators {sorted(set(range(self.n)) - covered)} lie in no context")
        object.__setattr__(self, "contexts", tuple(ctxs))
        if self.names is not None:
            names = tuple(self.names)
            if len(names) != self.n or len(set(names)) != self.n:
                raise InvalidPba("need one distinct name per generator")
            object.__setattr__(self, "names", names)

    def label(self, i: int) -> str:
        return self.names[i] if self.names else f"A{i + 1}"

    def containing(self, gens: Iterable[int]) -> Context | None:
        """First stored context containing all of ``gens`` (None if there is none)."""
        s = set(gens)
        return next((c for c in self.contexts if s <= set(c)), None)

    def compatible(self, gens: Iterable[int]) -> bool:
        return self.containing(gens) is not None


@dataclass(frozen=True)
class Ppt:
    pba: Pba
    state: Mapping = field(hash=False)

    def __post_init__(self):
        st = {tuple(sorted(k)): v for k, v in dict(self.state).items()}
        if set(st) != set(self.pba.contexts):
            raise InvalidState("state must give exactly one measure per context")
        for c, m in st.items():
            if not isinstance(m, Measure) or m.arity != len(c):
                raise InvalidState(f"measure for context {c} must have arity {len(c)}")
        object.__setattr__(self, "state", st)

    @classmethod
    def from_global_measure(cls, pba: Pba, m: Measure) -> Ppt:
        return cls(pba, {c: restrict(m, list(c)) for c in pba.contexts})

    def value(self, monomial: Sequence[int]):
        """State value on the meet of the given generators."""
        c = self.pba.containing(monomial)
        if c is None:
            raise NodeNotInPba(f"generators {tuple(monomial)} are not jointly compatible")
        local = [c.index(i) for i in monomial]
        return evaluate(self.state[c], intersection_element(local, len(c)))

    def marginal(self, gens: Sequence[int]) -> Measure:
        c = self.pba.containing(gens)
        if c is None:
            raise NodeNotInPba(f"generators {tuple(gens)} are not jointly compatible")
        return restrict(self.state[c], [c.index(i) for i in gens])

    def correlation_vector(self, spec) -> tuple:
        return tuple(self.value(s) for s in spec.monomials)


@dataclass
class ValidationReport:
    ok: bool
    inconsistencies: list = field(default_factory=list)
    messages: list = field(default_factory=list)


def validate_ppt(ppt: Ppt, tol: float | None = None) -> ValidationReport:
    """Check maximality, normalization and agreement of marginals on every shared generator set."""
    msgs, bad = [], []
    ctxs = ppt.pba.contexts
    for a, b in combinations(ctxs, 2):
        if set(a) <= set(b) or set(b) <= set(a):
            msgs.append(f"contexts {a} and {b} are nested")
    for c in ctxs:
        m = ppt.state[c]
        t = tol_for(m.weights, tol)
        if any(w < -t for w in m.weights) or not close(sum(m.weights), 1, t):
            msgs.append(f"measure on {c} is not normalized and nonnegative")
    for a, b in combinations(ctxs, 2):
        shared = sorted(set(a) & set(b))
        if not shared:
            continue
        ma = restrict(ppt.state[a], [a.index(i) for i in shared])
        mb = restrict(ppt.state[b], [b.index(i) for i in shared])
        t = tol_for(ma.weights + mb.weights, tol)
        if not all(close(x, y, t) for x, y in zip(ma.weights, mb.weights)):
            bad.append((a, b, tuple(shared), ma.weights, mb.weights))
            msgs.append(f"contexts {a} and {b} disagree on generators {tuple(shared)}")
    return ValidationReport(not msgs, bad, msgs)


def _generator_graph(pba: Pba) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(range(pba.n))
    for c in pba.contexts:
        g.add_edges_from(combinations(c, 2))
    return g


def check_ks_property(pba: Pba) -> tuple[bool, tuple | None]:
    """Pairwise compatibility implies joint compatibility; witness is a violating generator set."""
    cliques = sorted(tuple(sorted(q)) for q in nx.find_cliques(_generator_graph(pba)))
    for q in sorted(cliques, key=lambda q: (len(q), q)):
        if not pba.compatible(q):
            return False, q
    return True, None


def check_complete(pba: Pba, states: Sequence[Mapping]) -> tuple[bool, tuple | None]:
    """Every nonzero element of every context gets a nonzero value from some state.

    Nonzero elements contain an atom, so it suffices to look at atoms.
    Witness: ``(context, atom index)``.
    """
    for c in pba.contexts:
        for a in range(1 << len(c)):
            if not any(s[c].weights[a] != 0 for s in states):
                return False, (c, a)
    return True, None


MAX_SEPARATING_ARITY = 4


def check_separating(pba: Pba, states: Sequence[Mapping]) -> tuple[bool, tuple | None]:
    """Distinct elements of each context take different values under some state.

    Witness: ``(context, mask_a, mask_b)``.  Contexts above four generators
    are refused since all ``2**(2**k)`` elements are compared.
    """
    for c in pba.contexts:
        k = len(c)
        if k > MAX_SEPARATING_ARITY:
            raise LimitExceeded(f"separation check limited to contexts of {MAX_SEPARATING_ARITY} generators")
        ws = [s[c].weights for s in states]
        seen = {}
        for mask in range(1 << (1 << k)):
            e = Element(k, mask)
            key = tuple(evaluate_weights(w, e) for w in ws)
            if key in seen:
                return False, (c, seen[key], mask)
            seen[key] = mask
    return True, None


def evaluate_weights(weights, e: Element):
    return sum((weights[i] for i in e.atoms()), 0 * weights[0])


@dataclass(frozen=True)
class CompatibilityGraph:
    nodes: tuple  # tuple of sorted generator tuples
    edges: frozenset  # frozenset of (i, j) node-index pairs with i < j
    names: tuple | None = None

    def neighbors(self, i: int) -> list[int]:
        return sorted({b if a == i else a for a, b in self.edges if i in (a, b)})

    def to_networkx(self) -> nx.Graph:
        g = nx.Graph()
        g.add_nodes_from(range(len(self.nodes)))
        g.add_edges_from(self.edges)
        return g


def compatibility_graph(ppt: Ppt | Pba, nodes: Sequence[Sequence[int]] | None = None) -> CompatibilityGraph:
    """Edge between two nodes iff their generator union lies in a context.

    Default nodes are the single generators.  Nodes keep the given order.
    """
    pba = ppt.pba if isinstance(ppt, Ppt) else ppt
    if nodes is None:
        nodes = [(i,) for i in range(pba.n)]
    nodes = tuple(tuple(sorted(set(v))) for v in nodes)
    for v in nodes:
        if not v or not pba.compatible(v):
            raise NodeNotInPba(f"node {v} is not contained in any context")
    edges = frozenset(
        (i, j) for i, j in combinations(range(len(nodes)), 2) if pba.compatible(set(nodes[i]) | set(nodes[j]))
    )
    return CompatibilityGraph(nodes, edges, pba.names)


def merge_cliques(g: CompatibilityGraph, pba: Pba) -> CompatibilityGraph:
    """Collapse each maximal clique (two or more nodes) whose union is compatible into one node.

    Every edge of ``g`` lies in some maximal clique, so after merging two
    nodes are joined exactly when they share a generator.
    """
    ok, witness = check_ks_property(pba)
    if not ok:
        raise KsPropertyRequired(f"pairwise compatible generators {witness} lie in no common context")
    ng = g.to_networkx()
    groups = []
    covered = set()
    for q in sorted(tuple(sorted(q)) for q in nx.find_cliques(ng)):
        union = set().union(*(g.nodes[i] for i in q))
        if len(q) >= 2 and pba.compatible(union):
            groups.append(frozenset(q))
            covered.update(q)
    groups += [frozenset([i]) for i in range(len(g.nodes)) if i not in covered]
    merged: dict[tuple, set] = {}
    for grp in groups:
        gens = tuple(sorted(set().union(*(g.nodes[i] for i in grp))))
        merged.setdefault(gens, set()).update(grp)
    # drop nodes absorbed by a larger merged node
    keys = [k for k in merged if not any(set(k) < set(o) for o in merged)]
    keys.sort(key=lambda k: (min(merged[k]), k))
    edges = {(a, b) for a, b in combinations(range(len(keys)), 2) if set(keys[a]) & set(keys[b])}
    return CompatibilityGraph(tuple(keys), frozenset(edges), g.names)


def export_dot(g: CompatibilityGraph) -> str:
    """Undirected DOT document; nodes are labelled by their generator names."""

    def label(v):
        return ",".join(g.names[i] if g.names else f"A{i + 1}" for i in v)

    lines = ["graph {"]
    for i, v in enumerate(g.nodes):
        lines.append(f'  n{i} [label="{label(v)}"];')
    for a, b in sorted(g.edges):
        lines.append(f"  n{a} -- n{b};")
    lines.append("}")
    return "\n".join(lines) + "\n"
