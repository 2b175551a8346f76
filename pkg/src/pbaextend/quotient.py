"""Empirical quotients of free PPTs, property (G), truth assignments.

Elements of a free PBA are keyed by ``(support, mask)``: the generators the
element actually depends on and its atom mask over them.  Two
representations in different contexts with equal keys are the same element.
An equivalence relation on these elements is either read off projection
matrices (:class:`ProjectionRelation`) or built from explicit
identifications (:class:`ExplicitRelation`).
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import networkx as nx
import numpy as np

from .boolean_core import Element
from .errors import IncompleteStates, NotAGeneratingSet, PropertyGViolated
from .ppt import Pba, Ppt, check_complete
from .quantum import ONE_ID, ZERO_ID, ProjectionPba, QuantumState, build_projection_pba, quantum_state_on_pba

PROPERTY_G_MAX_FAMILY = 4
EXHAUSTIVE_PAIR_ARITY = 3
SAMPLED_PAIRS = 4000


# --- free elements ------------------------------------------------------------


def free_key(context: Sequence[int], mask: int) -> tuple:
    """Canonical key of the element ``mask`` of the free algebra on ``context``."""
    k = len(context)
    support = []
    for j in range(k):
        bit = 1 << j
        depends = any(
            ((mask >> a) & 1) != ((mask >> (a | bit)) & 1) for a in range(1 << k) if not a & bit
        )
        if depends:
            support.append(j)
    local = 0
    for a in range(1 << k):
        if (mask >> a) & 1:
            b = 0
            for t, j in enumerate(support):
                b |= ((a >> j) & 1) << t
            local |= 1 << b
    return tuple(context[j] for j in support), local


def describe(key: tuple, names: Sequence[str] | None = None) -> str:
    """Readable form of a free element key, e.g. ``A`` or ``~A`` or ``A&B | ~A&~B``."""
    gens, mask = key
    label = (lambda i: names[i]) if names else (lambda i: f"A{i + 1}")
    if not gens:
        return "1" if mask else "0"
    k = len(gens)
    terms = []
    for a in range(1 << k):
        if (mask >> a) & 1:
            terms.append("&".join(("" if (a >> j) & 1 else "~") + label(g) for j, g in enumerate(gens)))
    if k == 1:
        return terms[0]
    return " | ".join(terms)


def _masks(k: int):
    return range(1 << (1 << k))


# --- relations ------------------------------------------------------------------


class QuotientRelation:
    """Equivalence relation on the elements of a free PBA."""

    pba: Pba

    def class_of(self, context, mask: int):
        raise NotImplementedError

    def zero_atoms(self, context) -> frozenset:
        z = self.class_of(context, 0)
        return frozenset(a for a in range(1 << len(context)) if self.class_of(context, 1 << a) == z)


class ProjectionRelation(QuotientRelation):
    """``A ~ B`` iff the corresponding projections coincide."""

    def __init__(self, target: ProjectionPba):
        self.target = target
        self.pba = target.pba

    def class_of(self, context, mask: int):
        return self.target.element_id(tuple(context), mask)

    def zero_atoms(self, context) -> frozenset:
        return self.target.algebras[tuple(context)].zero_atoms


class ExplicitRelation(QuotientRelation):
    """Transitive closure of listed identifications ``(context, mask_a, mask_b)``."""

    def __init__(self, pba: Pba, identifications: Sequence[tuple] = ()):
        self.pba = pba
        self.graph = nx.Graph()
        for c in pba.contexts:
            for m in _masks(len(c)):
                self.graph.add_node(free_key(c, m))
        for c, a, b in identifications:
            self.identify(c, a, b)
        self._refresh()

    def identify(self, context, a: int, b: int) -> None:
        ka, kb = free_key(context, a), free_key(context, b)
        if ka != kb:
            self.graph.add_edge(ka, kb, context=tuple(context))

    def _refresh(self) -> None:
        self._cls = {}
        for i, comp in enumerate(sorted(nx.connected_components(self.graph), key=lambda s: min(s))):
            for key in comp:
                self._cls[key] = i

    def class_of(self, context, mask: int):
        return self._cls[free_key(context, mask)]

    def chain(self, context_a, mask_a: int, context_b, mask_b: int) -> list:
        """Identification path between two elements as ``[(key, context of the step), ...]``."""
        path = nx.shortest_path(self.graph, free_key(context_a, mask_a), free_key(context_b, mask_b))
        out = [(path[0], None)]
        for u, v in zip(path, path[1:]):
            out.append((v, self.graph.edges[u, v]["context"]))
        return out


def ideal_relation(ppts: Sequence[Ppt]) -> ExplicitRelation:
    """Per-context ideal identifications (equal up to atoms null in every state), closed transitively."""
    pba = ppts[0].pba
    ids = []
    for c in pba.contexts:
        zero = [a for a in range(1 << len(c)) if all(p.state[c].weights[a] == 0 for p in ppts)]
        zmask = sum(1 << a for a in zero)
        for m in _masks(len(c)):
            if m & zmask:
                ids.append((c, m, m & ~zmask))
    return ExplicitRelation(pba, ids)


# --- property (G) -----------------------------------------------------------------


@dataclass
class PropertyGResult:
    ok: bool
    witness: tuple | None = None
    reason: str = ""
    bounded: bool = False  # True when larger families were not examined


def _resolve_gens(target: ProjectionPba, gens) -> ProjectionPba:
    if gens is None:
        return target
    if isinstance(gens, ProjectionPba):
        return gens
    items = []
    for i, g in enumerate(gens):
        if isinstance(g, tuple) and len(g) == 2:
            items.append(g)
        elif isinstance(g, (int, np.integer)):
            items.append((f"X{g}", target.registry.items[g]))
        else:
            items.append((f"G{i + 1}", g))
    return build_projection_pba(items)


def _subalgebra_ids(gp: ProjectionPba, context, common: Sequence[int]) -> set[int]:
    """Ids of the elements generated by ``common`` (a subset of ``context``)."""
    k = len(context)
    pos = [context.index(g) for g in common]
    ids = set()
    for r in range(1 << (1 << len(pos))):
        mask = 0
        for a in range(1 << k):
            b = sum(((a >> p) & 1) << t for t, p in enumerate(pos))
            if (r >> b) & 1:
                mask |= 1 << a
        ids.add(gp.element_id(context, mask))
    return ids


def _register_all(target: ProjectionPba, gp: ProjectionPba) -> dict:
    """Element id sets of the contexts of ``gp``, in the registry of ``target``."""
    out = {}
    for c in gp.contexts:
        alg = gp.algebras[c]
        out[c] = {target.registry.add(alg.element(m)) for m in alg.canonical_masks()}
    return out


def check_property_G(target: ProjectionPba, gens=None, max_family: int = PROPERTY_G_MAX_FAMILY) -> PropertyGResult:
    """Check (G) for families of up to ``max_family`` maximal contexts.

    ``gens`` defaults to the target's own generators; it may also be a list
    of closure ids, ``(label, matrix)`` pairs or matrices.
    """
    gp = _resolve_gens(target, gens)
    if gp.dim != target.dim:
        raise NotAGeneratingSet("generators live in a different dimension")
    before = len(target.registry)
    gp_ids = _register_all(target, gp) if gp is not target else {c: target.context_ids(c) for c in target.contexts}
    if len(target.registry) != before:
        raise NotAGeneratingSet("some generated element is not in the target algebra")
    for c in target.contexts:
        if not any(target.context_ids(c) <= ids for ids in gp_ids.values()):
            raise NotAGeneratingSet(f"context {c} is not generated by a compatible subset of the generators")
    ctxs = list(gp.contexts)
    # local registry-consistent ids for subalgebra generation
    for size in range(2, min(max_family, len(ctxs)) + 1):
        for fam in combinations(ctxs, size):
            inter = set.intersection(*(gp_ids[c] for c in fam))
            if inter <= {ZERO_ID, ONE_ID}:
                continue
            common = sorted(set.intersection(*(set(c) for c in fam)))
            if not common:
                return PropertyGResult(False, fam, "contexts share a nontrivial element but no generator")
            sub = _subalgebra_ids(gp, fam[0], common)
            sub = {target.registry.add(gp.registry.items[i]) for i in sub}
            if sub != inter:
                return PropertyGResult(False, fam, "shared generators do not generate the intersection")
    return PropertyGResult(True, None, "", bounded=len(ctxs) > max_family)


# --- free H-T construction ------------------------------------------------------------


@dataclass
class FreeHT:
    ppts: list
    relation: ProjectionRelation
    generators: ProjectionPba
    states: list = field(repr=False)


def build_free_ht(target: ProjectionPba, states: Sequence[QuantumState], gens=None) -> FreeHT:
    """Free PPTs whose empirical quotient is the projection PPT.

    Generator ``i`` of the free PBA corresponds to projection ``i`` of
    ``gens`` (default: the target's generators).
    """
    res = check_property_G(target, gens)
    if not res.ok:
        raise PropertyGViolated(f"{res.reason}: contexts {res.witness}")
    gp = _resolve_gens(target, gens)
    free_states = [quantum_state_on_pba(s, gp) for s in states]
    ok, witness = check_complete(gp.pba, free_states)
    if not ok:
        c, a = witness
        if a not in gp.algebras[c].zero_atoms:
            raise IncompleteStates(f"nonzero atom {a} of context {c} is null in every state")
    ppts = [Ppt(gp.pba, st) for st in free_states]
    return FreeHT(ppts, ProjectionRelation(gp), gp, list(states))


# --- verification of (i)-(iv) -------------------------------------------------------------


@dataclass
class QuotientReport:
    results: dict  # condition -> (ok, witness)

    @property
    def ok(self) -> bool:
        return all(v[0] for v in self.results.values())


def _ideal_masks(ppts: Sequence[Ppt], context) -> int:
    return sum(1 << a for a in range(1 << len(context)) if all(p.state[context].weights[a] == 0 for p in ppts))


def _check_ideal(ppts, relation, names, tol) -> tuple:
    """(i): within each context ``A ~ B`` iff ``A xor B`` is null in every state."""
    for c in relation.pba.contexts:
        k = len(c)
        z = _ideal_masks(ppts, c) if tol == 0 else sum(
            1 << a for a in range(1 << k) if all(abs(p.state[c].weights[a]) <= tol for p in ppts)
        )
        rep = {}
        for m in _masks(k):
            cl = relation.class_of(c, m)
            canon = m & ~z
            if cl != relation.class_of(c, canon):
                return False, _ideal_witness(relation, c, m, canon, names, "not identified with its ideal representative")
            prev = rep.setdefault(cl, canon)
            if prev != canon:
                return False, _ideal_witness(relation, c, prev, canon, names, "identified although they differ off the null ideal")
    return True, None


def _ctx(c, names):
    if c is None:
        return None
    return tuple(names[i] if names else f"A{i + 1}" for i in c)


def _ideal_witness(relation, c, a, b, names, why):
    w = {"context": _ctx(c, names), "elements": (describe(free_key(c, a), names), describe(free_key(c, b), names)), "reason": why}
    if isinstance(relation, ExplicitRelation):
        try:
            w["chain"] = [(describe(k, names), _ctx(ctx, names)) for k, ctx in relation.chain(c, a, c, b)]
        except nx.NetworkXNoPath:
            pass
    return w


def _shared_ids(relation, c, shared) -> set:
    k = len(c)
    pos = [c.index(g) for g in shared]
    out = set()
    for r in range(1 << (1 << len(pos))):
        mask = 0
        for a in range(1 << k):
            b = sum(((a >> p) & 1) << t for t, p in enumerate(pos))
            if (r >> b) & 1:
                mask |= 1 << a
        out.add(relation.class_of(c, mask))
    return out


def _check_intersections(relation, names) -> tuple:
    """(ii): classes met in two contexts are met inside their shared subalgebra."""
    ctx_classes = {c: {relation.class_of(c, m) for m in _masks(len(c))} for c in relation.pba.contexts}
    for c1, c2 in combinations(relation.pba.contexts, 2):
        both = ctx_classes[c1] & ctx_classes[c2]
        shared = sorted(set(c1) & set(c2))
        inside = _shared_ids(relation, c1, shared)
        missing = both - inside
        if missing:
            cl = min(missing, key=repr)
            m1 = next(m for m in _masks(len(c1)) if relation.class_of(c1, m) == cl)
            m2 = next(m for m in _masks(len(c2)) if relation.class_of(c2, m) == cl)
            return False, {
                "contexts": (_ctx(c1, names), _ctx(c2, names)),
                "elements": (describe(free_key(c1, m1), names), describe(free_key(c2, m2), names)),
                "reason": "equivalent elements with no equivalent element in the shared subalgebra",
            }
    return True, None


def _pairs(k: int, rng: random.Random):
    full = (1 << (1 << k)) - 1
    if k <= EXHAUSTIVE_PAIR_ARITY:
        for a in range(full + 1):
            for b in range(full + 1):
                yield a, b
    else:
        for _ in range(SAMPLED_PAIRS):
            yield rng.randint(0, full), rng.randint(0, full)


def _check_operations(relation, target, names, seed) -> tuple:
    """(iii): class of a meet, join and complement depends only on the classes, and matches the target."""
    rng = random.Random(seed)
    table = {}
    for c in relation.pba.contexts:
        k = len(c)
        full = (1 << (1 << k)) - 1
        for a, b in _pairs(k, rng):
            ca, cb = relation.class_of(c, a), relation.class_of(c, b)
            for op, val in (("meet", a & b), ("join", a | b), ("comp", full ^ a)):
                key = (op, ca, cb if op != "comp" else None)
                got = relation.class_of(c, val)
                prev = table.setdefault(key, (got, c, a, b))
                if prev[0] != got:
                    return False, {
                        "operation": op,
                        "context": _ctx(c, names),
                        "elements": (describe(free_key(c, a), names), describe(free_key(c, b), names)),
                        "reason": "result class depends on the representatives",
                    }
    if target is not None:
        mats = target.registry.items
        for (op, ca, cb), (got, c, a, b) in table.items():
            want = {"meet": lambda: mats[ca] @ mats[cb], "join": lambda: mats[ca] + mats[cb] - mats[ca] @ mats[cb], "comp": lambda: np.eye(target.dim) - mats[ca]}[op]()
            if np.max(np.abs(want - mats[got])) > 1e-7:
                return False, {"operation": op, "context": _ctx(c, names), "reason": "quotient operation differs from the projection operation"}
        reached = set()
        for c in relation.pba.contexts:
            reached |= target.context_ids(c)
        if reached != set(range(len(target.registry))) - _foreign_ids(target):
            return False, {"reason": "quotient does not cover the target algebra"}
    return True, None


def _foreign_ids(target: ProjectionPba) -> set:
    """Registry entries added from outside the target's contexts (e.g. by a (G) check)."""
    own = set()
    for c in target.contexts:
        own |= target.context_ids(c)
    return set(range(len(target.registry))) - own


def _check_states(ppts, relation, target, states, names, tol) -> tuple:
    """(iv): each free state is constant on classes and equals the target state there."""
    for idx, p in enumerate(ppts):
        seen = {}
        for c in relation.pba.contexts:
            w = p.state[c].weights
            for m in _masks(len(c)) if len(c) <= EXHAUSTIVE_PAIR_ARITY else relation_masks(relation, c):
                v = sum((w[a] for a in Element(len(c), m).atoms()), 0 * w[0])
                cl = relation.class_of(c, m)
                if target is not None and states is not None:
                    want = states[idx].expectation(target.registry.items[cl])
                    if abs(v - want) > max(tol, 1e-9):
                        return False, {"state": idx, "element": describe(free_key(c, m), names), "values": (v, want)}
                prev = seen.setdefault(cl, v)
                if abs(prev - v) > tol:
                    return False, {"state": idx, "element": describe(free_key(c, m), names), "values": (prev, v)}
    return True, None


def relation_masks(relation, c):
    """Masks to examine in large contexts: canonical masks when known, else a sample."""
    if isinstance(relation, ProjectionRelation):
        return list(relation.target.algebras[tuple(c)].canonical_masks())
    rng = random.Random(0)
    full = (1 << (1 << len(c))) - 1
    return [rng.randint(0, full) for _ in range(SAMPLED_PAIRS)]


def verify_empirical_quotient(
    free: Sequence[Ppt] | FreeHT,
    relation: QuotientRelation | None = None,
    target: ProjectionPba | None = None,
    states: Sequence[QuantumState] | None = None,
    tol: float | None = None,
    seed: int = 0,
) -> QuotientReport:
    """Check conditions (i)-(iv) of an empirical quotient; each failure carries a witness."""
    if isinstance(free, FreeHT):
        relation = relation or free.relation
        target = target or free.generators
        states = states or free.states
        free = free.ppts
    if relation is None:
        relation = ideal_relation(free)
    if tol is None:
        exact = all(isinstance(w, (int,)) or hasattr(w, "denominator") for p in free for m in p.state.values() for w in m.weights)
        tol = 0 if exact else 1e-9
    names = relation.pba.names
    results = {
        "i": _check_ideal(free, relation, names, tol),
        "ii": _check_intersections(relation, names),
        "iii": _check_operations(relation, target, names, seed),
        "iv": _check_states(free, relation, target, states, names, tol),
    }
    return QuotientReport(results)


# --- truth assignments ------------------------------------------------------------------------


def _pba_and_zeros(structure) -> tuple[Pba, dict]:
    if isinstance(structure, ProjectionPba):
        return structure.pba, {c: structure.algebras[c].zero_atoms for c in structure.contexts}
    if isinstance(structure, QuotientRelation):
        return structure.pba, {c: structure.zero_atoms(c) for c in structure.pba.contexts}
    if isinstance(structure, Pba):
        return structure, {c: frozenset() for c in structure.contexts}
    if isinstance(structure, tuple) and len(structure) == 2:
        return structure
    raise TypeError("expected a Pba, ProjectionPba, QuotientRelation or (Pba, zero atoms)")


MAX_ASSIGNMENT_BITS = 24


def enumerate_homomorphisms(structure) -> list[tuple[int, ...]]:
    """All 0/1 assignments to the generators avoiding every context's null atoms."""
    pba, zeros = _pba_and_zeros(structure)
    n = pba.n
    if n > MAX_ASSIGNMENT_BITS:
        raise ValueError(f"assignment search limited to {MAX_ASSIGNMENT_BITS} generators")
    codes = np.arange(1 << n, dtype=np.int64)
    ok = np.ones(1 << n, dtype=bool)
    for c in pba.contexts:
        if not zeros[c]:
            continue
        local = np.zeros(1 << n, dtype=np.int64)
        for j, g in enumerate(c):
            local |= ((codes >> g) & 1) << j
        bad = np.zeros(1 << len(c), dtype=bool)
        bad[list(zeros[c])] = True
        ok &= ~bad[local]
    return [tuple(int((x >> i) & 1) for i in range(n)) for x in codes[ok]]


@dataclass
class Embedding:
    """Each element maps to the set of assignments (by index) that make it true."""

    pba: Pba
    homomorphisms: list

    def image(self, context, mask: int) -> frozenset:
        out = set()
        for h, eps in enumerate(self.homomorphisms):
            a = sum(eps[g] << j for j, g in enumerate(context))
            if (mask >> a) & 1:
                out.add(h)
        return frozenset(out)


def check_embeddable(structure) -> tuple[bool, Embedding | None, tuple | None]:
    """Embeddable into ``2^N`` iff every non-null atom of every context is hit by some assignment.

    Returns ``(ok, embedding, witness)`` with witness ``(context, atom)``.
    """
    pba, zeros = _pba_and_zeros(structure)
    homs = enumerate_homomorphisms((pba, zeros))
    for c in pba.contexts:
        hit = {sum(h[g] << j for j, g in enumerate(c)) for h in homs}
        for a in range(1 << len(c)):
            if a not in zeros[c] and a not in hit:
                return False, None, (c, a)
    return True, Embedding(pba, homs), None


# --- fixtures ------------------------------------------------------------------------------------


def triangle_fixture():
    """Three pairwise contexts with A, B and B, C perfectly correlated and A, C anticorrelated."""
    from fractions import Fraction

    from .boolean_core import Measure

    h = Fraction(1, 2)
    z = Fraction(0)
    pba = Pba(3, [(0, 1), (1, 2), (0, 2)], ("A", "B", "C"))
    corr = Measure(2, (h, z, z, h))
    anti = Measure(2, (z, h, h, z))
    return Ppt(pba, {(0, 1): corr, (1, 2): corr, (0, 2): anti})


def property_g_counterexample():
    """Two contexts whose algebras share span(e1) without sharing a generator (dimension 3)."""
    e1, e2, e3 = np.eye(3)
    from .quantum import span_projector

    return [
        ("P", span_projector([e1, e2])),
        ("Q", span_projector([e1, e3])),
        ("R", span_projector([e1, (e2 + e3) / np.sqrt(2)])),
        ("S", span_projector([e1, (e2 - e3) / np.sqrt(2)])),
    ]
