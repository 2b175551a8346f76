"""Seeded random fixtures shared by the property tests and the acceptance suite."""
from __future__ import annotations

import random
from fractions import Fraction
from itertools import combinations

from pbaextend.boolean_core import Measure, measure_from_intersections
from pbaextend.extension import ThreeSpec
from pbaextend.polytope import CorrelationSpec
from pbaextend.ppt import Pba, Ppt


def rational(rng: random.Random, lo=Fraction(0), hi=Fraction(1), den=12) -> Fraction:
    """Random rational in [lo, hi] on a grid of step (hi - lo) / den; endpoints are likely."""
    return lo + (hi - lo) * Fraction(rng.randint(0, den), den)


def random_measure(rng: random.Random, k: int, den: int = 10, zero_prob: float = 0.3) -> Measure:
    raw = [0 if rng.random() < zero_prob else rng.randint(1, den) for _ in range(1 << k)]
    if not any(raw):
        raw[rng.randrange(1 << k)] = 1
    total = sum(raw)
    return Measure(k, tuple(Fraction(r, total) for r in raw))


def random_three_spec(rng: random.Random) -> ThreeSpec:
    p1, p2, p3 = (rational(rng, den=rng.choice([2, 3, 4, 6, 10, 12])) for _ in range(3))
    p13 = rational(rng, max(Fraction(0), p1 + p3 - 1), min(p1, p3), den=rng.choice([1, 2, 3, 5, 7]))
    p23 = rational(rng, max(Fraction(0), p2 + p3 - 1), min(p2, p3), den=rng.choice([1, 2, 3, 5, 7]))
    return ThreeSpec(p1, p2, p3, p13, p23)


INTERIOR = (Fraction(1, 2), Fraction(1, 2), Fraction(1, 3), Fraction(2, 3), Fraction(1, 4), Fraction(3, 4))
BELL = Pba(4, [(0, 2), (0, 3), (1, 2), (1, 3)])


def random_bell_ppt(rng: random.Random) -> Ppt:
    """Consistent Bell-square state; about half the draws come from a global measure."""
    if rng.random() < 0.5:
        return Ppt.from_global_measure(BELL, random_measure(rng, 4))
    # endpoint-heavy pair values so that Clauser-Horne violations are common
    p = [rng.choice(INTERIOR) for _ in range(4)]
    state = {}
    for i, j in BELL.contexts:
        q = rational(rng, max(Fraction(0), p[i] + p[j] - 1), min(p[i], p[j]), den=rng.choice([1, 1, 2]))
        state[(i, j)] = measure_from_intersections({(0,): p[i], (1,): p[j], (0, 1): q}, 2)
    return Ppt(BELL, state)


def _conditional_extension(rng, parent: Measure, parent_gens, overlap, fresh, den=6) -> Measure:
    """Measure on ``overlap + fresh`` whose overlap marginal agrees with ``parent``."""
    from pbaextend.boolean_core import restrict

    marg = restrict(parent, [parent_gens.index(g) for g in overlap])
    k0, k1 = len(overlap), len(fresh)
    w = [Fraction(0)] * (1 << (k0 + k1))
    for a in range(1 << k0):
        kernel = random_measure(rng, k1, den) if k1 else Measure(0, (Fraction(1),))
        for b in range(1 << k1):
            w[a | (b << k0)] = marg.weights[a] * kernel.weights[b]
    return Measure(k0 + k1, tuple(w))


def random_forest_ppt(rng: random.Random, max_gens: int = 8) -> Ppt:
    """Consistent state on contexts whose overlap graph is a forest.

    Each generator lies in at most two contexts; a new context either starts
    a fresh component or shares some unshared generators of one earlier
    context.  States are built by conditional extension, so they need not
    come from a random global measure.
    """
    from pbaextend.boolean_core import restrict

    n_target = rng.randint(2, max_gens)
    contexts: list[list[int]] = []
    uses: dict[int, int] = {}
    state_local: list[Measure] = []
    n = 0
    while n < n_target:
        free_room = n_target - n
        candidates = [i for i, c in enumerate(contexts) if any(uses[g] == 1 for g in c)]
        if contexts and candidates and rng.random() < 0.75:
            parent = rng.choice(candidates)
            avail = [g for g in contexts[parent] if uses[g] == 1]
            share = rng.sample(avail, rng.randint(1, min(len(avail), len(contexts[parent]) - 1 or 1)))
            n_fresh = rng.randint(1, min(3, free_room))
        else:
            parent, share = None, []
            n_fresh = rng.randint(1, min(3, free_room))
        fresh = list(range(n, n + n_fresh))
        n += n_fresh
        ctx = sorted(share) + fresh
        if parent is None:
            m = random_measure(rng, len(ctx), 6)
        else:
            m = _conditional_extension(rng, state_local[parent], contexts[parent], sorted(share), fresh)
        contexts.append(ctx)
        state_local.append(m)
        for g in ctx:
            uses[g] = uses.get(g, 0) + 1
    # drop contexts contained in another (possible when a context shares all of a one-generator parent)
    keep = [i for i, c in enumerate(contexts) if not any(i != j and set(c) < set(d) for j, d in enumerate(contexts))]
    pba = Pba(n, [tuple(sorted(contexts[i])) for i in keep])
    state = {}
    for i in keep:
        c = contexts[i]
        order = sorted(range(len(c)), key=lambda j: c[j])
        state[tuple(sorted(c))] = restrict(state_local[i], order)
    return Ppt(pba, state)


def random_pba(rng: random.Random, n: int, max_ctx: int = 3) -> Pba:
    """Random maximal contexts covering ``n`` generators."""
    subsets = [c for r in range(1, min(max_ctx, n) + 1) for c in combinations(range(n), r)]
    chosen = set()
    for _ in range(rng.randint(1, 2 * n)):
        chosen.add(rng.choice(subsets))
    covered = set().union(*chosen)
    chosen.update((g,) for g in range(n) if g not in covered)
    maximal = [c for c in chosen if not any(set(c) < set(d) for d in chosen)]
    return Pba(n, sorted(maximal))


def random_ht_fixture(rng: random.Random, max_gens: int = 4):
    """``(spec, p, from_measure)``: correlation data on a random topology with at most ``max_gens`` generators.

    Half the draws restrict a random global measure; the rest pick each
    coordinate inside its pairwise Frechet range, which may or may not be
    classically representable.
    """
    n = rng.randint(2, max_gens)
    pba = random_pba(rng, n)
    spec = CorrelationSpec.from_contexts(n, pba.contexts)
    if rng.random() < 0.5:
        from pbaextend.polytope import values_from_measure

        return spec, values_from_measure(random_measure(rng, n), spec), True
    vals: dict[tuple, Fraction] = {}
    for s in spec.monomials:
        if len(s) == 1:
            vals[s] = rng.choice(INTERIOR)
        else:
            subs = [vals[t] for t in combinations(s, len(s) - 1)]
            lo = max(Fraction(0), sum(vals[(g,)] for g in s) - (len(s) - 1))
            vals[s] = rational(rng, lo, max(lo, min(subs)), den=rng.choice([1, 1, 1, 2, 3]))
    return spec, tuple(vals[s] for s in spec.monomials), False
