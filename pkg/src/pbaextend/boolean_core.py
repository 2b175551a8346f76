"""Finite free Boolean algebras encoded by their atoms.

The free algebra on ``k`` generators has ``2**k`` atoms, one per bit-vector
``eps`` in ``{0,1}^k``.  Atom ``eps`` is identified with the integer
``sum(eps[i] << i)``, so generator 0 is the least significant bit.  An
element is the set of atoms below it, stored as a Python int bitmask of
length ``2**k``; a measure is the tuple of its atom weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ArityMismatch, EmptyKeptSet, IndexOutOfRange, LimitExceeded, MissingValue, NotAMeasure
from .scalars import tol_for

MAX_ARITY = 20


def _check_arity(k: int) -> None:
    if not 0 <= k <= MAX_ARITY:
        raise LimitExceeded(f"arity {k} outside 0..{MAX_ARITY}")


def eps_of(index: int, k: int) -> tuple[int, ...]:
    return tuple((index >> i) & 1 for i in range(k))


def index_of(eps: Sequence[int]) -> int:
    return sum(int(b) << i for i, b in enumerate(eps))


@dataclass(frozen=True)
class Element:
    arity: int
    mask: int

    def __post_init__(self):
        _check_arity(self.arity)
        if self.mask < 0 or self.mask >> (1 << self.arity):
            raise ValueError(f"mask {self.mask:#x} has bits beyond 2**{self.arity} atoms")

    @classmethod
    def zero(cls, k: int) -> Element:
        return cls(k, 0)

    @classmethod
    def one(cls, k: int) -> Element:
        return cls(k, (1 << (1 << k)) - 1)

    @classmethod
    def atom(cls, k: int, eps: Sequence[int] | int) -> Element:
        idx = eps if isinstance(eps, int) else index_of(eps)
        return cls(k, 1 << idx)

    @classmethod
    def from_atoms(cls, k: int, atoms: Iterable[int]) -> Element:
        mask = 0
        for a in atoms:
            mask |= 1 << a
        return cls(k, mask)

    def _same(self, other: Element) -> None:
        if self.arity != other.arity:
            raise ArityMismatch(f"arity {self.arity} vs {other.arity}")

    def __and__(self, other: Element) -> Element:
        self._same(other)
        return Element(self.arity, self.mask & other.mask)

    def __or__(self, other: Element) -> Element:
        self._same(other)
        return Element(self.arity, self.mask | other.mask)

    def __invert__(self) -> Element:
        return Element(self.arity, Element.one(self.arity).mask ^ self.mask)

    def __le__(self, other: Element) -> bool:
        self._same(other)
        return self.mask & ~other.mask == 0

    def __bool__(self) -> bool:
        return self.mask != 0

    def atoms(self) -> list[int]:
        """Indices of the atoms below this element, ascending."""
        out, m, i = [], self.mask, 0
        while m:
            if m & 1:
                out.append(i)
            m >>= 1
            i += 1
        return out

    def __repr__(self) -> str:
        if self.mask == 0:
            return f"Element({self.arity}, 0)"
        return f"Element({self.arity}, atoms={self.atoms()})"


def meet(a: Element, b: Element) -> Element:
    return a & b


def join(a: Element, b: Element) -> Element:
    return a | b


def complement(a: Element) -> Element:
    return ~a


def generator_element(i: int, k: int) -> Element:
    """The element of the i-th free generator: all atoms with ``eps_i = 1``."""
    _check_arity(k)
    if not 0 <= i < k:
        raise IndexOutOfRange(f"generator {i} not in 0..{k - 1}")
    return Element.from_atoms(k, (a for a in range(1 << k) if (a >> i) & 1))


def intersection_element(subset: Iterable[int], k: int) -> Element:
    """Meet of the listed generators (``1`` for the empty subset)."""
    e = Element.one(k)
    for i in subset:
        e = e & generator_element(i, k)
    return e


def atom_decomposition(a: Element) -> list[Element]:
    return [Element.atom(a.arity, i) for i in a.atoms()]


@dataclass(frozen=True)
class Measure:
    """Normalized measure given by nonnegative atom weights."""

    arity: int
    weights: tuple

    def __post_init__(self):
        _check_arity(self.arity)
        w = tuple(self.weights)
        object.__setattr__(self, "weights", w)
        if len(w) != 1 << self.arity:
            raise NotAMeasure(f"expected {1 << self.arity} weights, got {len(w)}")
        tol = tol_for(w)
        for i, x in enumerate(w):
            if x < -tol:
                raise NotAMeasure(f"negative weight {x} on atom {eps_of(i, self.arity)}")
        s = sum(w)
        if abs(s - 1) > (tol if tol else 0):
            raise NotAMeasure(f"weights sum to {s}, not 1")

    @property
    def exact(self) -> bool:
        return tol_for(self.weights) == 0

    def weight(self, eps: Sequence[int] | int):
        return self.weights[eps if isinstance(eps, int) else index_of(eps)]

    def __call__(self, a: Element):
        return evaluate(self, a)

    def support(self) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w != 0]

    def as_dict(self) -> dict[tuple[int, ...], object]:
        return {eps_of(i, self.arity): w for i, w in enumerate(self.weights)}


def uniform_measure(k: int) -> Measure:
    return Measure(k, (Fraction(1, 1 << k),) * (1 << k))


def point_measure(k: int, eps: Sequence[int] | int) -> Measure:
    idx = eps if isinstance(eps, int) else index_of(eps)
    w = [Fraction(0)] * (1 << k)
    w[idx] = Fraction(1)
    return Measure(k, w)


def evaluate(m: Measure, a: Element):
    if m.arity != a.arity:
        raise ArityMismatch(f"measure arity {m.arity} vs element arity {a.arity}")
    total = 0 * m.weights[0]
    for i in a.atoms():
        total += m.weights[i]
    return total


def _subset_mask(subset: Iterable[int], k: int) -> int:
    mask = 0
    for i in subset:
        if not 0 <= i < k:
            raise IndexOutOfRange(f"generator {i} not in 0..{k - 1}")
        mask |= 1 << i
    return mask


def intersection_values(m: Measure) -> dict[frozenset, object]:
    """Values of ``m`` on every meet of a nonempty set of generators."""
    k = m.arity
    out = {}
    for s in range(1, 1 << k):
        # atoms with all bits of s set
        out[frozenset(i for i in range(k) if (s >> i) & 1)] = sum(
            (m.weights[a] for a in range(1 << k) if a & s == s), 0 * m.weights[0]
        )
    return out


def measure_from_intersections(values: Mapping, k: int, tol=None) -> Measure:
    """Atom weights from the values on generator meets, by Moebius inversion.

    ``values`` maps each nonempty subset of ``range(k)`` (any iterable of
    indices) to the value on the meet of those generators.  The weight of
    atom ``eps`` is the alternating sum over supersets of its 1-bits.
    In float mode weights within ``tol`` below zero are clipped to zero.
    """
    _check_arity(k)
    g: list = [None] * (1 << k)
    for key, v in values.items():
        s = _subset_mask(key, k)
        if s == 0:
            if v != 1:
                raise NotAMeasure(f"value on 1 must be 1, got {v}")
            continue
        g[s] = v
    missing = [s for s in range(1, 1 << k) if g[s] is None]
    if missing:
        raise MissingValue(f"no value for meet of generators {eps_of(missing[0], k)}")
    present = [v for v in g[1:]]
    one = (present[0] * 0 + 1) if present else Fraction(1)
    if isinstance(one, int):
        one = Fraction(1)
    g[0] = one
    for i in range(k):
        bit = 1 << i
        for s in range(1 << k):
            if not s & bit:
                g[s] = g[s] - g[s | bit]
    t = tol_for(g, tol)
    w = []
    for idx, x in enumerate(g):
        if x < -t:
            raise NotAMeasure(f"atom {eps_of(idx, k)} would get weight {x}")
        w.append(0 * x if x < 0 else x)
    return Measure(k, w)


def restrict(m: Measure, kept: Sequence[int]) -> Measure:
    """Marginal on the subalgebra generated by ``kept`` (in the given order)."""
    kept = list(kept)
    if not kept:
        raise EmptyKeptSet("restriction needs at least one generator")
    for i in kept:
        if not 0 <= i < m.arity:
            raise IndexOutOfRange(f"generator {i} not in 0..{m.arity - 1}")
    w = [0 * m.weights[0]] * (1 << len(kept))
    for a, x in enumerate(m.weights):
        b = 0
        for j, i in enumerate(kept):
            b |= ((a >> i) & 1) << j
        w[b] += x
    return Measure(len(kept), w)


def embed(e: Element, kept: Sequence[int], k: int) -> Element:
    """Image in the arity-``k`` algebra of an element of the subalgebra on ``kept``."""
    kept = list(kept)
    if e.arity != len(kept):
        raise ArityMismatch(f"element arity {e.arity} vs {len(kept)} kept generators")
    mask = 0
    for a in range(1 << k):
        b = 0
        for j, i in enumerate(kept):
            b |= ((a >> i) & 1) << j
        if (e.mask >> b) & 1:
            mask |= 1 << a
    return Element(k, mask)


@dataclass(frozen=True)
class MultiplicativeState:
    """A {0,1}-valued measure, i.e. a truth assignment to the generators."""

    arity: int
    assignment: tuple

    @property
    def atom(self) -> int:
        return index_of(self.assignment)

    def value(self, a: Element) -> int:
        if a.arity != self.arity:
            raise ArityMismatch(f"state arity {self.arity} vs element arity {a.arity}")
        return (a.mask >> self.atom) & 1

    def measure(self) -> Measure:
        return point_measure(self.arity, self.atom)


def enumerate_multiplicative_measures(k: int) -> list[MultiplicativeState]:
    _check_arity(k)
    return [MultiplicativeState(k, eps_of(i, k)) for i in range(1 << k)]


def convex_decomposition(m: Measure) -> list[tuple[object, MultiplicativeState]]:
    """``m`` as a convex combination of multiplicative states (its nonzero atom weights)."""
    return [(w, MultiplicativeState(m.arity, eps_of(i, m.arity))) for i, w in enumerate(m.weights) if w != 0]
