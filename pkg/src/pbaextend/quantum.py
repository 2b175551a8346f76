"""Projection matrices, their partial Boolean algebras and the states they induce.

Commuting projections combine by ``P & Q = PQ``, ``P | Q = P + Q - PQ`` and
``~P = 1 - P``.  Within a commuting set of generators every element is a sum
of atom projections ``prod_i P_i^{eps_i}`` (with ``P^0 = 1 - P``), so the
closure is computed from the nonzero atoms instead of by iterating the
operations.  Matrices are numpy complex arrays compared with absolute
tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Sequence

import networkx as nx
import numpy as np

from .boolean_core import measure_from_intersections
from .errors import DimMismatch, InternalInconsistency, LimitExceeded, NotAMeasure, NotAProjection
from .ppt import Pba, Ppt

OP_TOL = 1e-9
DEDUP_TOL = 1e-7
MAX_GENERATORS = 24
MAX_NONZERO_ATOMS = 16


def as_matrix(m) -> np.ndarray:
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimMismatch(f"expected a square matrix, got shape {a.shape}")
    return a


def _norm(a: np.ndarray) -> float:
    return float(np.max(np.abs(a))) if a.size else 0.0


def check_projection(p, tol: float = OP_TOL) -> bool:
    p = as_matrix(p)
    return _norm(p - p.conj().T) <= tol and _norm(p @ p - p) <= tol


def commutes(p, q, tol: float = OP_TOL) -> bool:
    p, q = as_matrix(p), as_matrix(q)
    if p.shape != q.shape:
        raise DimMismatch(f"dimensions {p.shape[0]} and {q.shape[0]} differ")
    return _norm(p @ q - q @ p) <= tol


def ket(v) -> np.ndarray:
    v = np.asarray(v, dtype=complex).reshape(-1)
    return v / np.linalg.norm(v)


def projector(v) -> np.ndarray:
    """Rank-one projector onto the span of ``v``."""
    v = ket(v)
    return np.outer(v, v.conj())


def span_projector(vectors) -> np.ndarray:
    """Orthogonal projector onto the span of the given vectors."""
    a = np.column_stack([np.asarray(v, dtype=complex) for v in vectors])
    q, r = np.linalg.qr(a)
    rank = int(np.sum(np.abs(np.diag(r)) > 1e-12))
    q = q[:, :rank]
    return q @ q.conj().T


@dataclass(frozen=True)
class QuantumState:
    """A pure state ``psi`` or a density matrix ``rho``."""

    rho: np.ndarray = field(repr=False)

    @classmethod
    def pure(cls, psi) -> QuantumState:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        if abs(np.linalg.norm(psi) - 1) > 1e-9:
            raise ValueError("state vector must have unit norm")
        return cls(np.outer(psi, psi.conj()))

    @classmethod
    def mixed(cls, rho) -> QuantumState:
        rho = as_matrix(rho)
        if _norm(rho - rho.conj().T) > 1e-9 or abs(np.trace(rho) - 1) > 1e-9:
            raise ValueError("density matrix must be hermitian with unit trace")
        if np.min(np.linalg.eigvalsh(rho)) < -1e-9:
            raise ValueError("density matrix must be positive")
        return cls(rho)

    @property
    def dim(self) -> int:
        return self.rho.shape[0]

    def expectation(self, p) -> float:
        p = as_matrix(p)
        if p.shape != self.rho.shape:
            raise DimMismatch(f"state dimension {self.dim} vs operator dimension {p.shape[0]}")
        return float(np.real(np.trace(self.rho @ p)))


class MatrixRegistry:
    """Distinct matrices up to ``tol`` in max-norm; ids in insertion order."""

    def __init__(self, dim: int, tol: float = DEDUP_TOL):
        self.dim = dim
        self.tol = tol
        self.items: list[np.ndarray] = []
        self.add(np.zeros((dim, dim), dtype=complex))
        self.add(np.eye(dim, dtype=complex))

    def find(self, m: np.ndarray) -> int | None:
        for i, x in enumerate(self.items):
            if _norm(x - m) <= self.tol:
                return i
        return None

    def add(self, m: np.ndarray) -> int:
        i = self.find(m)
        if i is None:
            self.items.append(m)
            i = len(self.items) - 1
        return i

    def __len__(self) -> int:
        return len(self.items)


ZERO_ID, ONE_ID = 0, 1


@dataclass
class ContextAlgebra:
    """Atom projections of one commuting generator set."""

    gens: tuple
    atoms: list  # atom index -> matrix
    zero_atoms: frozenset

    @property
    def nonzero_atoms(self) -> list[int]:
        return [a for a in range(len(self.atoms)) if a not in self.zero_atoms]

    def element(self, mask: int) -> np.ndarray:
        out = np.zeros_like(self.atoms[0])
        a = 0
        while mask:
            if mask & 1:
                out = out + self.atoms[a]
            mask >>= 1
            a += 1
        return out

    def canonical(self, mask: int) -> int:
        """Mask with zero atoms removed (same projection)."""
        for a in self.zero_atoms:
            mask &= ~(1 << a)
        return mask

    def canonical_masks(self):
        nz = self.nonzero_atoms
        if len(nz) > MAX_NONZERO_ATOMS:
            raise LimitExceeded(f"context with {len(nz)} nonzero atoms is too large to enumerate")
        for r in range(1 << len(nz)):
            yield sum(1 << nz[j] for j in range(len(nz)) if (r >> j) & 1)


def context_algebra(mats: Sequence[np.ndarray], gens: Sequence[int], tol: float = OP_TOL) -> ContextAlgebra:
    d = mats[0].shape[0]
    eye = np.eye(d, dtype=complex)
    atoms, zero = [], set()
    k = len(gens)
    for a in range(1 << k):
        m = eye
        for j, g in enumerate(gens):
            m = m @ (mats[g] if (a >> j) & 1 else eye - mats[g])
        atoms.append(m)
        if _norm(m) <= DEDUP_TOL:
            zero.add(a)
    return ContextAlgebra(tuple(gens), atoms, frozenset(zero))


@dataclass
class ProjectionPba:
    labels: tuple
    matrices: list = field(repr=False)
    contexts: tuple
    algebras: dict = field(repr=False)  # context -> ContextAlgebra
    registry: MatrixRegistry = field(repr=False)
    element_ids: dict = field(repr=False)  # context -> {canonical mask: registry id}

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def n(self) -> int:
        return len(self.matrices)

    @property
    def pba(self) -> Pba:
        return Pba(self.n, self.contexts, self.labels)

    @property
    def closure(self) -> list[np.ndarray]:
        return list(self.registry.items)

    def element_id(self, context, mask: int) -> int:
        alg = self.algebras[context]
        return self.element_ids[context][alg.canonical(mask)]

    def context_ids(self, context) -> set[int]:
        return set(self.element_ids[context].values())


def build_projection_pba(projs, tol: float = OP_TOL) -> ProjectionPba:
    """Projection PBA of labelled projections: maximal commuting subsets and their closure.

    ``projs`` is a list of ``(label, matrix)`` pairs or a dict.
    """
    items = list(projs.items()) if isinstance(projs, dict) else list(projs)
    if not items:
        raise ValueError("need at least one projection")
    if len(items) > MAX_GENERATORS:
        raise LimitExceeded(f"at most {MAX_GENERATORS} generators")
    labels = tuple(str(lbl) for lbl, _ in items)
    mats = [as_matrix(m) for _, m in items]
    d = mats[0].shape[0]
    for lbl, m in zip(labels, mats):
        if m.shape != (d, d):
            raise DimMismatch(f"{lbl} has dimension {m.shape[0]}, expected {d}")
        if not check_projection(m, tol):
            raise NotAProjection(f"{lbl} is not a hermitian idempotent")
    g = nx.Graph()
    g.add_nodes_from(range(len(mats)))
    g.add_edges_from((i, j) for i, j in combinations(range(len(mats)), 2) if commutes(mats[i], mats[j], tol))
    contexts = tuple(sorted(tuple(sorted(q)) for q in nx.find_cliques(g)))
    registry = MatrixRegistry(d)
    algebras, ids = {}, {}
    for c in contexts:
        alg = context_algebra(mats, c, tol)
        algebras[c] = alg
        ids[c] = {m: registry.add(alg.element(m)) for m in alg.canonical_masks()}
    return ProjectionPba(labels, mats, contexts, algebras, registry, ids)


def quantum_state_on_pba(s: QuantumState, ppba: ProjectionPba) -> dict:
    """One measure per context from the values ``tr(rho P_S)`` on generator meets."""
    if s.dim != ppba.dim:
        raise DimMismatch(f"state dimension {s.dim} vs projection dimension {ppba.dim}")
    state = {}
    for c in ppba.contexts:
        alg = ppba.algebras[c]
        k = len(c)
        values = {}
        for r in range(1, k + 1):
            for sub in combinations(range(k), r):
                # meet of the listed generators = sum of atoms with those bits set
                mask = sum(1 << a for a in range(1 << k) if all((a >> j) & 1 for j in sub))
                values[sub] = s.expectation(alg.element(mask))
        try:
            state[c] = measure_from_intersections(values, k, tol=OP_TOL)
        except NotAMeasure as exc:
            raise InternalInconsistency(f"quantum values on {c} give no measure: {exc}") from exc
    return state


def free_state_from_projections(projs, s: QuantumState) -> Ppt:
    """Free PPT over the maximal commuting subsets, with quantum values on every atom."""
    ppba = projs if isinstance(projs, ProjectionPba) else build_projection_pba(projs)
    return Ppt(ppba.pba, quantum_state_on_pba(s, ppba))


def rationalize(ppt: Ppt, max_denominator: int) -> Ppt:
    """Snap a float PPT to rationals through its values on generator meets.

    Values are shared between contexts, so the snapped state stays consistent.
    Raises NotAMeasure if snapping makes an atom weight negative.
    """
    from .scalars import snap

    cache = {}
    state = {}
    for c in ppt.pba.contexts:
        values = {}
        for r in range(1, len(c) + 1):
            for sub in combinations(range(len(c)), r):
                key = tuple(c[j] for j in sub)
                if key not in cache:
                    cache[key] = snap(ppt.value(key), max_denominator)
                values[sub] = cache[key]
        state[c] = measure_from_intersections(values, len(c))
    return Ppt(ppt.pba, state)


# --- standard fixtures ------------------------------------------------------


def spin_up(theta: float) -> np.ndarray:
    """Spin-1/2 'up' projector along angle ``theta`` in the x-z plane."""
    return 0.5 * np.array(
        [[1 + np.cos(theta), np.sin(theta)], [np.sin(theta), 1 - np.cos(theta)]], dtype=complex
    )


def singlet() -> QuantumState:
    return QuantumState.pure(np.array([0, 1, -1, 0], dtype=complex) / np.sqrt(2))


def chsh_projections(angles_a=(0.0, 90.0), angles_b=(45.0, 135.0)) -> list:
    """Four spin projectors: two on the first particle, two on the second."""
    eye = np.eye(2)
    out = []
    for i, t in enumerate(angles_a):
        out.append((f"A{i + 1}", np.kron(spin_up(np.radians(t)), eye)))
    for j, t in enumerate(angles_b):
        out.append((f"B{j + 3}", np.kron(eye, spin_up(np.radians(t)))))
    return out


# Cabello's 18 rays in dimension 4, grouped into 9 orthogonal bases
KS18_BASES = (
    ((0, 0, 0, 1), (0, 0, 1, 0), (1, 1, 0, 0), (1, -1, 0, 0)),
    ((0, 0, 0, 1), (0, 1, 0, 0), (1, 0, 1, 0), (1, 0, -1, 0)),
    ((1, -1, 1, -1), (1, -1, -1, 1), (1, 1, 0, 0), (0, 0, 1, 1)),
    ((1, -1, 1, -1), (1, 1, 1, 1), (1, 0, -1, 0), (0, 1, 0, -1)),
    ((0, 0, 1, 0), (0, 1, 0, 0), (1, 0, 0, 1), (1, 0, 0, -1)),
    ((1, -1, -1, 1), (1, 1, 1, 1), (1, 0, 0, -1), (0, 1, -1, 0)),
    ((1, 1, -1, 1), (1, 1, 1, -1), (1, -1, 0, 0), (0, 0, 1, 1)),
    ((1, 1, -1, 1), (-1, 1, 1, 1), (1, 0, 1, 0), (0, 1, 0, -1)),
    ((1, 1, 1, -1), (-1, 1, 1, 1), (1, 0, 0, 1), (0, 1, -1, 0)),
)


def ks18_projections() -> list:
    rays = []
    for basis in KS18_BASES:
        for v in basis:
            if not any(np.allclose(projector(v), projector(w)) for w in rays):
                rays.append(v)
    return [(f"v{i + 1}", projector(v)) for i, v in enumerate(rays)]
