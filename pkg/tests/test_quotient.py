from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pbaextend.boolean_core import Measure, uniform_measure
from pbaextend.errors import NotAGeneratingSet, PropertyGViolated
from pbaextend.polytope import classical_representable
from pbaextend.ppt import Pba, Ppt, validate_ppt
from pbaextend.quantum import (
    QuantumState,
    build_projection_pba,
    chsh_projections,
    ks18_projections,
    projector,
    singlet,
)
from pbaextend.quotient import (
    ExplicitRelation,
    build_free_ht,
    check_embeddable,
    check_property_G,
    describe,
    enumerate_homomorphisms,
    free_key,
    ideal_relation,
    property_g_counterexample,
    triangle_fixture,
    verify_empirical_quotient,
)

ORTHO = [("P", np.diag([1.0, 0.0])), ("Q", np.diag([0.0, 1.0]))]


def test_free_key_drops_unused_generators():
    # A1 inside the context (A1, A2): atoms 01 and 11
    assert free_key((4, 7), 0b1010) == ((4,), 0b10)
    assert free_key((4, 7), 0) == ((), 0)
    assert free_key((4, 7), 0b1111) == ((), 1)
    assert describe(free_key((0, 1), 0b1000), ["A", "B"]) == "A&B"
    assert describe(free_key((0, 1), 0b0101), ["A", "B"]) == "~A"


def test_property_g_examples():
    chsh = build_projection_pba(chsh_projections())
    assert check_property_G(chsh).ok
    small = build_projection_pba(ORTHO)
    everything = list(range(len(small.registry)))
    assert check_property_G(small, everything).ok
    res = check_property_G(build_projection_pba(property_g_counterexample()))
    assert not res.ok and len(res.witness) == 2


def test_property_g_rejects_foreign_generators():
    small = build_projection_pba(ORTHO)
    with pytest.raises(NotAGeneratingSet):
        check_property_G(small, [projector([1, 1])])


def test_free_ht_on_single_context_has_no_identifications():
    projs = [("P", np.diag([1.0, 1, 0, 0])), ("Q", np.diag([1.0, 0, 1, 0]))]
    target = build_projection_pba(projs)
    psi = QuantumState.pure(np.full(4, 0.5))
    free = build_free_ht(target, [psi])
    assert free.ppts[0].pba.contexts == ((0, 1),)
    assert free.relation.zero_atoms((0, 1)) == frozenset()
    assert free.ppts[0].state[(0, 1)].weights == pytest.approx((0.25,) * 4)
    assert verify_empirical_quotient(free).ok
    assert len(enumerate_homomorphisms(free.relation)) == 4


def test_orthogonal_pair_zero_atom():
    target = build_projection_pba(ORTHO)
    states = [QuantumState.pure([0.6, 0.8]), QuantumState.pure([1, 0])]
    free = build_free_ht(target, states)
    assert free.relation.zero_atoms((0, 1)) == {0b00, 0b11}
    for p in free.ppts:
        assert p.state[(0, 1)].weights[0b11] == pytest.approx(0.0, abs=1e-12)
    assert verify_empirical_quotient(free).ok
    homs = enumerate_homomorphisms(free.relation)
    assert sorted(homs) == [(0, 1), (1, 0)]
    assert all(d[0] + d[1] == 1 for d in homs)


def test_property_g_violation_blocks_free_construction():
    target = build_projection_pba(property_g_counterexample())
    with pytest.raises(PropertyGViolated):
        build_free_ht(target, [QuantumState.mixed(np.eye(3) / 3)])


def test_chsh_pipeline():
    target = build_projection_pba(chsh_projections())
    free = build_free_ht(target, [singlet()])
    assert free.ppts[0].pba.contexts == ((0, 2), (0, 3), (1, 2), (1, 3))
    assert validate_ppt(free.ppts[0]).ok
    report = verify_empirical_quotient(free)
    assert report.ok, report.results
    assert len(enumerate_homomorphisms(free.relation)) == 16
    ok, emb, _ = check_embeddable(free.relation)
    assert ok and len(emb.homomorphisms) == 16


def test_triangle_rejected_with_chain():
    ppt = triangle_fixture()
    report = verify_empirical_quotient([ppt])
    assert not report.ok
    ok, witness = report.results["i"]
    assert not ok
    assert witness["context"] == ("A", "B")
    assert witness["elements"] == ("~A&~B", "A&B")
    chain = witness["chain"]
    assert chain[0][0] == "~A&~B" and chain[-1][0] == "A&B"
    # the identification passes through all three contexts, which transitivity makes unavoidable
    assert {ctx for _, ctx in chain[1:]} == {("A", "B"), ("B", "C"), ("A", "C")}
    assert not report.results["iii"][0]


def test_triangle_without_relations_is_embeddable():
    pba = triangle_fixture().pba
    assert len(enumerate_homomorphisms(pba)) == 8
    ok, emb, _ = check_embeddable(pba)
    assert ok
    # distinct elements of a context get distinct indicator sets
    images = {emb.image((0, 1), m) for m in range(16)}
    assert len(images) == 16


def test_identity_relation_passes():
    pba = Pba(2, [(0, 1)])
    ppt = Ppt(pba, {(0, 1): uniform_measure(2)})
    report = verify_empirical_quotient([ppt], ExplicitRelation(pba))
    assert report.ok


def test_ideal_relation_on_null_atom():
    pba = Pba(2, [(0, 1)])
    h = Fraction(1, 2)
    ppt = Ppt(pba, {(0, 1): Measure(2, (0, h, h, 0))})
    rel = ideal_relation([ppt])
    assert rel.zero_atoms((0, 1)) == {0, 3}
    assert verify_empirical_quotient([ppt], rel).ok


def test_ks18_has_no_truth_assignment():
    target = build_projection_pba(ks18_projections())
    assert enumerate_homomorphisms(target) == []
    ok, emb, witness = check_embeddable(target)
    assert not ok and emb is None and witness is not None


def test_free_pba_has_all_assignments():
    for k in range(1, 5):
        assert len(enumerate_homomorphisms(Pba(k, [tuple(range(k))]))) == 2**k


def _product_state(t1, t2):
    a = np.array([np.cos(t1), np.sin(t1)])
    b = np.array([np.cos(t2), np.sin(t2)])
    return QuantumState.pure(np.kron(a, b))


@settings(max_examples=15, deadline=None)
@given(st.floats(0, np.pi), st.floats(0, np.pi))
def test_product_states_are_representable_and_have_assignments(t1, t2):
    target = build_projection_pba(chsh_projections())
    free = build_free_ht(target, [_product_state(t1, t2), singlet()])
    assert verify_empirical_quotient(free).ok
    # the target state of a product vector is classical, and so is its free counterpart
    assert classical_representable(free.ppts[0]).feasible
    assert enumerate_homomorphisms(free.relation)
