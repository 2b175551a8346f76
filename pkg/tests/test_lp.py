from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.optimize import linprog

from pbaextend.lp import maximize, minimize, solve_lp


def test_small_optimum():
    # min -x - y  s.t.  x + 2y <= 4, 3x + y <= 6
    res = solve_lp([-1, -1], A_ub=[[1, 2], [3, 1]], b_ub=[4, 6])
    assert res.status == "optimal"
    assert res.value == Fraction(-14, 5)
    assert res.x == [Fraction(8, 5), Fraction(6, 5)]


def test_equality_feasibility_and_values():
    res = solve_lp(None, [[1, 1, 1]], [1], n=3)
    assert res.feasible and sum(res.x) == 1 and min(res.x) >= 0


def test_unbounded():
    assert minimize([-1, 0], [[1, -1]], [0]).status == "unbounded"


def test_maximize_sign():
    res = maximize([1, 2], [[1, 1]], [1])
    assert res.value == 2 and res.x == [0, 1]


def test_infeasible_equalities_farkas():
    A = [[1, 1], [1, 1]]
    b = [1, 2]
    res = solve_lp(None, A, b, n=2)
    assert res.status == "infeasible"
    y = res.farkas
    # y.A <= 0 componentwise and y.b > 0
    assert all(sum(y[i] * A[i][j] for i in range(2)) <= 0 for j in range(2))
    assert sum(yi * bi for yi, bi in zip(y, b)) > 0


def test_infeasible_mixed_farkas_signs():
    # x <= 1 and x = 2
    res = solve_lp(None, [[1]], [2], A_ub=[[1]], b_ub=[1], n=1)
    assert res.status == "infeasible"
    y_ub, y_eq = res.farkas
    assert y_ub <= 0
    assert y_ub * 1 + y_eq * 1 <= 0
    assert y_ub * 1 + y_eq * 2 > 0


def test_degenerate_cycling_example_terminates():
    # classic cycling instance for the largest-coefficient rule
    c = [Fraction(-3, 4), 150, Fraction(-1, 50), 6]
    A_ub = [[Fraction(1, 4), -60, Fraction(-1, 25), 9], [Fraction(1, 2), -90, Fraction(-1, 50), 3], [0, 0, 1, 0]]
    b_ub = [0, 0, 1]
    res = solve_lp(c, A_ub=A_ub, b_ub=b_ub)
    assert res.status == "optimal"
    assert res.value == Fraction(-1, 20)


def test_redundant_rows_are_dropped():
    res = solve_lp([1, 1], [[1, 1], [2, 2]], [1, 2])
    assert res.status == "optimal" and res.value == 1


@given(
    st.integers(1, 4).flatmap(
        lambda m: st.integers(1, 5).flatmap(
            lambda n: st.tuples(
                st.lists(st.lists(st.integers(-3, 3), min_size=n, max_size=n), min_size=m, max_size=m),
                st.lists(st.integers(0, 4), min_size=n, max_size=n),
                st.lists(st.integers(0, 5), min_size=n, max_size=n),
            )
        )
    )
)
def test_against_scipy(data):
    A, x0, c = data
    b = [sum(a * x for a, x in zip(row, x0)) for row in A]
    # bounded by adding sum x <= 20
    A_ub, b_ub = [[1] * len(x0)], [20]
    res = solve_lp(c, A, b, A_ub=A_ub, b_ub=b_ub)
    assert res.status == "optimal"
    assert all(v >= 0 for v in res.x)
    assert all(sum(a * x for a, x in zip(row, res.x)) == bi for row, bi in zip(A, b))
    ref = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A, b_eq=b, bounds=[(0, None)] * len(x0), method="highs")
    assert ref.status == 0
    assert float(res.value) == pytest.approx(ref.fun, abs=1e-7)


@given(st.lists(st.lists(st.integers(-2, 2), min_size=3, max_size=3), min_size=2, max_size=4), st.lists(st.integers(-3, 3), min_size=4, max_size=4))
def test_feasibility_certificates(A, b):
    b = b[: len(A)]
    res = solve_lp(None, A, b, n=3)
    if res.feasible:
        assert all(v >= 0 for v in res.x)
        assert all(sum(a * x for a, x in zip(row, res.x)) == bi for row, bi in zip(A, b))
    else:
        y = res.farkas
        assert all(sum(y[i] * A[i][j] for i in range(len(A))) <= 0 for j in range(3))
        assert sum(yi * bi for yi, bi in zip(y, b)) > 0
        ref = linprog(np.zeros(3), A_eq=A, b_eq=b, bounds=[(0, None)] * 3, method="highs")
        assert ref.status == 2
