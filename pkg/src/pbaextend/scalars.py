"""Scalar handling: exact rationals by default, floats with an absolute tolerance."""
from __future__ import annotations

from fractions import Fraction
from numbers import Rational

FLOAT_TOL = 1e-9


def is_exact(x) -> bool:
    return isinstance(x, Rational)


def tol_for(values, tol=None) -> float:
    """Tolerance to use for comparisons among ``values``: 0 when all are exact."""
    if tol is not None:
        return tol
    return 0 if all(is_exact(v) for v in values) else FLOAT_TOL


def close(a, b, tol=0) -> bool:
    if tol == 0:
        return a == b
    return abs(a - b) <= tol


def to_scalar(x, arithmetic="exact"):
    """Coerce JSON-ish input ("1/3", 0.5, 1) into the scalar type for ``arithmetic``."""
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if arithmetic == "float":
        return float(Fraction(x)) if isinstance(x, str) else float(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, float):
        # binary floats convert exactly; users wanting 1/10 should write "1/10"
        return Fraction(x)
    if isinstance(x, Rational):
        return Fraction(x)
    raise TypeError(f"cannot interpret {x!r} as a scalar")


def format_scalar(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    if isinstance(x, int):
        return str(x)
    return float(x)


def snap(x: float, max_denominator: int) -> Fraction:
    """Nearest rational with bounded denominator (explicit opt-in for float data)."""
    return Fraction(x).limit_denominator(max_denominator)
