"""Coefficient algebra for palindromic three-stage splitting methods.

A method of the family is a point (a, b) of the real plane.  One time step
of length h composes exact flows of the two split systems in the
palindromic pattern

    B((1/2-a)h)  A(bh)  B(ah)  A((1-2b)h)  B(ah)  A(bh)  B((1/2-a)h)

(read left to right in execution order).  This module knows nothing about
flows; it handles the pure algebra of the family: the leading error
coefficients alpha and beta of the modified equation, the special curves
of the (a, b) plane, the named methods from the literature, and the
classification of degenerate parameter choices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

__all__ = [
    "MethodCoefficients",
    "MethodDescriptor",
    "DegeneracyKind",
    "CurveResiduals",
    "error_coefficients",
    "curve_residuals",
    "classify_degeneracy",
    "stage_increments",
    "named_method",
    "method_names",
    "method_registry",
    "NAMED_METHODS",
]

# Common coefficient of the order-four method and of the maximal-stability
# effective-order-four method: the real root of 48 x^3 - 24 x^2 + 1 = 0,
# in closed form (1 - 2^(1/3) - 2^(-1/3)) / 6.
_ORDER4_A = (1.0 - 2.0 ** (1.0 / 3.0) - 2.0 ** (-1.0 / 3.0)) / 6.0

# Intersection of the long-stability hyperbola a + b - 6ab = 0 with the
# enhanced-energy curve a^2 b - a b^2 + ab - 1/8 = 0: eliminating b gives
# 48 a^4 + 32 a^3 - 44 a^2 + 12 a - 1 = 0, whose relevant root is below.
# Stored at full double precision so that both residuals vanish to
# round-off; the literature quotes (0.391, 0.290).
_PRETAL_A = 0.39100857459657457

# Hyperbola method with near-minimal expected energy error for finite h;
# the quoted a is kept and b is placed exactly on the hyperbola.
_BLCASA_A = 0.381


def _hyperbola_b(a: float) -> float:
    """b such that (a, b) lies exactly on a + b - 6ab = 0."""
    return a / (6.0 * a - 1.0)


@dataclass(frozen=True)
class MethodCoefficients:
    """Parameter pair (a, b) selecting one member of the family.

    Both entries are dimensionless fractions of the step size h.  Negative
    values are legal (the order-four and effective-order-four methods use
    them); they merely require split flows that can run backward in time.
    """

    a: float
    b: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise ValueError(f"coefficients must be finite, got ({self.a}, {self.b})")


def error_coefficients(coeffs: MethodCoefficients) -> tuple[float, float]:
    """Leading modified-equation coefficients (alpha, beta).

    The map of one step formally equals the h-flow of a modified field
    A + B + h^2 alpha [A,[A,B]] + h^2 beta [B,[A,B]] + O(h^4), with

        alpha = a^2 b - 1/24,       beta = -a b^2 + ab - 1/12.

    alpha = beta = 0 only at the order-four (Yoshida) coefficients;
    alpha = beta gives effective order four (order four after processing);
    alpha = -beta gives enhanced energy conservation for quadratic
    Hamiltonians.
    """
    a, b = coeffs.a, coeffs.b
    alpha = a * a * b - 1.0 / 24.0
    beta = -a * b * b + a * b - 1.0 / 12.0
    return alpha, beta


class CurveResiduals(NamedTuple):
    """Left-hand sides of the four special curves of the (a, b) plane."""

    effective4: float  # ab(a+b-1) + 1/24 = 0       <=> alpha = beta
    energy: float      # a^2 b - a b^2 + ab - 1/8 = 0 <=> alpha = -beta
    hyperbola: float   # a + b - 6ab = 0              (long stability)
    quartic: float     # -12a^2b^2 + 8a^2b + 8ab^2 - 6ab + 1/4 = 0


def curve_residuals(coeffs: MethodCoefficients) -> CurveResiduals:
    """Evaluate the four curve residuals at (a, b).

    A point lies on a curve iff the corresponding residual is within the
    caller's tolerance; no thresholding is applied here.
    """
    a, b = coeffs.a, coeffs.b
    ab = a * b
    return CurveResiduals(
        effective4=ab * (a + b - 1.0) + 1.0 / 24.0,
        energy=a * a * b - a * b * b + ab - 1.0 / 8.0,
        hyperbola=a + b - 6.0 * ab,
        quartic=-12.0 * ab * ab + 8.0 * a * ab + 8.0 * b * ab - 6.0 * ab + 0.25,
    )


class DegeneracyKind(Enum):
    """How a parameter choice collapses to fewer than three stages."""

    THREE_STAGE = "ThreeStage"
    STRANG_EQUIVALENT_A_ZERO = "StrangEquivalent_aZero"
    STRANG_EQUIVALENT_B_ZERO = "StrangEquivalent_bZero"
    TWO_STAGE_A_HALF = "TwoStage_aHalf"
    TWO_STAGE_B_HALF = "TwoStage_bHalf"
    POSITION_VERLET_BOTH_HALF = "PositionVerlet_bothHalf"
    TRIPLE_STRANG = "TripleStrang"
    DOUBLE_STRANG = "DoubleStrang"
    DOUBLE_POSITION_VERLET = "DoublePositionVerlet"


def classify_degeneracy(coeffs: MethodCoefficients, tol: float = 1e-12) -> DegeneracyKind:
    """Classify (a, b) into exactly one degeneracy kind.

    More specific conditions win: a = 0 or b = 0 collapse to a single
    Strang step regardless of the other parameter; (1/2, 1/2) is one
    position-Verlet step; (1/4, 1/2) reproduces two Strang half-steps and
    (1/2, 1/4) two position-Verlet half-steps; (1/3, 1/3) is three Strang
    steps of length h/3; a = 1/2 or b = 1/2 alone give two-stage methods.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    a, b = coeffs.a, coeffs.b

    def near(x: float, v: float) -> bool:
        return abs(x - v) <= tol

    if near(a, 0.0):
        return DegeneracyKind.STRANG_EQUIVALENT_A_ZERO
    if near(b, 0.0):
        return DegeneracyKind.STRANG_EQUIVALENT_B_ZERO
    if near(a, 0.5) and near(b, 0.5):
        return DegeneracyKind.POSITION_VERLET_BOTH_HALF
    if near(a, 0.25) and near(b, 0.5):
        return DegeneracyKind.DOUBLE_STRANG
    if near(a, 0.5) and near(b, 0.25):
        return DegeneracyKind.DOUBLE_POSITION_VERLET
    if near(a, 0.5):
        return DegeneracyKind.TWO_STAGE_A_HALF
    if near(b, 0.5):
        return DegeneracyKind.TWO_STAGE_B_HALF
    if near(a, 1.0 / 3.0) and near(b, 1.0 / 3.0):
        return DegeneracyKind.TRIPLE_STRANG
    return DegeneracyKind.THREE_STAGE


def stage_increments(coeffs: MethodCoefficients) -> tuple[tuple[float, ...], bool]:
    """Seven stage time fractions, plus an all-positive flag.

    Returns ((1/2-a, b, a, 1-2b, a, b, 1/2-a), all_positive) in execution
    order; the odd entries belong to the A chain (sum 1), the even ones to
    the B chain (sum 1).  All increments are strictly positive iff
    0 < a < 1/2 and 0 < b < 1/2; methods outside that square need split
    flows that support negative time.
    """
    a, b = coeffs.a, coeffs.b
    incr = (0.5 - a, b, a, 1.0 - 2.0 * b, a, b, 0.5 - a)
    all_positive = 0.0 < a < 0.5 and 0.0 < b < 0.5
    return incr, all_positive


@dataclass(frozen=True)
class MethodDescriptor:
    """A named member of the family with its derived error coefficients.

    ``lam`` is the processing coefficient; it is defined (non-None) only
    for effective-order-four methods, i.e. when alpha = beta, and then
    equals their common value.
    """

    name: str
    coeffs: MethodCoefficients
    alpha: float
    beta: float
    lam: float | None
    provenance: str

    def validate(self, tol: float = 1e-15) -> None:
        """Check stored alpha/beta/lam against the coefficient formulas."""
        alpha, beta = error_coefficients(self.coeffs)
        if abs(alpha - self.alpha) > tol or abs(beta - self.beta) > tol:
            raise ValueError(f"{self.name}: stored error coefficients are stale")
        if abs(alpha - beta) < 1e-12:
            if self.lam is None or abs(self.lam - alpha) > 1e-12:
                raise ValueError(f"{self.name}: lam must equal alpha = beta")
        elif self.lam is not None:
            raise ValueError(f"{self.name}: lam defined but alpha != beta")

    def as_dict(self) -> dict:
        """JSON-ready registry entry {name, a, b, alpha, beta, lambda?}."""
        entry = {
            "name": self.name,
            "a": self.coeffs.a,
            "b": self.coeffs.b,
            "alpha": self.alpha,
            "beta": self.beta,
        }
        if self.lam is not None:
            entry["lambda"] = self.lam
        return entry


def _descriptor(name: str, a: float, b: float, provenance: str) -> MethodDescriptor:
    coeffs = MethodCoefficients(a, b)
    alpha, beta = error_coefficients(coeffs)
    lam = alpha if abs(alpha - beta) < 1e-12 else None
    return MethodDescriptor(name, coeffs, alpha, beta, lam, provenance)


NAMED_METHODS: dict[str, MethodDescriptor] = {
    d.name: d
    for d in (
        _descriptor(
            "Strang",
            1.0 / 3.0,
            1.0 / 3.0,
            "three Strang/velocity-Verlet steps of length h/3; longest stability interval",
        ),
        _descriptor(
            "Yoshida",
            _ORDER4_A,
            1.0 - 2.0 * _ORDER4_A,
            "unique order-four member (Yoshida; also Forest-Ruth, Candy-Rozmus)",
        ),
        _descriptor(
            "LoSaSk",
            _ORDER4_A,
            _ORDER4_A,
            "Lopez-Marcos, Sanz-Serna & Skeel: effective order four with maximal stability",
        ),
        _descriptor(
            "PrEtAl",
            _PRETAL_A,
            _hyperbola_b(_PRETAL_A),
            "Predescu et al.: hyperbola method with enhanced small-h energy conservation",
        ),
        _descriptor(
            "BlCaSa",
            _BLCASA_A,
            _hyperbola_b(_BLCASA_A),
            "Blanes, Casas & Sanz-Serna: hyperbola method tuned for finite step sizes",
        ),
        _descriptor(
            "Verlet1Stage",
            0.5,
            0.5,
            "one-stage position Verlet",
        ),
    )
}


def named_method(name: str) -> MethodDescriptor:
    """Look up a built-in method by name.

    Known names: Strang, Yoshida, LoSaSk, PrEtAl, BlCaSa, Verlet1Stage.
    """
    try:
        return NAMED_METHODS[name]
    except KeyError:
        known = ", ".join(sorted(NAMED_METHODS))
        raise ValueError(f"unknown method {name!r}; known methods: {known}") from None


def method_names() -> tuple[str, ...]:
    return tuple(NAMED_METHODS)


def method_registry() -> list[dict]:
    """JSON-serializable registry of all named methods."""
    return [NAMED_METHODS[name].as_dict() for name in NAMED_METHODS]
