"""Exact finite-h stability theory on the harmonic oscillator.

One step of a method applied to q' = p, p' = -q is the 2x2 matrix
M_h = [[A_h, B_h], [C_h, A_h]] with unit determinant.  The half trace
A_h, viewed as a cubic polynomial in z = h^2,

    A_h(z) = 1 - z/2 + ab(1-a-b) z^2 - 2 a^2 b^2 (1/2-a)(1/2-b) z^3,

decides stability: powers of M_h stay bounded while |A_h| < 1, and also
at parameter values where the matrix degenerates to +-I (double roots of
A_h = +-1, where the graph is tangent to the horizontal lines).  The
stability interval (0, h_max) therefore ends at the first *crossing* of
+-1, not at tangencies; its length jumps discontinuously across the
hyperbola a + b - 6ab = 0, on which A_h = -1 acquires a double root.

The explicit seven-shear product (``amplification_matrix``) is the
authoritative oracle; the closed-form cubic is checked against it.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .integrator import POSITION_VERLET_PLAN, STRANG_PLAN, Stage, stage_plan
from .methods import MethodCoefficients, curve_residuals

__all__ = [
    "T_AS_A",
    "T_AS_B",
    "amplification_matrix",
    "plan_amplification_matrix",
    "stability_polynomial",
    "stability_polynomial_coeffs",
    "stability_polynomial_deriv",
    "RootEvent",
    "SignEvent",
    "StabilityReport",
    "stability_interval",
    "DiscriminantFactors",
    "discriminant_factors",
    "RegionInfo",
    "classify_region",
    "MapRow",
    "stability_map",
    "stability_map_csv",
    "STABILITY_MAP_HEADER",
]

T_AS_A = "T-as-A"  # kinetic flow plays role A: A stages drift, B stages kick
T_AS_B = "T-as-B"  # roles interchanged

_Z_EPS = 1e-9          # roots below this z count as the consistency root
_TOUCH_TOL = 1e-9      # |A(z_e) -+ 1| <= tol*(1+z_e) registers a tangency
_DERIV_TOL = 1e-9      # spec of tangency in terms of |dA/dz| at a root


def _drift(t: float) -> np.ndarray:
    return np.array([[1.0, t], [0.0, 1.0]])


def _kick(t: float) -> np.ndarray:
    return np.array([[1.0, 0.0], [-t, 1.0]])


def plan_amplification_matrix(
    plan: Sequence[Stage], h: float, role: str = T_AS_A
) -> np.ndarray:
    """Product of shear matrices for an arbitrary stage plan."""
    if role not in (T_AS_A, T_AS_B):
        raise ValueError(f"role must be {T_AS_A!r} or {T_AS_B!r}, got {role!r}")
    a_shear, b_shear = (_drift, _kick) if role == T_AS_A else (_kick, _drift)
    m = np.eye(2)
    for stage in plan:
        shear = a_shear if stage.flow == "a" else b_shear
        m = shear(stage.fraction * h) @ m
    return m


def amplification_matrix(
    coeffs: MethodCoefficients, h: float, role: str = T_AS_A
) -> np.ndarray:
    """One-step matrix on the harmonic oscillator: seven explicit shears.

    Entries are [[A_h, B_h], [C_h, A_h]]; the determinant is 1 exactly up
    to round-off.  Swapping the role leaves the trace unchanged and maps
    B_h, C_h to -C_h, -B_h.
    """
    return plan_amplification_matrix(stage_plan(coeffs), h, role)


def stability_polynomial_coeffs(coeffs: MethodCoefficients) -> tuple[float, float, float, float]:
    """(c0, c1, c2, c3) of A_h(z) = c0 + c1 z + c2 z^2 + c3 z^3."""
    a, b = coeffs.a, coeffs.b
    c2 = a * b * (1.0 - a - b)
    c3 = -2.0 * a * a * b * b * (0.5 - a) * (0.5 - b)
    return 1.0, -0.5, c2, c3


def stability_polynomial(coeffs: MethodCoefficients, z):
    """Half trace of the amplification matrix as a polynomial in z = h^2."""
    _, c1, c2, c3 = stability_polynomial_coeffs(coeffs)
    z = np.asarray(z, dtype=float)
    val = 1.0 + z * (c1 + z * (c2 + z * c3))
    return float(val) if val.ndim == 0 else val


def stability_polynomial_deriv(coeffs: MethodCoefficients, z):
    """dA_h/dz."""
    _, c1, c2, c3 = stability_polynomial_coeffs(coeffs)
    z = np.asarray(z, dtype=float)
    val = c1 + z * (2.0 * c2 + z * 3.0 * c3)
    return float(val) if val.ndim == 0 else val


@dataclass(frozen=True)
class RootEvent:
    """A_h(z) = value at z, either crossed or touched (double root)."""

    z: float
    value: int        # +1 or -1
    kind: str         # "crossing" | "tangency"


@dataclass(frozen=True)
class SignEvent:
    """Entry of the +-1 sequence met as z increases from 0."""

    value: int
    kind: str         # "consistency" | "crossing" | "tangency"
    z: float
    loss: bool        # True on the crossing that ends stability


@dataclass(frozen=True)
class StabilityReport:
    """Root structure of A_h = +-1 and the resulting stability interval."""

    coeffs: MethodCoefficients
    z_roots_plus: tuple[RootEvent, ...]
    z_roots_minus: tuple[RootEvent, ...]
    sign_sequence: tuple[SignEvent, ...]
    h_max: float

    def as_dict(self) -> dict:
        return {
            "a": self.coeffs.a,
            "b": self.coeffs.b,
            "h_max": self.h_max,
            "z_roots_plus": [
                {"z": e.z, "kind": e.kind} for e in self.z_roots_plus
            ],
            "z_roots_minus": [
                {"z": e.z, "kind": e.kind} for e in self.z_roots_minus
            ],
            "sign_sequence": [
                {"value": e.value, "kind": e.kind, "z": e.z, "loss": e.loss}
                for e in self.sign_sequence
            ],
        }

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps(self.as_dict(), indent=indent)


def _real_roots(poly_desc: list[float]) -> list[float]:
    """Real roots of a polynomial given by descending coefficients.

    Leading zeros are trimmed.  Near-real companion-matrix eigenvalues are
    accepted (a perturbed double root may acquire a tiny imaginary part)
    and simple roots are polished by Newton iterations.
    """
    coeffs = list(poly_desc)
    while coeffs and coeffs[0] == 0.0:
        coeffs.pop(0)
    if len(coeffs) <= 1:
        return []
    roots = np.roots(coeffs)
    deriv = np.polyder(np.asarray(coeffs))
    out = []
    for r in roots:
        if abs(r.imag) > 1e-6 * (1.0 + abs(r.real)):
            continue
        x = float(r.real)
        for _ in range(4):
            d = float(np.polyval(deriv, x))
            if abs(d) < 1e-14:
                break
            x -= float(np.polyval(coeffs, x)) / d
        out.append(x)
    return out


def _plus_one_roots(q2: float, c3: float) -> list[float]:
    # A_h(z) = 1 deflated by the consistency root z = 0:
    # c3 z^2 + q2 z - 1/2 = 0
    return _real_roots([c3, q2, -0.5])


def _minus_one_roots(q2: float, c3: float) -> list[float]:
    # A_h(z) = -1: c3 z^3 + q2 z^2 - z/2 + 2 = 0
    return _real_roots([c3, q2, -0.5, 2.0])


def _extrema(q2: float, c3: float) -> list[float]:
    # dA/dz = 3 c3 z^2 + 2 q2 z - 1/2 = 0
    return _real_roots([3.0 * c3, 2.0 * q2, -0.5])


def stability_interval(coeffs: MethodCoefficients, z_cap: float = 60.0) -> StabilityReport:
    """Locate all A_h = +-1 events for z > 0 and the stability bound.

    Double roots (tangencies) are detected at the extrema of A_h, where
    the touch residual |A_h(z_e) -+ 1| is a well-conditioned quantity,
    rather than by clustering companion-matrix roots; the simple roots are
    classified as crossings via |dA_h/dz| > 1e-9 (1 + |z|).  h_max is the
    square root of the first crossing: tangencies (amplification matrix
    +-I) do not end stability.  Root lists are capped at z_cap.
    """
    _, _, q2, c3 = stability_polynomial_coeffs(coeffs)
    ah = lambda z: stability_polynomial(coeffs, z)
    dah = lambda z: stability_polynomial_deriv(coeffs, z)

    events: list[RootEvent] = []
    for value, roots in ((1, _plus_one_roots(q2, c3)), (-1, _minus_one_roots(q2, c3))):
        roots = [z for z in roots if z > _Z_EPS]
        # tangencies live at extrema of A_h that touch the line
        touches = []
        for z_e in _extrema(q2, c3):
            if z_e > _Z_EPS and abs(ah(z_e) - value) <= _TOUCH_TOL * (1.0 + abs(z_e)):
                touches.append(z_e)
                events.append(RootEvent(z=z_e, value=value, kind="tangency"))
        # drop the (possibly split or complex-shifted) double-root pair
        for z in roots:
            if any(abs(z - z_e) <= 1e-3 * (1.0 + z_e) for z_e in touches):
                continue
            kind = "tangency" if abs(dah(z)) < _DERIV_TOL * (1.0 + abs(z)) else "crossing"
            events.append(RootEvent(z=z, value=value, kind=kind))

    events.sort(key=lambda e: e.z)

    h_max = math.inf
    loss_z = math.inf
    for e in events:
        if e.kind == "crossing":
            loss_z = e.z
            h_max = math.sqrt(e.z)
            break
    if not math.isfinite(h_max):
        raise RuntimeError(
            f"no stability-ending crossing found for (a, b) = "
            f"({coeffs.a}, {coeffs.b}); root isolation failed"
        )

    sequence = [SignEvent(value=1, kind="consistency", z=0.0, loss=False)]
    for e in events:
        if e.z > loss_z + _Z_EPS:
            break
        sequence.append(
            SignEvent(value=e.value, kind=e.kind, z=e.z, loss=(e.kind == "crossing" and e.z == loss_z))
        )

    capped = lambda evs, v: tuple(
        sorted((e for e in evs if e.value == v and e.z <= z_cap), key=lambda e: e.z)
    )
    return StabilityReport(
        coeffs=coeffs,
        z_roots_plus=capped(events, 1),
        z_roots_minus=capped(events, -1),
        sign_sequence=tuple(sequence),
        h_max=h_max,
    )


class DiscriminantFactors(NamedTuple):
    """Factored discriminant of the cubic A_h(z) = -1.

    The discriminant is proportional to ab (a + b - 6ab) times the
    quartic; ``product`` is that full product.  It vanishes on the
    hyperbola (double root that stays double on both sides) and on the
    quartic curve (where a real double root turns into a complex pair).
    """

    product: float
    hyperbola: float
    quartic: float


def discriminant_factors(coeffs: MethodCoefficients) -> DiscriminantFactors:
    res = curve_residuals(coeffs)
    ab = coeffs.a * coeffs.b
    return DiscriminantFactors(
        product=ab * res.hyperbola * res.quartic,
        hyperbola=res.hyperbola,
        quartic=res.quartic,
    )


@dataclass(frozen=True)
class RegionInfo:
    """Region id (1..9, None on a partition boundary) plus boundary flags."""

    region: int | None
    boundary: tuple[str, ...]


def classify_region(a: float, b: float, tol: float = 1e-12) -> RegionInfo:
    """Classify (a, b) into one of nine regions of the representative
    half-plane a >= b (points with a < b are classified by symmetry, since
    A_h is symmetric in a and b).

    The partition is generated by the lines a, b in {0, 1/2} and by the
    quartic curve; the region determines the qualitative shape of A_h(z).
    Numbering, for the sorted pair (hi, lo) with hi >= lo:

        1: hi < 0, lo < 0, quartic < 0   (outer third quadrant)
        2: hi < 0, lo < 0, quartic > 0   (near the origin)
        3: 0 < hi < 1/2, lo < 0
        4: hi > 1/2, lo < 0, quartic > 0
        5: hi > 1/2, lo < 0, quartic < 0
        6: 0 < lo <= hi < 1/2            (central square)
        7: hi > 1/2, 0 < lo < 1/2
        8: hi > 1/2, lo > 1/2, quartic > 0
        9: hi > 1/2, lo > 1/2, quartic < 0

    Points on a partition line or on the quartic are not forced into a
    region: region is None and the boundary flags say which curves were
    hit.  The diagonal a = b is flagged but still classified.
    """
    flags: list[str] = []
    if abs(a - b) <= tol:
        flags.append("diagonal")
    for name, val in (("a", a), ("b", b)):
        if abs(val) <= tol:
            flags.append(f"{name}=0")
        if abs(val - 0.5) <= tol:
            flags.append(f"{name}=1/2")
    quartic = curve_residuals(MethodCoefficients(a, b)).quartic
    if abs(quartic) <= tol:
        flags.append("quartic")

    on_partition = any(f != "diagonal" for f in flags)
    if on_partition:
        return RegionInfo(region=None, boundary=tuple(flags))

    hi, lo = (a, b) if a >= b else (b, a)
    if hi < 0.0:
        region = 1 if quartic < 0.0 else 2
    elif lo < 0.0:
        if hi < 0.5:
            region = 3
        else:
            region = 4 if quartic > 0.0 else 5
    elif hi < 0.5:
        region = 6
    elif lo < 0.5:
        region = 7
    else:
        region = 8 if quartic > 0.0 else 9
    return RegionInfo(region=region, boundary=tuple(flags))


@dataclass(frozen=True)
class MapRow:
    a: float
    b: float
    h_max: float
    region: int          # 0 when the point sits on a partition boundary
    eff4_res: float
    energy_res: float
    hyp_res: float
    quartic_res: float


STABILITY_MAP_HEADER = "a,b,h_max,region,eff4_res,energy_res,hyp_res,quartic_res"


def stability_map(
    a_range: tuple[float, float],
    b_range: tuple[float, float],
    resolution: int,
) -> list[MapRow]:
    """Rasterize h_max, region id and curve residuals over a grid.

    ``resolution`` points per axis (>= 2).  An empty range (lo > hi on
    either axis) yields an empty table.
    """
    if resolution < 2:
        raise ValueError(f"resolution must be >= 2 per axis, got {resolution}")
    a_lo, a_hi = a_range
    b_lo, b_hi = b_range
    if a_lo > a_hi or b_lo > b_hi:
        return []
    rows = []
    for a in np.linspace(a_lo, a_hi, resolution):
        for b in np.linspace(b_lo, b_hi, resolution):
            coeffs = MethodCoefficients(float(a), float(b))
            res = curve_residuals(coeffs)
            report = stability_interval(coeffs)
            info = classify_region(float(a), float(b))
            rows.append(
                MapRow(
                    a=float(a),
                    b=float(b),
                    h_max=report.h_max,
                    region=info.region if info.region is not None else 0,
                    eff4_res=res.effective4,
                    energy_res=res.energy,
                    hyp_res=res.hyperbola,
                    quartic_res=res.quartic,
                )
            )
    return rows


def stability_map_csv(rows: Sequence[MapRow]) -> str:
    """Render map rows as CSV with the stable column header."""
    lines = [STABILITY_MAP_HEADER]
    for r in rows:
        lines.append(
            f"{r.a:.17g},{r.b:.17g},{r.h_max:.17g},{r.region},"
            f"{r.eff4_res:.17g},{r.energy_res:.17g},{r.hyp_res:.17g},{r.quartic_res:.17g}"
        )
    return "\n".join(lines) + "\n"
