import json

import numpy as np
import pytest

from trisplit.methods import MethodCoefficients, curve_residuals, named_method
from trisplit.stability import (
    STABILITY_MAP_HEADER,
    T_AS_A,
    T_AS_B,
    amplification_matrix,
    classify_region,
    discriminant_factors,
    stability_interval,
    stability_map,
    stability_map_csv,
    stability_polynomial,
    stability_polynomial_coeffs,
    stability_polynomial_deriv,
)

GENERIC = MethodCoefficients(0.2, 0.3)


def half_trace(coeffs, z, role=T_AS_A):
    m = amplification_matrix(coeffs, float(np.sqrt(z)), role)
    return 0.5 * (m[0, 0] + m[1, 1])


def test_polynomial_consistency_at_zero():
    for coeffs in (GENERIC, named_method("Yoshida").coeffs, MethodCoefficients(-0.3, 0.9)):
        assert stability_polynomial(coeffs, 0.0) == 1.0


def test_polynomial_matches_strang_closed_form():
    # (1/3, 1/3): A(z) = 1 - z/2 + z^2/27 - z^3/1458, the Chebyshev
    # cos(3 arccos(1 - z/18)) of three fused half-steps
    coeffs = MethodCoefficients(1 / 3, 1 / 3)
    c = stability_polynomial_coeffs(coeffs)
    assert c == pytest.approx((1.0, -0.5, 1 / 27, -1 / 1458), abs=1e-16)
    assert stability_polynomial(coeffs, 36.0) == pytest.approx(-1.0, abs=1e-12)
    z = np.linspace(0.0, 36.0, 50)
    cheb = np.cos(3 * np.arccos(1 - z / 18))
    assert np.max(np.abs(stability_polynomial(coeffs, z) - cheb)) < 1e-12


def test_polynomial_half_stages_drop_cubic_term():
    # (1/2, 1/4): two fused half-steps, A(z) = 1 - z/2 + z^2/32
    coeffs = MethodCoefficients(0.5, 0.25)
    c = stability_polynomial_coeffs(coeffs)
    assert c == pytest.approx((1.0, -0.5, 1 / 32, 0.0), abs=1e-16)
    for z in (2.0, 7.5, 20.0):
        assert stability_polynomial(coeffs, z) == pytest.approx(
            half_trace(coeffs, z), abs=1e-12
        )


def test_polynomial_oracle_grid():
    # closed form against the seven-shear product over the full window;
    # scaled by 1 + |A| because the polynomial reaches ~1e5 at the grid
    # corners, where an absolute f64 bound below one ulp is meaningless
    a_vals = np.linspace(-0.5, 1.5, 21)
    b_vals = np.linspace(-0.5, 1.5, 21)
    z_vals = np.linspace(0.0, 40.0, 10)
    worst_scaled = 0.0
    worst_moderate = 0.0
    for a in a_vals:
        for b in b_vals:
            coeffs = MethodCoefficients(float(a), float(b))
            for z in z_vals:
                tr = half_trace(coeffs, z)
                d = abs(stability_polynomial(coeffs, z) - tr)
                worst_scaled = max(worst_scaled, d / (1.0 + abs(tr)))
                if abs(tr) <= 2.0:
                    worst_moderate = max(worst_moderate, d)
    assert worst_scaled < 1e-11
    assert worst_moderate < 1e-11


def test_amplification_determinant_and_structure(rng):
    # h sampled up to 1: the 1e-13 bound is an f64 round-off budget and
    # the matrix entries grow with c3 h^6 beyond the stability range
    for _ in range(200):
        a, b = rng.uniform(-0.5, 1.5, size=2)
        h = rng.uniform(0.01, 1.0)
        m = amplification_matrix(MethodCoefficients(a, b), h)
        assert abs(np.linalg.det(m) - 1.0) < 1e-13
        assert m[0, 0] == pytest.approx(m[1, 1], abs=1e-13)  # palindromic: equal diagonal


def test_role_swap_trace_invariant(rng):
    for _ in range(20):
        a, b = rng.uniform(-0.5, 1.5, size=2)
        h = rng.uniform(0.05, 2.0)
        coeffs = MethodCoefficients(a, b)
        m1 = amplification_matrix(coeffs, h, T_AS_A)
        m2 = amplification_matrix(coeffs, h, T_AS_B)
        assert np.trace(m1) == pytest.approx(np.trace(m2), abs=1e-13)
        # off-diagonals swap (with sign): B' = -C, C' = -B
        assert m2[0, 1] == pytest.approx(-m1[1, 0], abs=1e-13)
        assert m2[1, 0] == pytest.approx(-m1[0, 1], abs=1e-13)


def test_symmetry_in_a_b(rng):
    # the half trace is symmetric under (a, b) -> (b, a)
    for _ in range(20):
        a, b = rng.uniform(-0.5, 1.5, size=2)
        z = rng.uniform(0.0, 40.0)
        assert stability_polynomial(MethodCoefficients(a, b), z) == pytest.approx(
            stability_polynomial(MethodCoefficients(b, a), z), rel=1e-12, abs=1e-12
        )


def test_strang_stability_interval():
    report = stability_interval(MethodCoefficients(1 / 3, 1 / 3))
    assert report.h_max == pytest.approx(6.0, abs=1e-8)
    seq = [(e.value, e.kind) for e in report.sign_sequence]
    assert seq == [
        (1, "consistency"),
        (-1, "tangency"),
        (1, "tangency"),
        (-1, "crossing"),
    ]
    assert report.sign_sequence[-1].loss
    assert report.sign_sequence[1].z == pytest.approx(9.0, abs=1e-9)
    assert report.sign_sequence[2].z == pytest.approx(27.0, abs=1e-9)


def test_verlet_stability_interval():
    report = stability_interval(MethodCoefficients(0.5, 0.5))
    assert report.h_max == pytest.approx(2.0, abs=1e-8)
    assert report.sign_sequence[-1].value == -1


def test_yoshida_short_stability_interval():
    report = stability_interval(named_method("Yoshida").coeffs)
    assert report.h_max < 2.0
    assert report.h_max < 6.0 / 3.0  # less than a third of Strang's


def test_pretal_blcasa_tangency_then_plus_one_loss():
    for name in ("PrEtAl", "BlCaSa"):
        coeffs = named_method(name).coeffs
        report = stability_interval(coeffs)
        tangencies = [e for e in report.z_roots_minus if e.kind == "tangency"]
        assert len(tangencies) == 1, name
        z_t = tangencies[0].z
        assert 7.0 < z_t < 11.0  # near z = 9
        # double-root residual at the tangency
        assert abs(stability_polynomial(coeffs, z_t) + 1.0) < 1e-9
        assert abs(stability_polynomial_deriv(coeffs, z_t)) < 1e-9 * (1 + z_t)
        loss = report.sign_sequence[-1]
        assert loss.loss and loss.value == 1
        assert 15.0 < loss.z < 25.0  # near z = 20


def test_losask_loses_at_minus_one_near_30():
    report = stability_interval(named_method("LoSaSk").coeffs)
    loss = report.sign_sequence[-1]
    assert loss.value == -1
    assert 25.0 < loss.z < 35.0
    # the +1 line is touched earlier (double root on the diagonal)
    touches = [e for e in report.z_roots_plus if e.kind == "tangency"]
    assert len(touches) == 1


def test_diagonal_plus_one_double_root(rng):
    # a = b away from degeneracies: A = 1 has a double positive root
    for a in (0.25, 0.4, -0.2):
        report = stability_interval(MethodCoefficients(a, a))
        touches = [e for e in report.z_roots_plus if e.kind == "tangency"]
        assert len(touches) == 1, a
        z_t = touches[0].z
        assert abs(stability_polynomial(MethodCoefficients(a, a), z_t) - 1.0) < 1e-9
        assert abs(stability_polynomial_deriv(MethodCoefficients(a, a), z_t)) < 1e-9 * (1 + z_t)


def test_hyperbola_minus_one_double_root(rng):
    # on a + b = 6ab and off the degenerate lines, A = -1 has a double root
    for a in (0.45, 0.39, 0.35):
        coeffs = MethodCoefficients(a, a / (6 * a - 1))
        report = stability_interval(coeffs)
        touches = [e for e in report.z_roots_minus if e.kind == "tangency"]
        assert len(touches) == 1, a


def test_near_strang_point_two_minus_one_crossings():
    # just off the hyperbola the tangency splits into two crossings near
    # z = 9 and stability is lost at the first of them
    report = stability_interval(MethodCoefficients(0.34, 0.32))
    near9 = [e for e in report.z_roots_minus if 7.0 < e.z < 11.0]
    assert len(near9) == 2
    assert all(e.kind == "crossing" for e in near9)
    assert report.sign_sequence[-1].value == -1
    assert report.h_max == pytest.approx(np.sqrt(near9[0].z), abs=1e-12)
    assert 2.5 < report.h_max < 3.5


def test_powers_bounded_inside_unbounded_outside():
    coeffs = MethodCoefficients(1 / 3, 1 / 3)
    inside = np.linalg.matrix_power(amplification_matrix(coeffs, 5.9), 64)
    outside = np.linalg.matrix_power(amplification_matrix(coeffs, 6.1), 64)
    assert np.max(np.abs(inside)) < 50.0
    assert np.max(np.abs(outside)) > 1e3


def test_eigenvalue_criterion_inside_interval(rng):
    for coeffs in (GENERIC, named_method("BlCaSa").coeffs):
        report = stability_interval(coeffs)
        for frac in (0.3, 0.9):
            z = (frac * report.h_max) ** 2
            assert abs(stability_polynomial(coeffs, z)) <= 1.0 + 1e-12


def test_discriminant_factors():
    f = discriminant_factors(MethodCoefficients(1 / 3, 1 / 3))
    assert f.hyperbola == 0.0
    assert f.product == 0.0
    f = discriminant_factors(named_method("BlCaSa").coeffs)
    assert abs(f.hyperbola) < 1e-15
    f = discriminant_factors(GENERIC)
    assert f.hyperbola != 0.0 and f.quartic != 0.0
    # the factored form matches the polynomial discriminant of A = -1:
    # 18abcd - 4b^3d + b^2c^2 - 4ac^3 - 27a^2d^2
    _, _, q2, c3 = stability_polynomial_coeffs(GENERIC)
    a3, b3, c3_, d3 = c3, q2, -0.5, 2.0
    disc = (
        18 * a3 * b3 * c3_ * d3
        - 4 * b3**3 * d3
        + b3**2 * c3_**2
        - 4 * a3 * c3_**3
        - 27 * a3**2 * d3**2
    )
    ab = GENERIC.a * GENERIC.b
    assert disc == pytest.approx(ab * ab * f.hyperbola * f.hyperbola * f.quartic, rel=1e-10)


def test_classify_region_anchors():
    # Strang neighborhood: central square
    assert classify_region(0.34, 0.32).region == 6
    assert classify_region(1 / 3, 1 / 3).boundary == ("diagonal",)
    assert classify_region(1 / 3, 1 / 3).region == 6
    # effective-order-four methods live in the outer third quadrant
    lo = named_method("LoSaSk").coeffs
    assert classify_region(lo.a, lo.b).region == 1
    # order-four coefficients, sorted, fall beyond a = 1/2 with b < 0
    yo = named_method("Yoshida").coeffs
    assert classify_region(yo.a, yo.b).region == 5
    # symmetry: classification only depends on the sorted pair
    assert classify_region(0.32, 0.34).region == 6
    assert classify_region(-0.05, -0.04).region == 2


def test_classify_region_boundaries():
    assert classify_region(0.0, 0.3).region is None
    assert "a=0" in classify_region(0.0, 0.3).boundary
    assert classify_region(0.5, 0.3).region is None
    assert "a=1/2" in classify_region(0.5, 0.3).boundary
    # quartic sign change between two sample points implies different regions
    r1 = classify_region(0.25, 0.25)
    r2 = classify_region(0.45, 0.05)
    q1 = curve_residuals(MethodCoefficients(0.25, 0.25)).quartic
    q2 = curve_residuals(MethodCoefficients(0.45, 0.05)).quartic
    assert (r1.region != r2.region) == (np.sign(q1) != np.sign(q2))


def test_stability_map_basic():
    rows = stability_map((0.30, 0.37), (0.30, 0.37), 5)
    assert len(rows) == 25
    # local maximum of h_max at Strang along the hyperbola
    h_strang = stability_interval(MethodCoefficients(1 / 3, 1 / 3)).h_max
    for a in (0.30, 0.36, 0.40):
        b = a / (6 * a - 1)
        assert stability_interval(MethodCoefficients(a, b)).h_max <= h_strang + 1e-12


def test_stability_map_discontinuous_across_hyperbola():
    a = named_method("PrEtAl").coeffs.a
    on = named_method("PrEtAl").coeffs
    off = MethodCoefficients(a, a / (6 * a - 1) + 0.01)
    assert stability_interval(on).h_max - stability_interval(off).h_max > 1.0


def test_stability_map_empty_and_invalid():
    assert stability_map((0.5, 0.1), (0.0, 1.0), 4) == []
    with pytest.raises(ValueError):
        stability_map((0.0, 1.0), (0.0, 1.0), 1)


def test_stability_map_csv_header():
    rows = stability_map((0.1, 0.2), (0.1, 0.2), 2)
    text = stability_map_csv(rows)
    assert text.splitlines()[0] == STABILITY_MAP_HEADER
    assert len(text.splitlines()) == 5


def test_report_json_roundtrip():
    report = stability_interval(MethodCoefficients(1 / 3, 1 / 3))
    data = json.loads(report.to_json())
    assert data["h_max"] == pytest.approx(6.0, abs=1e-8)
    assert data["a"] == pytest.approx(1 / 3)
    assert [e["value"] for e in data["sign_sequence"]] == [1, -1, 1, -1]
    assert data["sign_sequence"][-1]["loss"] is True
