import math

import numpy as np
import pytest

from trisplit.harmonic import (
    HarmonicAnalysis,
    Unstable,
    analyze,
    energy_error_step,
    harmonic_split_system,
    modified_hamiltonian,
    n_step_matrix,
    rotation_exact,
)
from trisplit.integrator import trajectory
from trisplit.methods import MethodCoefficients, named_method
from trisplit.stability import T_AS_A, T_AS_B, amplification_matrix

from conftest import fit_slope

H_LIST = (0.2, 0.1, 0.05, 0.025)
GENERIC = MethodCoefficients(0.2, 0.3)
PROBE_Q, PROBE_P = 0.7, 0.4


def test_rotation_exact_basics():
    assert np.allclose(rotation_exact(0.0), np.eye(2))
    assert np.allclose(rotation_exact(math.pi / 2), [[0, 1], [-1, 0]], atol=1e-16)
    r = rotation_exact(0.3) @ rotation_exact(0.5)
    assert np.max(np.abs(r - rotation_exact(0.8))) < 1e-14


def test_analyze_consistency():
    an = analyze(GENERIC, 0.1)
    assert isinstance(an, HarmonicAnalysis)
    assert 0.0 < an.theta < math.pi
    assert an.valid
    m = amplification_matrix(GENERIC, 0.1)
    assert math.cos(an.theta) == pytest.approx(0.5 * (m[0, 0] + m[1, 1]), abs=1e-13)
    assert an.xi == pytest.approx(m[0, 1] / math.sin(an.theta), abs=1e-13)


def test_analyze_unstable_raises():
    with pytest.raises(Unstable):
        analyze(MethodCoefficients(1 / 3, 1 / 3), 6.5)
    with pytest.raises(Unstable):
        analyze(named_method("Yoshida").coeffs, 1.9)


def test_analyze_omega_scaling():
    an1 = analyze(GENERIC, 0.4, omega=1.0)
    an2 = analyze(GENERIC, 0.2, omega=2.0)
    assert an1.theta == pytest.approx(an2.theta, abs=1e-15)
    assert an1.xi == pytest.approx(an2.xi, abs=1e-15)


def test_order_correspondence_slopes():
    # generic member: both deviations are O(h^2); effective-order-four
    # members gain two orders in theta, enhanced-energy members in xi,
    # and the order-four method in both
    def slopes(coeffs, role=T_AS_A):
        tvals, xvals = [], []
        for h in H_LIST:
            an = analyze(coeffs, h, role)
            tvals.append(an.theta / h - 1.0)
            xvals.append(an.xi - 1.0)
        return fit_slope(H_LIST, tvals), fit_slope(H_LIST, xvals)

    st, sx = slopes(GENERIC)
    assert st == pytest.approx(2.0, abs=0.2)
    assert sx == pytest.approx(2.0, abs=0.2)

    st, sx = slopes(named_method("LoSaSk").coeffs)
    assert st == pytest.approx(4.0, abs=0.2)
    assert sx == pytest.approx(2.0, abs=0.2)

    st, sx = slopes(named_method("PrEtAl").coeffs)
    assert st == pytest.approx(2.0, abs=0.2)
    assert sx == pytest.approx(4.0, abs=0.2)

    st, sx = slopes(named_method("Yoshida").coeffs)
    assert st == pytest.approx(4.0, abs=0.2)
    assert sx == pytest.approx(4.0, abs=0.2)


def test_order_correspondence_role_swap():
    # the role swap maps xi to 1/xi, so the observed orders are identical
    coeffs = named_method("PrEtAl").coeffs
    for h in H_LIST:
        a1 = analyze(coeffs, h, T_AS_A)
        a2 = analyze(coeffs, h, T_AS_B)
        # tolerance reflects the 1/sin(theta) conditioning of arccos
        assert a2.xi == pytest.approx(1.0 / a1.xi, abs=1e-11)
        assert a2.theta == pytest.approx(a1.theta, abs=1e-13)


def test_n_step_matrix_against_iterated_product():
    coeffs = MethodCoefficients(1 / 3, 1 / 3)
    h, n = 0.1, 1000
    closed = n_step_matrix(coeffs, h, n)
    iterated = np.linalg.matrix_power(amplification_matrix(coeffs, h), n)
    assert np.max(np.abs(closed - iterated)) < 1e-10
    one = n_step_matrix(coeffs, h, 1)
    assert np.max(np.abs(one - amplification_matrix(coeffs, h))) < 1e-13


def test_n_step_phase_is_linear():
    an = analyze(GENERIC, 0.2)
    for n in (10, 100, 1000):
        m = n_step_matrix(GENERIC, 0.2, n)
        angle = math.atan2(m[0, 1] / an.xi, m[0, 0])
        expected = math.fmod(n * an.theta, 2 * math.pi)
        if expected > math.pi:
            expected -= 2 * math.pi
        assert angle == pytest.approx(expected, abs=1e-9)


def test_modified_hamiltonian_conserved():
    sys_h = harmonic_split_system()
    h = 0.25
    x = np.array([PROBE_Q, PROBE_P])
    h0 = modified_hamiltonian(GENERIC, h, x[0], x[1])
    states = trajectory(GENERIC, sys_h, h, 10_000, x, fuse=True, output_indices=range(1000, 10_001, 1000))
    worst = max(
        abs(modified_hamiltonian(GENERIC, h, s[0], s[1]) - h0) / abs(h0) for s in states
    )
    assert worst < 1e-11


def test_modified_hamiltonian_limit():
    # xi -> 1, theta -> h reproduces the true energy
    h = 1e-4
    val = modified_hamiltonian(GENERIC, h, PROBE_Q, PROBE_P)
    exact = 0.5 * (PROBE_Q**2 + PROBE_P**2)
    assert val == pytest.approx(exact, rel=1e-7)


def test_rescaling_maps_ellipse_to_circle():
    # in variables P = p sqrt(xi), Q = q / sqrt(xi) the trajectory lies
    # on a circle
    sys_h = harmonic_split_system()
    h = 0.3
    an = analyze(GENERIC, h)
    x = np.array([PROBE_Q, PROBE_P])
    radii = []
    for s in trajectory(GENERIC, sys_h, h, 200, x):
        radii.append((s[0] ** 2 / an.xi) + (s[1] ** 2 * an.xi))
    assert (max(radii) - min(radii)) / max(radii) < 1e-12


def test_energy_error_bounded_long_run():
    sys_h = harmonic_split_system()
    h = 0.25
    x = np.array([PROBE_Q, PROBE_P])
    e0 = 0.5 * float(x @ x)
    # the trajectory stays on the modified-Hamiltonian ellipse, so the
    # energy error oscillates without drift
    worst = 0.0
    state = x
    for _ in range(100):
        state = trajectory(GENERIC, sys_h, h, 1000, state, fuse=True, output_indices=(1000,))[0]
        worst = max(worst, abs(0.5 * float(state @ state) - e0))
    assert worst < 0.05 * e0


def test_energy_error_step_slopes():
    def slope(coeffs):
        vals = [energy_error_step(coeffs, h, PROBE_Q, PROBE_P) for h in H_LIST]
        return fit_slope(H_LIST, vals)

    assert slope(GENERIC) == pytest.approx(3.0, abs=0.3)
    assert slope(named_method("PrEtAl").coeffs) == pytest.approx(5.0, abs=0.3)
    assert slope(named_method("Yoshida").coeffs) == pytest.approx(5.0, abs=0.3)
    assert slope(named_method("BlCaSa").coeffs) == pytest.approx(3.0, abs=0.3)


def test_energy_error_step_matches_flows():
    sys_h = harmonic_split_system()
    x = np.array([PROBE_Q, PROBE_P])
    from trisplit.integrator import step

    y = step(GENERIC, sys_h, 0.2, x)
    direct = 0.5 * float(y @ y) - 0.5 * float(x @ x)
    assert energy_error_step(GENERIC, 0.2, PROBE_Q, PROBE_P) == pytest.approx(
        direct, abs=1e-14
    )
