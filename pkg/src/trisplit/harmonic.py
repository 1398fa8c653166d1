"""Finite-h error theory of the family on the harmonic oscillator.

Inside the stability interval the one-step matrix is conjugate to a
rotation: with A_h = cos(theta_h) and xi_h = B_h / sin(theta_h),

    M_h = [[cos th, xi sin th], [-sin th / xi, cos th]],

so n steps rotate by exactly n theta_h along the ellipse
xi_h p^2 + q^2 / xi_h = const.  The per-step angle error theta_h/h - 1
is the non-removable part of the method error, while xi_h - 1 measures
the (removable) distortion of the invariant ellipses; their deviations
are O(h^2) generically and O(h^4) exactly on the special curves of the
coefficient plane.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import SplitSystem
from .methods import MethodCoefficients
from .stability import T_AS_A, T_AS_B, amplification_matrix

__all__ = [
    "Unstable",
    "HarmonicAnalysis",
    "rotation_exact",
    "analyze",
    "n_step_matrix",
    "modified_hamiltonian",
    "energy_error_step",
    "processor_matrix",
    "processed_amplification",
    "harmonic_split_system",
]


class Unstable(ValueError):
    """|A_h| >= 1: the step is outside the stability interval."""


def rotation_exact(t: float) -> np.ndarray:
    """Exact solution matrix of q' = p, p' = -q over time t."""
    c, s = math.cos(t), math.sin(t)
    return np.array([[c, s], [-s, c]])


@dataclass(frozen=True)
class HarmonicAnalysis:
    """Rotation angle per step and ellipse distortion of a stable step."""

    theta: float  # in (0, pi), radians per step
    xi: float     # dimensionless; 1 for the exact flow
    valid: bool   # |A_h| < 1 (always True for constructed instances)


def analyze(
    coeffs: MethodCoefficients,
    h: float,
    role: str = T_AS_A,
    omega: float = 1.0,
) -> HarmonicAnalysis:
    """Compute (theta_h, xi_h) for a step of size h.

    A mode q'' = -omega^2 q is analyzed through the substitution
    h -> omega h (xi then refers to the rescaled variables in which the
    mode is the unit oscillator).  Raises Unstable when |A_h| >= 1.
    """
    m = amplification_matrix(coeffs, omega * h, role)
    a_h = 0.5 * (m[0, 0] + m[1, 1])
    if abs(a_h) >= 1.0:
        raise Unstable(f"|A_h| = {abs(a_h):.6g} >= 1 at h = {h} (omega = {omega})")
    theta = math.acos(a_h)
    xi = m[0, 1] / math.sin(theta)
    return HarmonicAnalysis(theta=theta, xi=xi, valid=True)


def n_step_matrix(
    coeffs: MethodCoefficients,
    h: float,
    n: int,
    role: str = T_AS_A,
    omega: float = 1.0,
) -> np.ndarray:
    """Closed form of the n-step matrix via (theta_h, xi_h).

    Equals the n-fold product of the one-step matrix; the angle advances
    exactly linearly, n * theta_h, so phase error accumulates linearly
    while the ellipse distortion stays bounded.
    """
    an = analyze(coeffs, h, role, omega)
    c, s = math.cos(n * an.theta), math.sin(n * an.theta)
    return np.array([[c, an.xi * s], [-s / an.xi, c]])


def modified_hamiltonian(
    coeffs: MethodCoefficients,
    h: float,
    q: float,
    p: float,
    role: str = T_AS_A,
    omega: float = 1.0,
) -> float:
    """Conserved quadratic form (theta_h / h) (xi p^2 + q^2 / xi) / 2.

    Every numerical trajectory lies on a level set of this form; it
    reduces to the true energy (p^2 + q^2) / 2 as xi -> 1, theta -> h.
    """
    an = analyze(coeffs, h, role, omega)
    return 0.5 * (an.theta / h) * (an.xi * p * p + q * q / an.xi)


def energy_error_step(
    coeffs: MethodCoefficients,
    h: float,
    q: float,
    p: float,
    role: str = T_AS_A,
) -> float:
    """Exact change of H = (q^2 + p^2)/2 across a single step.

    O(h^3) for generic coefficients; O(h^5) on the enhanced-energy curve
    (alpha = -beta) and for the order-four method.  Defined for any h,
    stable or not.
    """
    m = amplification_matrix(coeffs, h, role)
    q1, p1 = m @ (q, p)
    return 0.5 * (q1 * q1 + p1 * p1) - 0.5 * (q * q + p * p)


def processor_matrix(lam: float, h: float, role: str = T_AS_A) -> np.ndarray:
    """Exact matrix of the processing change of variables on the oscillator.

    The commutator field [A, B](q, p) is (-q, p) when the drift plays role
    A, so the h-flow of x' = h lam [A, B] is diag(exp(-lam h^2),
    exp(lam h^2)); the role swap flips the signs in the exponents.
    """
    e = math.exp(lam * h * h)
    if role == T_AS_A:
        return np.array([[1.0 / e, 0.0], [0.0, e]])
    if role == T_AS_B:
        return np.array([[e, 0.0], [0.0, 1.0 / e]])
    raise ValueError(f"role must be {T_AS_A!r} or {T_AS_B!r}, got {role!r}")


def processed_amplification(
    coeffs: MethodCoefficients,
    h: float,
    lam: float,
    role: str = T_AS_A,
) -> np.ndarray:
    """One-step matrix of the exactly processed method, P^-1 M_h P.

    Similar to M_h, hence with identical eigenvalues: processing cannot
    change where stability is lost.
    """
    m = amplification_matrix(coeffs, h, role)
    p = processor_matrix(lam, h, role)
    return np.linalg.solve(p, m @ p)


def harmonic_split_system(role: str = T_AS_A) -> SplitSystem:
    """Drift/kick split of the unit harmonic oscillator on states (q, p).

    With the drift as flow A the commutator is [A, B](q, p) = (-q, p);
    the role swap negates it.  Both flows run backward, so every member
    of the family applies.
    """
    def drift(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([x[0] + t * x[1], x[1]])

    def kick(t: float, x: np.ndarray) -> np.ndarray:
        return np.array([x[0], x[1] - t * x[0]])

    if role == T_AS_A:
        return SplitSystem(
            flow_a=drift,
            flow_b=kick,
            commutator=lambda x: np.array([-x[0], x[1]]),
        )
    if role == T_AS_B:
        return SplitSystem(
            flow_a=kick,
            flow_b=drift,
            commutator=lambda x: np.array([x[0], -x[1]]),
        )
    raise ValueError(f"role must be {T_AS_A!r} or {T_AS_B!r}, got {role!r}")
