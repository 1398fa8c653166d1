"""Pre/post-processing that upgrades effective-order-four methods.

Methods with alpha = beta are conjugate to an order-four scheme: change
variables once at the start with chi_h, run the raw method, and undo the
change at every output.  Here chi_h is the cheap Euler approximation of
the h-flow of x' = h lambda [A, B],

    chi_h(x)      ~ x + h^2 lambda [A,B](x)
    chi_h^-1(X)   = X - h^2 lambda [A,B](X),

which costs one commutator evaluation per application.  The Euler
approximation trades exact symplecticity of the processed map for
simplicity; the long-time behavior is still governed by the raw
(symplectic) method, but the processed map is not reversible, which is
why samplers must reject it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .integrator import SplitSystem, Stage, stage_plan, step, trajectory
from .methods import MethodCoefficients, MethodDescriptor, error_coefficients

__all__ = [
    "Processor",
    "ProcessedMethod",
    "MissingCommutator",
    "EffectiveOrderViolation",
    "processor_for",
    "preprocess",
    "postprocess",
    "processed_step",
    "processed_trajectory",
]


class MissingCommutator(ValueError):
    """Processing needs SplitSystem.commutator, which was not supplied."""


class EffectiveOrderViolation(ValueError):
    """Processing requested for a method with alpha != beta."""


@dataclass(frozen=True)
class Processor:
    """Processing map parameterized by the coefficient lambda."""

    lam: float


@dataclass(frozen=True)
class ProcessedMethod:
    """A method bundled with its processor (the processed integrator)."""

    coeffs: MethodCoefficients
    processor: Processor


def _require_effective4(coeffs: MethodCoefficients, tol: float = 1e-12) -> float:
    alpha, beta = error_coefficients(coeffs)
    if abs(alpha - beta) >= tol:
        raise EffectiveOrderViolation(
            f"alpha = {alpha:.6g} != beta = {beta:.6g}: method has no "
            "effective order four, processing would not raise the order"
        )
    return alpha


def processor_for(method: MethodDescriptor | MethodCoefficients) -> Processor:
    """Build the processor with lambda = alpha = beta.

    Raises EffectiveOrderViolation unless the method lies on the
    effective-order-four curve (alpha = beta within 1e-12).
    """
    coeffs = method.coeffs if isinstance(method, MethodDescriptor) else method
    return Processor(lam=_require_effective4(coeffs))


def _commutator(system: SplitSystem) -> object:
    if system.commutator is None:
        raise MissingCommutator("split system does not provide a commutator")
    return system.commutator


def preprocess(proc: Processor, system: SplitSystem, h: float, x: np.ndarray) -> np.ndarray:
    """Apply chi_h: x + h^2 lambda [A,B](x)."""
    if not h > 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    if proc.lam == 0.0:
        return np.asarray(x)
    comm = _commutator(system)
    x = np.asarray(x)
    return x + (h * h * proc.lam) * comm(x)


def postprocess(proc: Processor, system: SplitSystem, h: float, X: np.ndarray) -> np.ndarray:
    """Apply chi_h^-1: X - h^2 lambda [A,B](X)."""
    if not h > 0.0:
        raise ValueError(f"step size must be positive, got {h}")
    if proc.lam == 0.0:
        return np.asarray(X)
    comm = _commutator(system)
    X = np.asarray(X)
    return X - (h * h * proc.lam) * comm(X)


def processed_step(
    proc: Processor,
    coeffs: MethodCoefficients,
    system: SplitSystem,
    h: float,
    x: np.ndarray,
) -> np.ndarray:
    """One step of the processed method chi_h^-1 o psi_h o chi_h.

    Intended for analysis (e.g. reversibility probes); production runs
    should use processed_trajectory, which applies the processors only at
    the ends.
    """
    _require_effective4(coeffs)
    return postprocess(proc, system, h, step(coeffs, system, h, preprocess(proc, system, h, x)))


def processed_trajectory(
    proc: Processor,
    coeffs: MethodCoefficients,
    system: SplitSystem,
    h: float,
    n: int,
    x0: np.ndarray,
    output_indices: Iterable[int] | None = None,
    plan: tuple[Stage, ...] | None = None,
) -> list[np.ndarray]:
    """Processed states at the requested output steps.

    The pre-processor is applied once at x0, the raw trajectory runs with
    stage fusion, and the post-processor is applied to each requested
    output only.  Total commutator cost: 1 + (number of outputs)
    evaluations.  Each returned state equals, bit for bit, the
    post-processed value of the corresponding raw-trajectory state.
    """
    _require_effective4(coeffs)
    if plan is None:
        plan = stage_plan(coeffs)
    x0p = preprocess(proc, system, h, x0)
    raw = trajectory(coeffs, system, h, n, x0p, fuse=True, output_indices=output_indices, plan=plan)
    return [postprocess(proc, system, h, X) for X in raw]
