"""Hybrid Monte Carlo sampling driven by the splitting family.

Proposals integrate Newton dynamics for the target potential with a
(non-processed) member of the family and are accepted by a Metropolis
test on the energy error Delta = H(proposal) - H(current).  Exact volume
preservation and exact reversibility of the raw methods make the
accept/reject rule valid; processed integrators break both and are
refused.  Chains draw from per-chain substreams of a counter-based
generator, so results are reproducible and chains are independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .integrator import (
    newton_split_system,
    newton_state,
    split_newton_state,
    stage_plan,
    trajectory,
)
from .methods import MethodCoefficients, MethodDescriptor
from .processing import ProcessedMethod, Processor

__all__ = [
    "Target",
    "ChainConfig",
    "ChainStats",
    "ProcessedIntegratorForbidden",
    "NonFiniteEnergy",
    "hmc_step",
    "run_chains",
    "builtin_targets",
    "validate_gradient",
    "chain_rng",
]


class ProcessedIntegratorForbidden(ValueError):
    """Processed maps are neither reversible nor volume preserving."""


class NonFiniteEnergy(FloatingPointError):
    """The current chain state has non-finite energy."""


@dataclass(frozen=True)
class Target:
    """Sampling target exp(-beta V(q)) with kinetic energy p^T M^-1 p / 2."""

    name: str
    dimension: int
    potential: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    mass: np.ndarray
    initial_position: np.ndarray

    def energy(self, q: np.ndarray, p: np.ndarray) -> float:
        return float(0.5 * np.sum(p * p / self.mass) + self.potential(q))


@dataclass(frozen=True)
class ChainConfig:
    """Sampler settings; trajectory length is h * steps_per_trajectory."""

    h: float
    steps_per_trajectory: int
    n_chains: int = 1
    burn_in: int = 0
    samples: int = 1
    beta: float = 1.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.h <= 0.0:
            raise ValueError("h must be positive")
        if self.steps_per_trajectory < 1 or self.n_chains < 1 or self.samples < 1:
            raise ValueError("steps_per_trajectory, n_chains and samples must be >= 1")
        if self.burn_in < 0:
            raise ValueError("burn_in must be >= 0")
        if self.beta <= 0.0:
            raise ValueError("beta must be positive")


@dataclass(frozen=True)
class ChainStats:
    """Acceptance-rate statistics over independent chains."""

    acceptance_mean: float
    acceptance_std: float
    per_chain: tuple[float, ...]

    @classmethod
    def from_per_chain(cls, rates: Sequence[float]) -> "ChainStats":
        arr = np.asarray(rates, dtype=float)
        std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        return cls(float(arr.mean()), std, tuple(float(r) for r in arr))

    def as_dict(self) -> dict:
        return {
            "acceptance_mean": self.acceptance_mean,
            "acceptance_std": self.acceptance_std,
            "per_chain": list(self.per_chain),
        }


def _resolve_method(method) -> MethodCoefficients:
    if isinstance(method, (ProcessedMethod, Processor)):
        raise ProcessedIntegratorForbidden(
            "HMC requires an exactly volume-preserving, exactly reversible "
            "proposal map; processed integrators are neither"
        )
    if isinstance(method, MethodDescriptor):
        return method.coeffs
    if isinstance(method, MethodCoefficients):
        return method
    raise TypeError(f"cannot interpret {type(method).__name__} as proposal dynamics")


def chain_rng(seed: int, chain_index: int) -> np.random.Generator:
    """Counter-based generator for one chain's substream."""
    root = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(root.spawn(chain_index + 1)[chain_index]))


def hmc_step(
    target: Target,
    method,
    config: ChainConfig,
    state: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, bool, float]:
    """One proposal: refresh momentum, integrate, Metropolis test.

    Draws p ~ N(0, M / beta), runs steps_per_trajectory steps of the
    splitting method (fused, endpoint only), computes
    Delta = H(proposal) - H(current) and accepts with probability
    min(1, exp(-beta Delta)).  On rejection the chain does not move.
    Returns (new position, accepted, Delta).
    """
    coeffs = _resolve_method(method)
    q = np.asarray(state, dtype=float)
    p = rng.standard_normal(target.dimension) * np.sqrt(target.mass / config.beta)
    h_current = target.energy(q, p)
    if not math.isfinite(h_current):
        raise NonFiniteEnergy(f"current state has energy {h_current}")

    system = newton_split_system(target.gradient, target.mass)
    x = newton_state(q, p)
    n = config.steps_per_trajectory
    x = trajectory(coeffs, system, config.h, n, x, fuse=True, output_indices=(n,))[0]
    q_new, p_new = split_newton_state(x)

    h_proposal = target.energy(q_new, p_new)
    delta = h_proposal - h_current
    # non-finite proposals are ordinary rejections: exp(-beta * inf) = 0
    log_accept = -config.beta * delta if math.isfinite(delta) else -math.inf
    accepted = bool(math.log(rng.random()) < log_accept) if log_accept < 0.0 else True
    return (q_new if accepted else q), accepted, delta


def run_chains(target: Target, method, config: ChainConfig) -> ChainStats:
    """Independent chains with per-chain substreams of the seed.

    Burn-in proposals are discarded from the acceptance statistics.  With
    a fixed seed the result is bit-identical across runs.
    """
    coeffs = _resolve_method(method)
    rates = []
    for chain in range(config.n_chains):
        rng = chain_rng(config.seed, chain)
        q = target.initial_position.copy()
        accepted = 0
        for it in range(config.burn_in + config.samples):
            q, ok, _ = hmc_step(target, coeffs, config, q, rng)
            if it >= config.burn_in:
                accepted += ok
        rates.append(accepted / config.samples)
    return ChainStats.from_per_chain(rates)


def builtin_targets(
    name: str,
    dimension: int | None = None,
    spectrum: np.ndarray | None = None,
) -> Target:
    """Desk-scale targets with analytic gradients.

    gaussian:        V(q) = sum_i k_i q_i^2 / 2 with a stiffness spectrum
                     (default: k_i equally spaced in [1, 16]).
    double_well_1d:  V(q) = (q^2 - 1)^2.
    quartic_chain:   nearest-neighbor quadratic coupling plus on-site
                     quartic wells, V = sum (q_{i+1}-q_i)^2/2 + sum q_i^4/4.
    """
    if name == "gaussian":
        if dimension is None:
            raise ValueError("gaussian target needs a dimension")
        k = np.linspace(1.0, 16.0, dimension) if spectrum is None else np.asarray(spectrum, float)
        if k.shape != (dimension,) or np.any(k <= 0.0):
            raise ValueError("spectrum must be a positive vector of length dimension")
        return Target(
            name=f"gaussian({dimension})",
            dimension=dimension,
            potential=lambda q: float(0.5 * np.sum(k * q * q)),
            gradient=lambda q: k * q,
            mass=np.ones(dimension),
            initial_position=np.zeros(dimension),
        )
    if name == "double_well_1d":
        return Target(
            name="double_well_1d",
            dimension=1,
            potential=lambda q: float((q[0] ** 2 - 1.0) ** 2),
            gradient=lambda q: 4.0 * q * (q[0] ** 2 - 1.0),
            mass=np.ones(1),
            initial_position=np.array([1.0]),
        )
    if name == "quartic_chain":
        if dimension is None:
            raise ValueError("quartic_chain target needs a dimension")

        def potential(q: np.ndarray) -> float:
            return float(0.5 * np.sum(np.diff(q) ** 2) + 0.25 * np.sum(q**4))

        def gradient(q: np.ndarray) -> np.ndarray:
            g = q**3
            g[:-1] -= np.diff(q)
            g[1:] += np.diff(q)
            return g

        return Target(
            name=f"quartic_chain({dimension})",
            dimension=dimension,
            potential=potential,
            gradient=gradient,
            mass=np.ones(dimension),
            initial_position=np.zeros(dimension),
        )
    raise ValueError(f"unknown target {name!r}; known: gaussian, double_well_1d, quartic_chain")


def validate_gradient(
    target: Target,
    rng: np.random.Generator,
    n_probes: int = 5,
    eps: float = 1e-6,
) -> float:
    """Max relative error of the gradient vs centered finite differences."""
    worst = 0.0
    for _ in range(n_probes):
        q = rng.standard_normal(target.dimension)
        g = target.gradient(q.copy())
        for i in range(target.dimension):
            q_hi, q_lo = q.copy(), q.copy()
            q_hi[i] += eps
            q_lo[i] -= eps
            fd = (target.potential(q_hi) - target.potential(q_lo)) / (2.0 * eps)
            scale = max(1.0, abs(fd))
            worst = max(worst, abs(g[i] - fd) / scale)
    return worst
