"""Palindromic three-stage splitting integrators.

A library around the two-parameter family of palindromic, three-stage
splitting methods: coefficient algebra and named methods, the generic
step/trajectory engine over user-supplied split flows, processing to
effective order four, exact stability and error theory on the harmonic
oscillator, a split-step solver for the cubic Schrodinger equation, and
a Hybrid Monte Carlo sampler.
"""

from .methods import (
    DegeneracyKind,
    MethodCoefficients,
    MethodDescriptor,
    classify_degeneracy,
    curve_residuals,
    error_coefficients,
    method_names,
    method_registry,
    named_method,
    stage_increments,
)
from .integrator import (
    NegativeTimeUnsupported,
    SplitSystem,
    newton_split_system,
    position_verlet_step,
    reversibility_check,
    stage_plan,
    step,
    strang_step,
    trajectory,
)
from .processing import (
    EffectiveOrderViolation,
    MissingCommutator,
    ProcessedMethod,
    Processor,
    postprocess,
    preprocess,
    processed_step,
    processed_trajectory,
    processor_for,
)
from .stability import (
    T_AS_A,
    T_AS_B,
    StabilityReport,
    amplification_matrix,
    classify_region,
    discriminant_factors,
    stability_interval,
    stability_map,
    stability_polynomial,
)
from .harmonic import (
    HarmonicAnalysis,
    Unstable,
    analyze,
    energy_error_step,
    harmonic_split_system,
    modified_hamiltonian,
    n_step_matrix,
    rotation_exact,
)
from . import hmc, nls

__version__ = "0.1.0"
