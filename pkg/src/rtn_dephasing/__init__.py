"""Exact dephasing of a qubit driven by random telegraph noise with memory."""

from .dephasing_core import (
    DephasingModel,
    DephasingSolution,
    assemble_laplace,
    closed_form_memoryless,
    coherence_element,
    dephasing_rate,
    solve,
)
from .noise_kernels import (
    DampedCosine,
    Delta,
    Exponential,
    MemoryKernel,
    NoiseParams,
    RationalKernel,
    conditional_probability,
    correlation_function,
    make_kernel,
)
from .nonmarkovianity import (
    NonMarkovResult,
    PhaseDiagram,
    extrema_of_abs_F,
    non_markovianity,
    phase_diagram,
    sweep_nu,
    threshold_kappa,
)
from .polynomial_lab import (
    ExponentialSum,
    RationalFunction,
    RealPolynomial,
    find_poles,
    inverse_laplace,
    partial_fractions,
)

__version__ = "0.1.0"
