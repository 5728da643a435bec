"""Memory kernels of the telegraph noise and the statistics they induce.

The noise jumps between ``+nu`` and ``-nu``; its conditional probability obeys
a generalized master equation whose memory kernel ``K(t)`` has a rational
Laplace transform ``K~(p) = a(p)/b(p)``.  Everything downstream is expressed
through ``a`` and ``b``: for instance ``1/(p + 2 lam K~) = b / (p b + 2 lam a)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import (
    InternalConsistencyError,
    NonPhysicalProbabilityError,
    PreconditionError,
    UnsupportedOperationError,
)
from .polynomial_lab import (
    ONE,
    P,
    ExponentialSum,
    RationalFunction,
    RealPolynomial,
    inverse_laplace,
)

NORMALIZATION_TOL = 1e-10


@dataclass(frozen=True)
class NoiseParams:
    """Jump amplitude ``nu`` and average transition rate ``lam`` (both inverse time)."""

    lam: float = 1.0
    nu: float = 0.0

    def __post_init__(self):
        if not self.lam > 0:
            raise PreconditionError(f"transition rate must be positive, got {self.lam}")
        if not self.nu >= 0:
            raise PreconditionError(f"jump amplitude must be non-negative, got {self.nu}")


class MemoryKernel:
    """Base class; subclasses provide ``laplace()`` and optionally ``time(t)``."""

    name = "kernel"

    def laplace(self) -> RationalFunction:
        raise NotImplementedError

    def time(self, t):
        raise UnsupportedOperationError(f"{self.name} kernel has no pointwise time-domain form")

    def initial_value(self) -> float:
        """``K(0)``, used by the Volterra stability guard."""
        return float(self.time(0.0))


@dataclass(frozen=True)
class Delta(MemoryKernel):
    """Memoryless kernel ``K(t) = delta(t)``; the noise is Markovian."""

    name = "delta"

    def laplace(self) -> RationalFunction:
        return RationalFunction(ONE, ONE)

    def initial_value(self) -> float:
        # distributional kernel: C(t) decays at rate 2 lam, counted with K~ = 1
        return 1.0


@dataclass(frozen=True)
class Exponential(MemoryKernel):
    """``K(t) = kappa exp(-kappa t)``."""

    kappa: float
    name = "exp"

    def __post_init__(self):
        if not self.kappa > 0:
            raise PreconditionError(f"kappa must be positive, got {self.kappa}")

    def laplace(self) -> RationalFunction:
        return RationalFunction(RealPolynomial((self.kappa,)), RealPolynomial((self.kappa, 1.0)))

    def time(self, t):
        return self.kappa * np.exp(-self.kappa * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class DampedCosine(MemoryKernel):
    """``K(t) = kappa exp(-kappa t) cos(omega t)``, a modulated exponential kernel."""

    kappa: float
    omega: float = 0.0
    name = "damped_cosine"

    def __post_init__(self):
        if not self.kappa > 0:
            raise PreconditionError(f"kappa must be positive, got {self.kappa}")
        if not self.omega >= 0:
            raise PreconditionError(f"omega must be non-negative, got {self.omega}")

    def laplace(self) -> RationalFunction:
        if self.omega == 0.0:
            # (p + kappa) cancels exactly; reuse the exponential form verbatim
            return Exponential(self.kappa).laplace()
        k = self.kappa
        num = RealPolynomial((k * k, k))
        den = RealPolynomial((k * k + self.omega**2, 2.0 * k, 1.0))
        return RationalFunction(num, den)

    def time(self, t):
        t = np.asarray(t, dtype=float)
        return self.kappa * np.exp(-self.kappa * t) * np.cos(self.omega * t)


@dataclass(frozen=True)
class RationalKernel(MemoryKernel):
    """User-supplied kernel given by its rational Laplace transform."""

    transform: RationalFunction
    time_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    name = "rational"

    def laplace(self) -> RationalFunction:
        return self.transform

    def time(self, t):
        if self.time_fn is None:
            return super().time(t)
        return self.time_fn(np.asarray(t, dtype=float))


KERNEL_FAMILIES = {"delta": Delta, "exp": Exponential, "damped_cosine": DampedCosine}


def make_kernel(family: str, kappa: float | None = None, omega: float = 0.0) -> MemoryKernel:
    """Build a kernel from its family name (``delta``, ``exp``, ``damped_cosine``)."""
    if family == "delta":
        return Delta()
    if family == "exp":
        return Exponential(kappa)
    if family in ("damped_cosine", "cos"):
        return DampedCosine(kappa, omega)
    raise PreconditionError(f"unknown kernel family {family!r}")


def kernel_laplace(k: MemoryKernel) -> RationalFunction:
    return k.laplace()


def kernel_time(k: MemoryKernel, t):
    if np.any(np.asarray(t) < 0):
        raise PreconditionError("kernel_time needs t >= 0")
    return k.time(t)


def relaxation_denominator(k: MemoryKernel, params: NoiseParams) -> tuple[RealPolynomial, RealPolynomial]:
    """``(p b + 2 lam a, b)`` where ``K~ = a/b``; their ratio is ``p + 2 lam K~(p)``."""
    kt = k.laplace()
    a, b = kt.num, kt.den
    return P * b + a.scaled(2.0 * params.lam), b


@dataclass(frozen=True)
class ConditionalProbabilityLaplace:
    """Laplace images of ``P(xi, t | xi', 0)`` for equal and opposite states."""

    same_state: RationalFunction
    flipped_state: RationalFunction


def conditional_probability_laplace(k: MemoryKernel, params: NoiseParams) -> ConditionalProbabilityLaplace:
    """Exact Laplace-domain solution of the generalized master equation.

    ``same = 1/2 [1/p + 1/(p + 2 lam K~)]`` and
    ``flipped = 1/2 [1/p - 1/(p + 2 lam K~)]``.
    """
    g, b = relaxation_denominator(k, params)
    half_inv_p = RationalFunction(RealPolynomial((0.5,)), P)
    relax = RationalFunction(b.scaled(0.5), g)
    return ConditionalProbabilityLaplace(
        same_state=(half_inv_p + relax).reduced(),
        flipped_state=(half_inv_p - relax).reduced(),
    )


def conditional_probability(k: MemoryKernel, params: NoiseParams, t):
    """Time-domain ``(p_same, p_flip)`` at scalar or array ``t >= 0``.

    Raises
    ------
    InternalConsistencyError
        Normalization ``p_same + p_flip = 1`` fails beyond ``1e-10``.
    NonPhysicalProbabilityError
        A probability leaves ``[0, 1]`` by more than the normalization
        tolerance, i.e. the kernel is not a legitimate memory kernel at these
        parameters.
    """
    if np.any(np.asarray(t) < 0):
        raise PreconditionError("conditional_probability needs t >= 0")
    cp = conditional_probability_laplace(k, params)
    same = inverse_laplace(cp.same_state)[0](t)
    flip = inverse_laplace(cp.flipped_state)[0](t)
    total = np.asarray(same + flip)
    if np.any(np.abs(total - 1.0) > NORMALIZATION_TOL):
        raise InternalConsistencyError(f"probabilities sum to {total} instead of 1")
    lo = min(np.min(same), np.min(flip))
    hi = max(np.max(same), np.max(flip))
    if lo < -NORMALIZATION_TOL or hi > 1.0 + NORMALIZATION_TOL:
        raise NonPhysicalProbabilityError(
            f"{k.name} kernel with lam={params.lam}, nu={params.nu} gives probabilities in [{lo}, {hi}]"
        )
    same, flip = np.clip(same, 0.0, 1.0), np.clip(flip, 0.0, 1.0)
    if np.ndim(t) == 0:
        return float(same), float(flip)
    return same, flip


def correlation_laplace(k: MemoryKernel, params: NoiseParams) -> RationalFunction:
    """``C~(p) = nu^2 / (p + 2 lam K~(p))``."""
    g, b = relaxation_denominator(k, params)
    return RationalFunction(b.scaled(params.nu**2), g).reduced()


def correlation_function(k: MemoryKernel, params: NoiseParams) -> ExponentialSum:
    """Two-time correlation ``C(t) = <xi(t) xi(0)>`` as an exponential sum."""
    return inverse_laplace(correlation_laplace(k, params))[0]


def stationary_probability() -> tuple[float, float]:
    """One-point probabilities of ``(+nu, -nu)``; time independent."""
    return 0.5, 0.5


def memoryless_conditional_probability(params: NoiseParams, t):
    """Closed form ``1/2 [1 +- exp(-2 lam t)]`` for the delta kernel."""
    decay = np.exp(-2.0 * params.lam * np.asarray(t, dtype=float))
    return 0.5 * (1.0 + decay), 0.5 * (1.0 - decay)


def memoryless_correlation(params: NoiseParams, t):
    return params.nu**2 * np.exp(-2.0 * params.lam * np.abs(np.asarray(t, dtype=float)))


__all__ = [
    "NoiseParams",
    "MemoryKernel",
    "Delta",
    "Exponential",
    "DampedCosine",
    "RationalKernel",
    "KERNEL_FAMILIES",
    "make_kernel",
    "kernel_laplace",
    "kernel_time",
    "ConditionalProbabilityLaplace",
    "conditional_probability_laplace",
    "conditional_probability",
    "correlation_laplace",
    "correlation_function",
    "stationary_probability",
    "memoryless_conditional_probability",
    "memoryless_correlation",
]
