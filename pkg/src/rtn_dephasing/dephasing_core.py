"""Dephasing factor F(t), its derivative and the dephasing rate.

With ``K~ = a/b`` and ``g = p b + 2 lam a`` the Laplace images are

    F~(p)  = g / (p g + nu^2 b)
    dF~(p) = -nu^2 b / (p g + nu^2 b)

both proper rational functions, inverted exactly by :mod:`polynomial_lab`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InternalConsistencyError, NonDecayingError, PreconditionError, ZeroCrossingError
from .noise_kernels import MemoryKernel, NoiseParams, relaxation_denominator
from .polynomial_lab import (
    P,
    ExponentialSum,
    PoleSet,
    RationalFunction,
    derivative_exp_sum,
    inverse_laplace,
)

DECAY_MARGIN = 1e-12
ZERO_F_TOL = 1e-13
DERIVATIVE_ROUTE_TOL = 1e-9
TIE_WINDOW = 1e-9


@dataclass(frozen=True)
class DephasingModel:
    kernel: MemoryKernel
    params: NoiseParams
    omega0: float = 0.0

    @property
    def noise_free(self) -> bool:
        return self.params.nu == 0.0


@dataclass(frozen=True)
class DephasingSolution:
    """Exact ``F`` and ``dF/dt`` as exponential sums.

    ``decaying`` is False only for the noise-free model, whose single pole
    sits at ``p = 0`` and ``F`` stays equal to one.
    """

    F: ExponentialSum
    F_dot: ExponentialSum
    poles: PoleSet
    slowest_decay: float
    decaying: bool = True

    def __call__(self, t):
        return self.F(t)


def assemble_laplace(model: DephasingModel) -> tuple[RationalFunction, RationalFunction]:
    """Reduced ``(F~, dF~)`` for the model's kernel and noise parameters."""
    g, b = relaxation_denominator(model.kernel, model.params)
    nu2 = model.params.nu ** 2
    den = P * g + b.scaled(nu2)
    f_tilde = RationalFunction(g, den).reduced()
    f_dot_tilde = RationalFunction(b.scaled(-nu2), den).reduced()
    return f_tilde, f_dot_tilde


def solve(model: DephasingModel, check_derivative: bool = True) -> DephasingSolution:
    """Invert ``F~`` exactly and differentiate termwise.

    When ``check_derivative`` is set the termwise derivative is compared with
    the independent inversion of ``dF~`` on a grid spanning the decay time.

    Raises
    ------
    NonDecayingError
        A pole has real part ``>= -1e-12`` while the noise amplitude is
        nonzero.
    """
    f_tilde, f_dot_tilde = assemble_laplace(model)
    F, poles = inverse_laplace(f_tilde)
    slowest = poles.max_real_part
    if model.noise_free:
        return DephasingSolution(F, derivative_exp_sum(F), poles, slowest, decaying=False)
    for root, _ in poles.roots():
        if root.real >= -DECAY_MARGIN:
            raise NonDecayingError(f"pole {root} does not decay", pole=root)
    F_dot = derivative_exp_sum(F)
    if check_derivative:
        direct, _ = inverse_laplace(f_dot_tilde)
        horizon = min(F.decay_time(1e-6), 1e4)
        grid = np.linspace(0.0, horizon, 257)
        diff = np.max(np.abs(F_dot(grid) - direct(grid)))
        if diff > DERIVATIVE_ROUTE_TOL:
            raise InternalConsistencyError(f"termwise and inverted dF/dt disagree by {diff:.3e}")
    return DephasingSolution(F, F_dot, poles, slowest, decaying=True)


def closed_form_memoryless(params: NoiseParams, t):
    """Three-branch closed form of ``(F, gamma)`` for the delta kernel.

    The branch is chosen by the sign of ``nu - lam``; ``|nu - lam| <= 1e-9 lam``
    uses the critically damped branch.  ``gamma`` is ``inf``/``nan`` at zeros
    of ``F`` in the oscillatory branch.
    """
    lam, nu = params.lam, params.nu
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise PreconditionError("closed_form_memoryless needs t >= 0")
    with np.errstate(divide="ignore", invalid="ignore"):
        if abs(nu - lam) <= TIE_WINDOW * lam:
            F = (1.0 + lam * t) * np.exp(-lam * t)
            gamma = lam * lam * t / (1.0 + lam * t)
        elif nu < lam:
            s = math.sqrt(lam * lam - nu * nu)
            # e^{-lam t} cosh(s t) and e^{-lam t} sinh(s t) without overflow
            ch = 0.5 * (np.exp((s - lam) * t) + np.exp(-(s + lam) * t))
            sh = 0.5 * (np.exp((s - lam) * t) - np.exp(-(s + lam) * t))
            F = ch + lam / s * sh
            gamma = nu * nu * sh / (s * ch + lam * sh)
        else:
            w = math.sqrt(nu * nu - lam * lam)
            c, sn = np.cos(w * t), np.sin(w * t)
            F = np.exp(-lam * t) * (c + lam / w * sn)
            gamma = nu * nu * sn / (w * c + lam * sn)
    if F.ndim == 0:
        return float(F), float(gamma)
    return F, gamma


def dephasing_rate(sol: DephasingSolution, t):
    """``gamma(t) = -F'(t)/F(t)``.

    Raises
    ------
    ZeroCrossingError
        ``|F(t)| < 1e-13`` at some requested time.
    """
    f = np.asarray(sol.F(t))
    bad = np.abs(f) < ZERO_F_TOL
    if np.any(bad):
        where = np.asarray(t, dtype=float)[bad] if np.ndim(t) else float(t)
        raise ZeroCrossingError(f"F vanishes at t={where}; the dephasing rate diverges", t=where)
    gamma = -np.asarray(sol.F_dot(t)) / f
    return float(gamma) if np.ndim(t) == 0 else gamma


def coherence_element(model: DephasingModel, sol: DephasingSolution, t, rho0: complex):
    """Off-diagonal density-matrix element ``exp(i w0 t) F(t) rho0``."""
    t = np.asarray(t, dtype=float)
    out = np.exp(1j * model.omega0 * t) * sol.F(t) * rho0
    return complex(out) if out.ndim == 0 else out
