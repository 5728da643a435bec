"""Direct time-stepping of ``F' = -int_0^t C(t - s) F(s) ds`` with ``F(0) = 1``.

Product trapezoidal rule for the memory integral and the trapezoidal rule for
``F`` itself; each step is a 2x2 linear solve for ``(F, F')`` at the new time.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..dephasing_core import DephasingModel
from ..errors import ConfigurationError, PreconditionError
from ..noise_kernels import correlation_function


@dataclass(frozen=True)
class VolterraConfig:
    step: float = 1e-3
    t_max: float = 10.0
    scheme: str = "trapezoidal"

    def __post_init__(self):
        if not (self.step > 0 and self.t_max > 0):
            raise PreconditionError("step and t_max must be positive")
        if self.scheme != "trapezoidal":
            raise PreconditionError(f"unknown scheme {self.scheme!r}")

    def halved(self) -> "VolterraConfig":
        return VolterraConfig(self.step / 2, self.t_max, self.scheme)


@dataclass(frozen=True)
class VolterraResult:
    t: np.ndarray
    F: np.ndarray
    F_dot: np.ndarray

    def rows(self):
        return list(zip(self.t.tolist(), self.F.tolist()))


def stability_number(model: DephasingModel, step: float) -> float:
    p = model.params
    return step * (p.nu**2 + 2.0 * p.lam * model.kernel.initial_value())


def volterra_solve(model: DephasingModel, cfg: VolterraConfig) -> VolterraResult:
    """Second-order solution on the uniform grid ``0, h, ..., t_max``.

    Raises
    ------
    ConfigurationError
        ``h (nu^2 + 2 lam K(0)) >= 0.5``.
    """
    h = cfg.step
    guard = stability_number(model, h)
    if guard >= 0.5:
        raise ConfigurationError(f"step {h} violates the stability guard ({guard:.3g} >= 0.5)")
    n = int(round(cfg.t_max / h))
    t = np.arange(n + 1) * h
    if model.params.nu == 0:
        return VolterraResult(t, np.ones_like(t), np.zeros_like(t))
    C = np.asarray(correlation_function(model.kernel, model.params)(t), dtype=float)
    F = np.empty(n + 1)
    G = np.empty(n + 1)
    F[0], G[0] = 1.0, 0.0
    c0 = C[0]
    # unknowns x = F[m], y = G[m]:
    #   x - h/2 y = F[m-1] + h/2 G[m-1]
    #   h c0/2 x + y = -h (C[m] F[0] / 2 + sum_{j=1}^{m-1} C[m-j] F[j])
    det = 1.0 + h * h * c0 / 4.0
    for m in range(1, n + 1):
        hist = 0.5 * C[m] * F[0]
        if m > 1:
            hist += np.dot(C[m - 1 : 0 : -1], F[1:m])
        r1 = F[m - 1] + 0.5 * h * G[m - 1]
        r2 = -h * hist
        F[m] = (r1 + 0.5 * h * r2) / det
        G[m] = (r2 - 0.5 * h * c0 * r1) / det
    return VolterraResult(t, F, G)


def convergence_ratio(model: DephasingModel, cfg: VolterraConfig, exact) -> tuple[float, float, float]:
    """``(err(h), err(h/2), ratio)`` of max errors against the callable ``exact``."""
    coarse = volterra_solve(model, cfg)
    fine = volterra_solve(model, cfg.halved())
    e1 = float(np.max(np.abs(coarse.F - exact(coarse.t))))
    e2 = float(np.max(np.abs(fine.F - exact(fine.t))))
    return e1, e2, e1 / e2 if e2 > 0 else float("inf")
