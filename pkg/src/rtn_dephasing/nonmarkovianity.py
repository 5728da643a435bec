"""Non-Markovianity of the dephasing dynamics and parameter sweeps.

The measure is the total coherence regained while the dephasing rate is
negative.  With ``F(0) = 1`` and ``F(inf) = 0`` it equals
``(integral |dF/dt| dt - 1) / 2``, which is what :func:`non_markovianity`
integrates; the sum of the individual rises of ``|F|`` between its extrema
is computed alongside as an independent check.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .dephasing_core import DephasingModel, DephasingSolution, solve
from .errors import (
    BracketError,
    DephasingError,
    InternalConsistencyError,
    PreconditionError,
    ScanResolutionError,
)
from .noise_kernels import MemoryKernel, NoiseParams, make_kernel
from .polynomial_lab import ExponentialSum

ZERO_TOL = 1e-6
TAIL_TOL = 1e-12
INTERVAL_TOL = 1e-9
ROUTE_TOL = 1e-8
BISECT_RTOL = 1e-10
SCAN_CHUNK = 200_000
MAX_QUAD_ROUNDS = 40


def default_workers() -> int:
    return int(os.environ.get("RTN_DEPHASING_WORKERS", "1"))


@dataclass(frozen=True)
class Extremum:
    t: float
    kind: str  # "min", "max" or "zero" (a zero of F is a minimum of |F|)


@dataclass(frozen=True)
class NonMarkovResult:
    n_value: float
    n_scaled: float
    t_max: float
    quadrature_error: float
    intervals: tuple[tuple[float, float], ...] = ()
    n_rises: float = 0.0
    noise_free: bool = False

    def as_dict(self) -> dict:
        return {
            "n": self.n_value,
            "n_scaled": self.n_scaled,
            "t_max": self.t_max,
            "error": self.quadrature_error,
            "intervals": [list(iv) for iv in self.intervals],
            "n_sum_of_rises": self.n_rises,
            "noise_free": self.noise_free,
        }


def scaled(n: float) -> float:
    """``N / (N + 1)``, mapping ``[0, inf)`` monotonically onto ``[0, 1)``."""
    return n / (n + 1.0)


def truncation_time(sol: DephasingSolution, tol: float = TAIL_TOL) -> float:
    """Time beyond which both ``|F|`` and ``integral |dF/dt|`` are below ``tol``."""
    t = sol.F.decay_time(tol)
    if not math.isfinite(t):
        raise PreconditionError("truncation time requested for a non-decaying solution")
    t = max(t, 1e-3)
    while sol.F_dot.envelope_tail_integral(t) > tol:
        t *= 1.25
    return float(t)


def scan_step(sol: DephasingSolution, t_max: float) -> float:
    w = sol.F.max_abs_imag
    step = t_max / 2048.0
    if w > 0:
        step = min(step, math.pi / (8.0 * w))
    return step


def bisect_sign_changes(fn: ExponentialSum, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Vectorized bisection of sign changes of ``fn`` on ``[lo, hi]``."""
    lo, hi = lo.copy(), hi.copy()
    if lo.size == 0:
        return lo
    f_lo = np.sign(fn(lo))
    for _ in range(200):
        width = hi - lo
        if np.all(width <= BISECT_RTOL * np.maximum(hi, 1.0)):
            break
        mid = 0.5 * (lo + hi)
        s = np.sign(fn(mid))
        left = s == f_lo
        lo = np.where(left, mid, lo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def sign_change_brackets(fn: ExponentialSum, grid: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    los, his = [], []
    for start in range(0, grid.size - 1, SCAN_CHUNK):
        g = grid[start : start + SCAN_CHUNK + 1]
        s = np.sign(fn(g))
        idx = np.nonzero(s[:-1] * s[1:] < 0)[0]
        # exact zeros on the grid: bracket around the neighbours
        zeros = np.nonzero(s == 0)[0]
        zeros = zeros[(zeros > 0) & (zeros < g.size - 1)]
        los.append(g[idx])
        his.append(g[idx + 1])
        if zeros.size:
            keep = s[zeros - 1] * s[zeros + 1] < 0
            los.append(g[zeros[keep] - 1])
            his.append(g[zeros[keep] + 1])
    lo, hi = np.concatenate(los), np.concatenate(his)
    order = np.argsort(lo)
    lo, hi = lo[order], hi[order]
    if lo.size > 1:
        # drop duplicate brackets produced by grid zeros
        keep = np.ones(lo.size, bool)
        keep[1:] = lo[1:] >= hi[:-1]
        lo, hi = lo[keep], hi[keep]
    return lo, hi


def _scan_grid(t_max: float, step: float) -> np.ndarray:
    n = max(int(math.ceil(t_max / step)), 2)
    grid = np.linspace(0.0, t_max, n + 1)
    # F'(0) = 0 exactly; start just inside so rounding cannot fake a sign change
    grid[0] = 1e-3 * grid[1]
    return grid


def extrema_of_abs_F(sol: DephasingSolution, t_max: float) -> list[Extremum]:
    """Ordered stationary points of ``F`` and zeros of ``F`` in ``(0, t_max]``.

    A sign scan of ``dF/dt`` on a grid resolving the fastest oscillation is
    refined at the zeros of ``d2F/dt2`` that fall in cells without a sign
    change, so pairs of close zeros of ``dF/dt`` inside one cell are split.

    Raises
    ------
    ScanResolutionError
        The located minima and maxima of ``|F|`` do not alternate.
    """
    if not t_max > 0:
        raise PreconditionError("t_max must be positive")
    if not sol.decaying:
        return []
    F, Fd = sol.F, sol.F_dot
    Fdd = Fd.derivative()
    grid = _scan_grid(t_max, scan_step(sol, t_max))

    lo2, hi2 = sign_change_brackets(Fdd, grid)
    if lo2.size:
        # cells where F'' changes sign but F' does not may hide two zeros of F'
        inflections = bisect_sign_changes(Fdd, lo2, hi2)
        s_lo, s_hi = np.sign(Fd(lo2)), np.sign(Fd(hi2))
        s_mid = np.sign(Fd(inflections))
        hidden = (s_lo == s_hi) & (s_mid != s_lo) & (s_mid != 0)
        if np.any(hidden):
            grid = np.union1d(grid, inflections[hidden])

    lo1, hi1 = sign_change_brackets(Fd, grid)
    stationary = bisect_sign_changes(Fd, lo1, hi1)
    rising_before = np.sign(Fd(lo1)) > 0  # F has a local max there

    f_at = F(stationary) if stationary.size else np.zeros(0)
    is_max_abs = np.where(rising_before, f_at > 0, f_at < 0)

    fine = np.union1d(grid, stationary)
    lo0, hi0 = sign_change_brackets(F, fine)
    zeros = bisect_sign_changes(F, lo0, hi0)

    points = [Extremum(float(t), "max" if m else "min") for t, m in zip(stationary, is_max_abs)]
    points += [Extremum(float(t), "zero") for t in zeros]
    points.sort(key=lambda e: e.t)
    _check_alternation(points)
    return points


def _check_alternation(points: Sequence[Extremum]):
    expected = "min"
    for p in points:
        kind = "min" if p.kind in ("min", "zero") else "max"
        if kind != expected:
            raise ScanResolutionError(f"|F| extrema fail to alternate near t={p.t:.6g}")
        expected = "max" if kind == "min" else "min"


# 15-point Gauss-Kronrod rule with its embedded 7-point Gauss rule
_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0,
])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327,
])
_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
_KWEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
_GWEIGHTS = np.zeros(15)
_GWEIGHTS[1:14:2] = np.concatenate([_WG[:-1], _WG[::-1]])


def integrate_abs(fn: ExponentialSum, breaks: np.ndarray, tol: float = INTERVAL_TOL) -> tuple[float, float]:
    """``integral |fn|`` over ``[breaks[0], breaks[-1]]`` by adaptive Gauss-Kronrod.

    All subintervals are processed together; those whose Kronrod-Gauss
    difference exceeds ``tol`` are halved and retried.
    """
    a, b = breaks[:-1], breaks[1:]
    total, error = 0.0, 0.0
    for _ in range(MAX_QUAD_ROUNDS):
        if a.size == 0:
            break
        half = 0.5 * (b - a)
        centre = 0.5 * (a + b)
        nodes = centre[:, None] + half[:, None] * _NODES
        vals = np.abs(fn(nodes.ravel())).reshape(nodes.shape)
        k = half * (vals @ _KWEIGHTS)
        g = half * (vals @ _GWEIGHTS)
        err = np.abs(k - g)
        done = err <= tol
        total += float(np.sum(k[done]))
        error += float(np.sum(err[done]))
        a, b = a[~done], b[~done]
        mids = 0.5 * (a + b)
        a, b = np.concatenate([a, mids]), np.concatenate([mids, b])
    else:
        if a.size:
            raise InternalConsistencyError("adaptive quadrature failed to converge")
    return total, error


def quadrature_breaks(sol: DephasingSolution, t_max: float, extrema: np.ndarray) -> np.ndarray:
    """Initial partition for the ``|dF/dt|`` integral.

    Besides the extrema it contains a few points per pole decay time and a
    uniform mesh no coarser than one period of the fastest oscillation, so no
    starting interval is long enough to hide structure from a 15-point rule.
    """
    rates = np.unique([abs(r.real) for r, _ in sol.F.terms])
    scales = np.ldexp(1.0, np.arange(-2, 6))[None, :] / rates[rates > 0][:, None]
    scales = scales.ravel()
    mesh = np.linspace(0.0, t_max, int(math.ceil(t_max / (16.0 * scan_step(sol, t_max)))) + 1)
    pts = np.concatenate([mesh, extrema, scales[scales < t_max]])
    return np.unique(pts)


def non_markovianity(sol: DephasingSolution) -> NonMarkovResult:
    """Non-Markovianity by two routes that must agree.

    Route (a) integrates ``|dF/dt|`` between consecutive extrema of ``F``;
    route (b) sums the rises of ``|F|`` over the intervals where the
    dephasing rate is negative.  The reported value is route (a).

    A noise-free model (``nu = 0``) never dephases; it returns zero with
    ``noise_free`` set.
    """
    if not sol.decaying:
        return NonMarkovResult(0.0, 0.0, 0.0, 0.0, (), 0.0, noise_free=True)
    t_max = truncation_time(sol)
    points = extrema_of_abs_F(sol, t_max)
    times = np.array([p.t for p in points])

    breaks = quadrature_breaks(sol, t_max, times)
    integral, q_err = integrate_abs(sol.F_dot, breaks)
    q_err += 0.5 * sol.F_dot.envelope_tail_integral(t_max) + 0.5 * float(sol.F.envelope(t_max))
    n_integral = 0.5 * (integral - 1.0)

    intervals = []
    rises = 0.0
    start = None
    for p in points:
        if p.kind in ("min", "zero"):
            start = p.t
        elif start is not None:
            intervals.append((start, p.t))
            start = None
    if start is not None:
        intervals.append((start, t_max))
    if intervals:
        ends = np.array(intervals)
        rises = float(np.sum(np.abs(sol.F(ends[:, 1])) - np.abs(sol.F(ends[:, 0]))))

    # both routes accumulate rounding over every extremum; compare relatively
    tol = max(ROUTE_TOL * max(1.0, abs(rises)), q_err)
    if abs(n_integral - rises) > tol:
        raise InternalConsistencyError(
            f"integral route {n_integral:.12g} and sum of rises {rises:.12g} differ beyond {tol:.3g}"
        )
    if n_integral < -tol:
        raise InternalConsistencyError(f"negative non-Markovianity {n_integral:.3g}")
    n = max(n_integral, 0.0)
    return NonMarkovResult(n, scaled(n), t_max, q_err, tuple(intervals), rises)


def model_non_markovianity(kernel: MemoryKernel, nu: float, lam: float = 1.0) -> NonMarkovResult:
    return non_markovianity(solve(DephasingModel(kernel, NoiseParams(lam, nu))))


@dataclass(frozen=True)
class SweepPoint:
    nu: float
    n_scaled: float
    n_value: float
    error: str | None = None


def _sweep_task(args) -> SweepPoint:
    kernel, nu, lam = args
    try:
        r = model_non_markovianity(kernel, nu, lam)
        return SweepPoint(nu, r.n_scaled, r.n_value)
    except DephasingError as exc:
        return SweepPoint(nu, math.nan, math.nan, f"{type(exc).__name__}: {exc}")


def _map(fn, tasks, workers):
    workers = default_workers() if workers is None else workers
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * workers))))
    return [fn(t) for t in tasks]


def sweep_nu(kernel: MemoryKernel, nu_grid: Sequence[float], lam: float = 1.0, workers: int | None = None) -> list[SweepPoint]:
    """Scaled non-Markovianity along a grid of coupling strengths.

    Failures at individual points are recorded in ``SweepPoint.error`` and
    the sweep continues; results follow grid order for any worker count.
    """
    nu_grid = [float(x) for x in nu_grid]
    if any(b <= a for a, b in zip(nu_grid, nu_grid[1:])) or any(x < 0 for x in nu_grid):
        raise PreconditionError("nu grid must be increasing and non-negative")
    return _map(_sweep_task, [(kernel, nu, lam) for nu in nu_grid], workers)


@dataclass(frozen=True)
class PhaseDiagram:
    """``n_scaled_grid[i, j]`` holds the scaled value at ``(nu_axis[i], kappa_axis[j])``."""

    kappa_axis: np.ndarray
    nu_axis: np.ndarray
    n_scaled_grid: np.ndarray
    metadata: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)

    def markovian_mask(self, zero_tol: float = ZERO_TOL) -> np.ndarray:
        return scaled(zero_tol) > self.n_scaled_grid

    def rows(self):
        for i, nu in enumerate(self.nu_axis):
            for j, kappa in enumerate(self.kappa_axis):
                yield float(kappa), float(nu), float(self.n_scaled_grid[i, j])


def _cell_task(args):
    family, kappa, omega, nu, lam = args
    try:
        r = model_non_markovianity(make_kernel(family, kappa, omega), nu, lam)
        return r.n_scaled, None
    except DephasingError as exc:
        return math.nan, f"{type(exc).__name__}: {exc}"


def default_axes(lam: float = 1.0, n_kappa: int = 120, n_nu: int = 120) -> tuple[np.ndarray, np.ndarray]:
    return np.linspace(0.05, 6.0, n_kappa) * lam, np.linspace(0.05, 2.0, n_nu) * lam


def phase_diagram(
    kernel_family: str,
    lam: float = 1.0,
    omega: float = 0.0,
    kappa_grid: Sequence[float] | None = None,
    nu_grid: Sequence[float] | None = None,
    workers: int | None = None,
) -> PhaseDiagram:
    """Scaled non-Markovianity on a ``nu x kappa`` grid; failed cells are NaN."""
    if kernel_family == "delta":
        raise PreconditionError("the delta kernel has no memory decay rate to sweep")
    dk, dn = default_axes(lam)
    kappa_axis = np.asarray(dk if kappa_grid is None else kappa_grid, dtype=float)
    nu_axis = np.asarray(dn if nu_grid is None else nu_grid, dtype=float)
    for axis in (kappa_axis, nu_axis):
        if axis.ndim != 1 or np.any(np.diff(axis) <= 0):
            raise PreconditionError("phase-diagram axes must be increasing 1-d grids")
    tasks = [(kernel_family, k, omega, nu, lam) for nu in nu_axis for k in kappa_axis]
    results = _map(_cell_task, tasks, workers)
    grid = np.array([r[0] for r in results]).reshape(nu_axis.size, kappa_axis.size)
    errors = {}
    for idx, (_, err) in enumerate(results):
        if err is not None:
            i, j = divmod(idx, kappa_axis.size)
            errors[(i, j)] = err
    meta = {"kernel": kernel_family, "lambda": lam, "omega": omega, "zero_tol": ZERO_TOL}
    return PhaseDiagram(kappa_axis, nu_axis, grid, meta, errors)


def threshold_kappa(
    kernel_family: str,
    lam: float = 1.0,
    omega: float = 0.0,
    nu: float = 0.8,
    bracket: tuple[float, float] | None = None,
    zero_tol: float = ZERO_TOL,
    resolution: float | None = None,
) -> float:
    """Memory decay rate where the dynamics switches between Markovian and not.

    Bisection on the indicator ``N(kappa) > zero_tol`` until the bracket is
    narrower than ``resolution`` (default ``1e-3 lam``).

    Raises
    ------
    BracketError
        The indicator takes the same value at both ends of ``bracket``.
    """
    lo, hi = bracket if bracket is not None else (0.05 * lam, 6.0 * lam)
    resolution = 1e-3 * lam if resolution is None else resolution

    def indicator(kappa):
        return model_non_markovianity(make_kernel(kernel_family, kappa, omega), nu, lam).n_value > zero_tol

    i_lo, i_hi = indicator(lo), indicator(hi)
    if i_lo == i_hi:
        state = "non-Markovian" if i_lo else "Markovian"
        raise BracketError(f"dynamics is {state} at both kappa={lo} and kappa={hi} (nu={nu})")
    while hi - lo > resolution:
        mid = 0.5 * (lo + hi)
        if indicator(mid) == i_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)
