"""Trajectory Monte Carlo for memoryless telegraph noise.

Flips form a Poisson process of rate ``lam``; the initial value is ``+nu`` or
``-nu`` with equal probability.  The phase ``nu * integral s(tau) dtau`` is
piecewise linear between flips and is evaluated exactly at the output grid.

Random streams are assigned per block of ``BLOCK`` trajectories through
``SeedSequence(seed, spawn_key=(block,))``, so any way of distributing blocks
over workers gives bitwise-identical sums when they are combined in block
order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import PreconditionError
from ..noise_kernels import NoiseParams

BLOCK = 4096


@dataclass(frozen=True)
class McConfig:
    samples: int = 100_000
    seed: int = 20240611
    dt_record: float = 0.05
    t_max: float = 10.0

    def __post_init__(self):
        if int(self.samples) != self.samples or self.samples < 1:
            raise PreconditionError("samples must be a positive integer")
        if not (self.dt_record > 0 and self.t_max > 0):
            raise PreconditionError("dt_record and t_max must be positive")

    @property
    def grid(self) -> np.ndarray:
        n = int(round(self.t_max / self.dt_record))
        return np.linspace(0.0, n * self.dt_record, n + 1)


@dataclass(frozen=True)
class McResult:
    t: np.ndarray
    F: np.ndarray
    stderr: np.ndarray
    sin_mean: np.ndarray
    sin_stderr: np.ndarray
    samples: int

    def rows(self):
        return list(zip(self.t.tolist(), self.F.tolist(), self.stderr.tolist()))


@dataclass
class _Trajectories:
    """Flip times of a block stored flat, sorted by (trajectory, time)."""

    n: int
    start: np.ndarray  # +1 or -1
    counts: np.ndarray
    offsets: np.ndarray  # index of each trajectory's first flip
    flips: np.ndarray
    cum: np.ndarray  # integral of the sign process up to each flip
    keys: np.ndarray = field(repr=False, default=None)
    span: float = 0.0

    def flips_before(self, t: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Number of flips in ``[0, t]`` per (trajectory, time), and the flat index of the last one."""
        q = np.arange(self.n)[:, None] * self.span + t[None, :]
        pos = np.searchsorted(self.keys, q, side="right")
        k = pos - self.offsets[:, None]
        return k, pos - 1

    def sign(self, t: np.ndarray) -> np.ndarray:
        k, _ = self.flips_before(t)
        return self.start[:, None] * np.where(k % 2 == 0, 1.0, -1.0)

    def integral(self, t: np.ndarray) -> np.ndarray:
        k, last = self.flips_before(t)
        last_c = np.clip(last, 0, max(self.flips.size - 1, 0))
        has = k > 0
        tau = np.where(has, self.flips[last_c] if self.flips.size else 0.0, 0.0)
        base = np.where(has, self.cum[last_c] if self.cum.size else 0.0, 0.0)
        parity = np.where(k % 2 == 0, 1.0, -1.0)
        return self.start[:, None] * (base + parity * (t[None, :] - tau))


def _sample_block(lam: float, t_max: float, n: int, seed: int, block: int) -> _Trajectories:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(block,)))
    start = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    counts = rng.poisson(lam * t_max, n)
    owner = np.repeat(np.arange(n), counts)
    times = rng.uniform(0.0, t_max, owner.size)
    order = np.lexsort((times, owner))
    times = times[order]
    offsets = np.concatenate([[0], np.cumsum(counts)[:-1]]).astype(np.int64)
    # segment j of a trajectory (before flip j) has sign (-1)^j relative to the start
    local = np.arange(owner.size) - offsets[owner]
    prev = np.where(local == 0, 0.0, np.concatenate([[0.0], times[:-1]]))
    seg = (times - prev) * np.where(local % 2 == 0, 1.0, -1.0)
    cum = np.cumsum(seg)
    # restart the running integral at each trajectory's first flip
    cum -= np.repeat(np.concatenate([[0.0], cum])[offsets], counts)
    span = 2.0 * t_max + 1.0
    keys = owner * span + times
    return _Trajectories(n, start, counts, offsets, times, cum, keys, span)


def _blocks(samples: int):
    for b, lo in enumerate(range(0, samples, BLOCK)):
        yield b, min(BLOCK, samples - lo)


def mc_dephasing_memoryless(params: NoiseParams, cfg: McConfig) -> McResult:
    """Sample-mean estimate of ``F(t) = <cos(phase)>`` on ``cfg.grid``.

    The mean of ``sin(phase)`` is returned as well; it vanishes for a
    stationary symmetric process and serves as a realness check.
    """
    t = cfg.grid
    sums = np.zeros((4, t.size))
    for b, n in _blocks(cfg.samples):
        traj = _sample_block(params.lam, cfg.t_max + cfg.dt_record, n, cfg.seed, b)
        phase = params.nu * traj.integral(t)
        c, s = np.cos(phase), np.sin(phase)
        sums += np.stack([c.sum(0), (c * c).sum(0), s.sum(0), (s * s).sum(0)])
    N = cfg.samples
    mean_c, mean_s = sums[0] / N, sums[2] / N
    if N > 1:
        var_c = np.maximum(sums[1] - N * mean_c**2, 0.0) / (N - 1)
        var_s = np.maximum(sums[3] - N * mean_s**2, 0.0) / (N - 1)
    else:
        var_c = var_s = np.zeros_like(mean_c)
    mean_c[0] = 1.0  # cos(0) exactly; guards against summation rounding
    return McResult(t, mean_c, np.sqrt(var_c / N), mean_s, np.sqrt(var_s / N), N)


@dataclass(frozen=True)
class MomentCheck:
    name: str
    times: tuple[float, ...]
    estimate: float
    expected: float
    stderr: float

    @property
    def passed(self) -> bool:
        return abs(self.estimate - self.expected) <= 3.0 * self.stderr


@dataclass(frozen=True)
class MomentReport:
    checks: tuple[MomentCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def mc_moment_checks(params: NoiseParams, cfg: McConfig) -> MomentReport:
    """First to fourth moments of the sampled noise against their closed forms.

    Times are placed so that ``2 lam |t1 - t2| = 1`` for the pair
    correlation; the four-point check uses an ordered tuple where the
    correlator factorizes as ``C(t1 - t2) C(t3 - t4)``.
    """
    lam, nu = params.lam, params.nu
    base = 0.5 / lam
    t1, t2 = 3.0 * base, 2.0 * base
    quad = np.array([4.0, 3.2, 1.5, 0.9]) * base
    probe = np.array([base, t1, t2, *quad, 0.7 * base])
    horizon = float(probe.max()) + 1.0
    C = lambda d: nu * nu * np.exp(-2.0 * lam * abs(d))
    products = {
        "mean": lambda x: x[:, 0],
        "pair": lambda x: x[:, 1] * x[:, 2],
        "triple": lambda x: x[:, 1] * x[:, 2] * x[:, 7],
        "quadruple": lambda x: x[:, 3] * x[:, 4] * x[:, 5] * x[:, 6],
    }
    acc = {k: np.zeros(2) for k in products}
    for b, n in _blocks(cfg.samples):
        traj = _sample_block(lam, horizon, n, cfg.seed, b)
        x = nu * traj.sign(probe)
        for k, fn in products.items():
            v = fn(x)
            acc[k] += (v.sum(), (v * v).sum())
    N = cfg.samples
    expected = {
        "mean": 0.0,
        "pair": float(C(t1 - t2)),
        "triple": 0.0,
        "quadruple": float(C(quad[0] - quad[1]) * C(quad[2] - quad[3])),
    }
    times = {
        "mean": (probe[0],),
        "pair": (t1, t2),
        "triple": (t1, t2, probe[7]),
        "quadruple": tuple(quad),
    }
    checks = []
    for k in products:
        s, s2 = acc[k]
        mean = s / N
        var = max(s2 - N * mean * mean, 0.0) / max(N - 1, 1)
        checks.append(MomentCheck(k, tuple(float(x) for x in times[k]), float(mean), expected[k], float((var / N) ** 0.5)))
    return MomentReport(tuple(checks))
