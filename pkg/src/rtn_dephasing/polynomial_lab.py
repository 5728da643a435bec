"""Real polynomials, proper rational functions and their exact inverse Laplace transforms.

A proper rational function ``N(p)/D(p)`` with monic ``D`` is inverted by

1. locating the roots of ``D`` (companion matrix eigenvalues, Newton polish),
   clustered into real roots and conjugate pairs with multiplicities,
2. computing partial-fraction coefficients from Taylor expansions of the
   deflated function ``N(p) (p - r)^e / D(p)`` around each pole ``r``,
3. mapping each term ``c / (p - r)^k`` to ``c t^(k-1) / (k-1)! e^(r t)``.

The result is an :class:`ExponentialSum`, a finite sum of polynomials in ``t``
times complex exponentials, closed under differentiation.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import mpmath
import numpy as np
from numpy.polynomial import polynomial as npoly
from scipy.special import gammaincc

from .errors import InternalConsistencyError, PreconditionError, RootFindingError

DEFAULT_CLUSTER_TOL = 1e-7
RECONSTRUCTION_RTOL = 1e-8
PROBE_RTOL = 1e-10
IMAG_RESIDUE_TOL = 1e-12
N_PROBES = 32

# Probe-point reconstruction checks; set RTN_DEPHASING_VERIFY=0 to skip them.
VERIFY = os.environ.get("RTN_DEPHASING_VERIFY", "1") not in ("0", "false", "no")


def _verify(flag):
    return VERIFY if flag is None else flag


@dataclass(frozen=True)
class RealPolynomial:
    """Real polynomial with coefficients in ascending degree order."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        c = [float(x) for x in np.atleast_1d(np.asarray(self.coeffs, dtype=float))]
        if not c:
            c = [0.0]
        if not all(math.isfinite(x) for x in c):
            raise PreconditionError(f"non-finite polynomial coefficients {c}")
        while len(c) > 1 and c[-1] == 0.0:
            c.pop()
        object.__setattr__(self, "coeffs", tuple(c))

    @classmethod
    def constant(cls, value: float) -> RealPolynomial:
        return cls((value,))

    @classmethod
    def variable(cls) -> RealPolynomial:
        return cls((0.0, 1.0))

    @classmethod
    def from_roots(cls, roots: Sequence[complex]) -> RealPolynomial:
        """Monic polynomial with the given (conjugate-closed) roots."""
        c = np.array([1.0 + 0j])
        for r in roots:
            c = npoly.polymul(c, [-r, 1.0])
        return cls(tuple(np.real(c)))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return self.coeffs == (0.0,)

    @property
    def leading(self) -> float:
        return self.coeffs[-1]

    @property
    def is_monic(self) -> bool:
        return self.leading == 1.0

    def __call__(self, x):
        return npoly.polyval(x, self.coeffs)

    def _coerce(self, other):
        if isinstance(other, RealPolynomial):
            return other
        if isinstance(other, (int, float, np.floating, np.integer)):
            return RealPolynomial.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RealPolynomial(tuple(npoly.polyadd(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return RealPolynomial(tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RealPolynomial(tuple(npoly.polysub(self.coeffs, other.coeffs)))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RealPolynomial(tuple(npoly.polymul(self.coeffs, other.coeffs)))

    __rmul__ = __mul__

    def scaled(self, factor: float) -> RealPolynomial:
        return RealPolynomial(tuple(factor * x for x in self.coeffs))

    def monic(self) -> RealPolynomial:
        lead = self.leading
        return RealPolynomial(tuple(x / lead for x in self.coeffs))

    def derivative(self) -> RealPolynomial:
        return RealPolynomial(tuple(npoly.polyder(self.coeffs)))

    def divmod(self, divisor: RealPolynomial) -> tuple[RealPolynomial, RealPolynomial]:
        q, r = npoly.polydiv(self.coeffs, divisor.coeffs)
        return RealPolynomial(tuple(q)), RealPolynomial(tuple(r))

    def magnitude_at(self, x) -> float:
        """``sum |c_k| |x|^k``, the natural scale for a residual at ``x``."""
        return float(npoly.polyval(abs(x), np.abs(self.coeffs)))


ONE = RealPolynomial.constant(1.0)
ZERO = RealPolynomial.constant(0.0)
P = RealPolynomial.variable()


@dataclass(frozen=True)
class RationalFunction:
    """``num/den`` with ``den`` normalized to be monic on construction."""

    num: RealPolynomial
    den: RealPolynomial

    def __post_init__(self):
        if self.den.is_zero:
            raise PreconditionError("zero denominator")
        lead = self.den.leading
        if lead != 1.0:
            object.__setattr__(self, "num", RealPolynomial(tuple(x / lead for x in self.num.coeffs)))
            object.__setattr__(self, "den", self.den.monic())

    @classmethod
    def constant(cls, value: float) -> RationalFunction:
        return cls(RealPolynomial.constant(value), ONE)

    @property
    def is_proper(self) -> bool:
        return self.num.is_zero or self.num.degree < self.den.degree

    @property
    def is_zero(self) -> bool:
        return self.num.is_zero

    def __call__(self, p):
        return self.num(p) / self.den(p)

    def _coerce(self, other):
        if isinstance(other, RationalFunction):
            return other
        if isinstance(other, RealPolynomial):
            return RationalFunction(other, ONE)
        if isinstance(other, (int, float, np.floating, np.integer)):
            return RationalFunction.constant(float(other))
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        if self.den == other.den:
            return RationalFunction(self.num + other.num, self.den)
        return RationalFunction(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction(-self.num, self.den)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def reciprocal(self) -> RationalFunction:
        if self.num.is_zero:
            raise ZeroDivisionError("reciprocal of the zero rational function")
        return RationalFunction(self.den, self.num)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self * other.reciprocal()

    def reduced(self, cluster_tol: float = DEFAULT_CLUSTER_TOL, residual_tol: float = 1e-14) -> RationalFunction:
        """Cancel factors shared by numerator and denominator up to rounding.

        A numerator root ``r`` is cancelled against the nearest denominator
        root of the same kind when ``|den(r)|`` is below ``residual_tol``
        times the magnitude of the terms of ``den(r)``.  Nearly coincident
        pole-zero pairs carry small but genuine residues and are kept.  Both
        polynomials are rebuilt from their surviving roots, which avoids the
        instability of deflating by large roots.
        """
        if self.num.is_zero:
            return RationalFunction(ZERO, ONE)
        if self.num.degree == 0 or self.den.degree == 0:
            return self
        num_roots = dict(_root_list(find_poles(self.num.monic(), cluster_tol)))
        den_roots = dict(_root_list(find_poles(self.den, cluster_tol)))
        cancelled = False
        for r in list(num_roots):
            candidates = [d for d in den_roots if (d.imag == 0) == (r.imag == 0)]
            if not candidates:
                continue
            d = min(candidates, key=lambda z: abs(z - r))
            if abs(self.den(r)) > residual_tol * self.den.magnitude_at(r):
                continue
            c = min(num_roots[r], den_roots[d])
            num_roots[r] -= c
            den_roots[d] -= c
            cancelled = True
        if not cancelled:
            return self
        num = RealPolynomial.from_roots(_expand(num_roots)).scaled(self.num.leading)
        den = RealPolynomial.from_roots(_expand(den_roots))
        return RationalFunction(num, den)


def _root_list(poles: "PoleSet") -> list[tuple[complex, int]]:
    out = [(complex(a), e) for a, e in poles.real_roots]
    for b, e in poles.complex_pairs:
        out += [(b, e), (b.conjugate(), e)]
    return out


def _expand(roots: dict) -> list[complex]:
    return [r for r, m in roots.items() for _ in range(m)]


@dataclass(frozen=True)
class PoleSet:
    """Distinct real roots and upper-half-plane complex roots, with multiplicities."""

    real_roots: tuple[tuple[float, int], ...]
    complex_pairs: tuple[tuple[complex, int], ...]

    @property
    def degree(self) -> int:
        return sum(e for _, e in self.real_roots) + 2 * sum(e for _, e in self.complex_pairs)

    def roots(self) -> list[tuple[complex, int]]:
        """All distinct roots, conjugates included."""
        out = [(complex(a), e) for a, e in self.real_roots]
        for b, e in self.complex_pairs:
            out += [(b, e), (b.conjugate(), e)]
        return out

    @property
    def max_real_part(self) -> float:
        return max((r.real for r, _ in self.roots()), default=-math.inf)

    @property
    def max_abs_imag(self) -> float:
        return max((b.imag for b, _ in self.complex_pairs), default=0.0)

    def polynomial(self) -> RealPolynomial:
        expanded = [r for r, e in self.roots() for _ in range(e)]
        return RealPolynomial.from_roots(expanded)


def _cluster(roots: np.ndarray, tol: float) -> list[list[int]]:
    """Single-linkage clusters of roots closer than ``tol * (1 + max(|r_i|, |r_j|))``."""
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < tol * (1.0 + max(abs(roots[i]), abs(roots[j]))):
                parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(len(roots)):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def _polish(poly: RealPolynomial, root: complex, radius: float, iterations: int = 6) -> complex:
    """Newton refinement with residuals evaluated in 40-digit arithmetic.

    Double-precision residuals limit closely spaced simple roots to an
    accuracy of ``eps / |D'(r)|``; extended residuals recover full precision.
    """
    with mpmath.workdps(40):
        coeffs = [mpmath.mpf(c) for c in reversed(poly.coeffs)]
        z = mpmath.mpc(root)
        for _ in range(iterations):
            val, der = mpmath.mpf(0), mpmath.mpf(0)
            for c in coeffs:
                der = der * z + val
                val = val * z + c
            if der == 0:
                break
            step = val / der
            z -= step
            if abs(z - root) > radius:
                return root
            if abs(step) <= 1e-30 * (1 + abs(z)):
                break
        return complex(z)


def find_poles(den: RealPolynomial, cluster_tol: float = DEFAULT_CLUSTER_TOL) -> PoleSet:
    """Roots of a monic real polynomial grouped into real roots and conjugate pairs.

    Roots closer than ``cluster_tol * (1 + |root|)`` (larger of the pair) are merged into one
    root of higher multiplicity located at the cluster centroid; a cluster
    whose imaginary part is below ``cluster_tol * (1 + |root|)`` is snapped
    to the real axis.

    Raises
    ------
    PreconditionError
        ``den`` is not monic or has degree zero.
    RootFindingError
        The eigenvalue solver failed or the roots do not reproduce ``den``.
    """
    if den.degree < 1:
        raise PreconditionError("find_poles needs a polynomial of degree >= 1")
    if not den.is_monic:
        raise PreconditionError(f"denominator must be monic, leading coefficient {den.leading}")
    try:
        raw = np.roots(den.coeffs[::-1]).astype(complex)
    except np.linalg.LinAlgError as exc:
        raise RootFindingError(f"companion eigenvalues did not converge: {exc}") from exc
    if raw.size != den.degree or not np.all(np.isfinite(raw)):
        raise RootFindingError("root finder returned non-finite or missing roots", partial=raw)

    scale = 1.0 + float(np.max(np.abs(raw)))
    clusters = _cluster(raw, cluster_tol)
    reps: list[tuple[complex, int]] = []
    for members in clusters:
        centroid = complex(np.mean(raw[members]))
        if len(members) == 1:
            others = np.delete(raw, members[0])
            radius = 0.5 * float(np.min(np.abs(others - centroid))) if others.size else scale
            centroid = _polish(den, centroid, radius)
        reps.append((centroid, len(members)))

    real_roots, upper, lower = [], [], []
    for r, m in reps:
        if abs(r.imag) < cluster_tol * (1.0 + abs(r)):
            real_roots.append((r.real, m))
        elif r.imag > 0:
            upper.append((r, m))
        else:
            lower.append((r, m))
    if len(upper) != len(lower):
        raise RootFindingError("complex roots do not pair into conjugates", partial=raw)
    pairs = []
    remaining = list(lower)
    for b, m in upper:
        k = min(range(len(remaining)), key=lambda i: abs(remaining[i][0] - b.conjugate()))
        c, mc = remaining.pop(k)
        if mc != m:
            raise RootFindingError(f"conjugate multiplicity mismatch at {b}", partial=raw)
        # symmetrize the pair
        pairs.append((complex(0.5 * (b.real + c.real), 0.5 * (b.imag - c.imag)), m))

    real_roots.sort(key=lambda x: -x[0])
    pairs.sort(key=lambda x: (-x[0].real, x[0].imag))
    poles = PoleSet(tuple(real_roots), tuple(pairs))

    rebuilt = np.asarray(poles.polynomial().coeffs)
    target = np.asarray(den.coeffs)
    if rebuilt.size != target.size or np.max(np.abs(rebuilt - target)) > RECONSTRUCTION_RTOL * np.max(np.abs(target)):
        raise RootFindingError("clustered roots do not reproduce the polynomial", partial=raw)
    return poles


@dataclass(frozen=True)
class PartialFractionExpansion:
    """Coefficients of ``sum_k c_k / (p - r)^(e - k + 1)``, ``k = 1..e``, per pole.

    ``real_terms`` holds ``(a, (alpha_1, ..., alpha_e))`` for each real pole,
    ``complex_terms`` holds ``(b, (beta_1, ..., beta_e))`` for each pole in
    the upper half plane; the conjugate terms are implied.
    """

    real_terms: tuple[tuple[float, tuple[float, ...]], ...]
    complex_terms: tuple[tuple[complex, tuple[complex, ...]], ...]

    def __call__(self, p):
        p = np.asarray(p, dtype=complex)
        total = np.zeros_like(p)
        for a, coeffs in self.real_terms:
            e = len(coeffs)
            for k, c in enumerate(coeffs, start=1):
                total = total + c / (p - a) ** (e - k + 1)
        for b, coeffs in self.complex_terms:
            e = len(coeffs)
            for k, c in enumerate(coeffs, start=1):
                n = e - k + 1
                total = total + c / (p - b) ** n + np.conj(c) / (p - np.conj(b)) ** n
        return total


def _taylor_at(coeffs: Sequence[complex], x0: complex, order: int) -> np.ndarray:
    """First ``order`` Taylor coefficients of a polynomial around ``x0``."""
    c = np.array(coeffs, dtype=complex)
    out = np.zeros(order, dtype=complex)
    for k in range(min(order, c.size)):
        # synthetic division yields successive Taylor coefficients
        acc = 0j
        q = np.zeros(c.size - 1, dtype=complex)
        for i in range(c.size - 1, -1, -1):
            acc = acc * x0 + c[i]
            if i > 0:
                q[i - 1] = acc
        out[k] = acc
        c = q
        if c.size == 0:
            break
    return out


def _series_div(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    out = np.zeros_like(num)
    for i in range(num.size):
        out[i] = (num[i] - np.dot(out[:i], den[i:0:-1])) / den[0]
    return out


def _laurent_coefficients(f: RationalFunction, pole: complex, mult: int, others: list[tuple[complex, int]]) -> np.ndarray:
    """Taylor coefficients of ``f(p) (p - pole)^mult`` at ``pole`` up to order ``mult - 1``."""
    n_series = _taylor_at(f.num.coeffs, pole, mult)
    q_series = np.zeros(mult, dtype=complex)
    q_series[0] = 1.0
    for s, m in others:
        lin = np.zeros(mult, dtype=complex)
        lin[0] = pole - s
        if mult > 1:
            lin[1] = 1.0
        for _ in range(m):
            q_series = np.convolve(q_series, lin)[:mult]
    return _series_div(n_series, q_series)


def partial_fractions(f: RationalFunction, poles: PoleSet, verify: bool | None = None) -> PartialFractionExpansion:
    """Partial-fraction expansion of a proper rational function over ``poles``.

    The coefficient ``alpha_k`` of ``1/(p - a)^(e - k + 1)`` is the
    ``(k-1)``-th Taylor coefficient of ``f(p) (p - a)^e`` at ``a``, obtained
    analytically by power-series division of the shifted numerator by the
    product of the remaining linear factors.
    """
    if not f.is_proper:
        raise PreconditionError("partial_fractions needs a proper rational function")
    if poles.degree != f.den.degree:
        raise PreconditionError(f"pole set has degree {poles.degree}, denominator has degree {f.den.degree}")
    rebuilt = np.asarray(poles.polynomial().coeffs)
    target = np.asarray(f.den.coeffs)
    if np.max(np.abs(rebuilt - target)) > RECONSTRUCTION_RTOL * np.max(np.abs(target)):
        raise PreconditionError("pole set does not reproduce the denominator")

    all_roots = poles.roots()
    real_terms = []
    for i, (a, e) in enumerate(poles.real_roots):
        others = [rm for rm in all_roots if rm[0] != complex(a)]
        g = _laurent_coefficients(f, complex(a), e, others)
        real_terms.append((a, tuple(float(x.real) for x in g)))
    complex_terms = []
    for b, e in poles.complex_pairs:
        others = [rm for rm in all_roots if rm[0] != b]
        g = _laurent_coefficients(f, b, e, others)
        complex_terms.append((b, tuple(complex(x) for x in g)))
    pfe = PartialFractionExpansion(tuple(real_terms), tuple(complex_terms))

    if _verify(verify) and not f.num.is_zero:
        _check_round_trip(f, pfe, poles)
    return pfe


def _check_round_trip(f: RationalFunction, pfe: PartialFractionExpansion, poles: PoleSet):
    rng = np.random.default_rng(20240611)
    radius = 1.0 + max((abs(r) for r, _ in poles.roots()), default=0.0)
    probes = radius * rng.uniform(1.5, 3.0, N_PROBES) * np.exp(2j * np.pi * rng.uniform(size=N_PROBES))
    expected = f(probes)
    err = float(np.max(np.abs(pfe(probes) - expected) / np.abs(expected)))
    if not err < PROBE_RTOL:
        # near-coincident poles cancel catastrophically in double precision
        err = _mp_round_trip_error(f, pfe, probes)
    if not err < PROBE_RTOL:
        raise InternalConsistencyError(f"partial-fraction round trip error {err:.3e} exceeds {PROBE_RTOL}")


def _mp_round_trip_error(f, pfe, probes) -> float:
    with mpmath.workdps(30):
        num = [mpmath.mpf(c) for c in reversed(f.num.coeffs)]
        den = [mpmath.mpf(c) for c in reversed(f.den.coeffs)]
        terms = [(mpmath.mpf(a), [mpmath.mpf(c) for c in cs]) for a, cs in pfe.real_terms]
        for b, cs in pfe.complex_terms:
            terms.append((mpmath.mpc(b), [mpmath.mpc(c) for c in cs]))
            terms.append((mpmath.mpc(b).conjugate(), [mpmath.mpc(c).conjugate() for c in cs]))
        worst = 0.0
        for z in probes:
            z = mpmath.mpc(z)
            exact = mpmath.polyval(num, z) / mpmath.polyval(den, z)
            total = mpmath.mpc(0)
            for r, cs in terms:
                e = len(cs)
                for k, c in enumerate(cs, start=1):
                    total += c / (z - r) ** (e - k + 1)
            worst = max(worst, float(abs(total - exact) / abs(exact)))
        return worst


@dataclass(frozen=True)
class ExponentialSum:
    """``sum_j P_j(t) exp(r_j t)`` with complex roots and polynomial coefficients.

    ``terms`` holds ``(root, (c_0, c_1, ...))`` with ``P_j(t) = sum_m c_m t^m``.
    """

    terms: tuple[tuple[complex, tuple[complex, ...]], ...]
    real_valued: bool = True

    @cached_property
    def _arrays(self):
        if not self.terms:
            return np.zeros(0, dtype=complex), np.zeros((0, 1), dtype=complex)
        width = max(len(c) for _, c in self.terms)
        roots = np.array([r for r, _ in self.terms], dtype=complex)
        coef = np.zeros((len(self.terms), width), dtype=complex)
        for i, (_, c) in enumerate(self.terms):
            coef[i, : len(c)] = c
        return roots, coef

    def _components(self, t):
        roots, coef = self._arrays
        t = np.asarray(t, dtype=float)
        powers = t[..., None] ** np.arange(coef.shape[1])
        polys = powers @ coef.T
        return polys * np.exp(t[..., None] * roots)

    def complex_values(self, t):
        return self._components(t).sum(axis=-1)

    def __call__(self, t):
        return eval_exp_sum(self, t)

    def derivative(self) -> ExponentialSum:
        return derivative_exp_sum(self)

    @property
    def max_real_part(self) -> float:
        return max((r.real for r, _ in self.terms), default=-math.inf)

    @property
    def max_abs_imag(self) -> float:
        return max((abs(r.imag) for r, _ in self.terms), default=0.0)

    def envelope(self, t):
        """``sum_j sum_m |c_jm| t^m exp(Re(r_j) t)``, an upper bound on ``|value(t)|``."""
        roots, coef = self._arrays
        t = np.asarray(t, dtype=float)
        powers = t[..., None] ** np.arange(coef.shape[1])
        return ((powers @ np.abs(coef).T) * np.exp(t[..., None] * roots.real)).sum(axis=-1)

    def envelope_tail_integral(self, t0: float) -> float:
        """Upper bound on ``integral_{t0}^inf |value(t)| dt`` for a decaying sum."""
        total = 0.0
        for r, c in self.terms:
            sigma = -r.real
            if sigma <= 0:
                return math.inf
            for m, cm in enumerate(c):
                if cm == 0:
                    continue
                total += abs(cm) * math.gamma(m + 1) * gammaincc(m + 1, sigma * t0) / sigma ** (m + 1)
        return total

    def decay_time(self, tol: float) -> float:
        """A time beyond which the envelope is monotone and below ``tol``."""
        if not self.terms:
            return 0.0
        if self.max_real_part >= 0:
            return math.inf
        t_lo = max(
            (len(c) - 1) / -r.real for r, c in self.terms
        )
        if self.envelope(t_lo) <= tol:
            return float(t_lo)
        t_hi = max(2.0 * t_lo, 1.0 / -self.max_real_part)
        while self.envelope(t_hi) > tol:
            t_lo, t_hi = t_hi, 2.0 * t_hi
        for _ in range(60):
            mid = 0.5 * (t_lo + t_hi)
            if self.envelope(mid) > tol:
                t_lo = mid
            else:
                t_hi = mid
        return float(t_hi)


def to_time_domain(pfe: PartialFractionExpansion, real_valued: bool = True) -> ExponentialSum:
    """Inverse Laplace transform of a partial-fraction expansion, term by term."""
    terms = []
    for a, coeffs in pfe.real_terms:
        e = len(coeffs)
        poly = tuple(complex(coeffs[e - 1 - m] / math.factorial(m)) for m in range(e))
        terms.append((complex(a), poly))
    for b, coeffs in pfe.complex_terms:
        e = len(coeffs)
        poly = tuple(complex(coeffs[e - 1 - m]) / math.factorial(m) for m in range(e))
        terms.append((complex(b), poly))
        terms.append((complex(b).conjugate(), tuple(c.conjugate() for c in poly)))
    return ExponentialSum(tuple(terms), real_valued)


def eval_exp_sum(s: ExponentialSum, t):
    """Evaluate a real-valued exponential sum at scalar or array ``t``.

    Raises
    ------
    InternalConsistencyError
        The imaginary residue exceeds ``1e-12`` times the sum of the term
        magnitudes.
    """
    if not s.real_valued:
        raise PreconditionError("eval_exp_sum requires a real-valued exponential sum")
    scalar = np.ndim(t) == 0
    if not s.terms:
        out = np.zeros(np.shape(t))
        return float(out) if scalar else out
    comps = s._components(t)
    values = comps.sum(axis=-1)
    magnitude = np.abs(comps).sum(axis=-1)
    residue = np.abs(values.imag)
    if np.any(residue > IMAG_RESIDUE_TOL * magnitude + 1e-300):
        worst = float(np.max(residue / np.maximum(magnitude, 1e-300)))
        raise InternalConsistencyError(f"imaginary residue {worst:.3e} relative to term magnitude")
    out = values.real
    return float(out) if scalar else out


def derivative_exp_sum(s: ExponentialSum) -> ExponentialSum:
    """Termwise derivative: ``d/dt [P(t) e^(r t)] = (P'(t) + r P(t)) e^(r t)``."""
    terms = []
    for r, c in s.terms:
        c = np.asarray(c, dtype=complex)
        new = r * c
        new[:-1] += c[1:] * np.arange(1, c.size)
        terms.append((r, tuple(complex(x) for x in new)))
    return ExponentialSum(tuple(terms), s.real_valued)


def inverse_laplace(f: RationalFunction, cluster_tol: float = DEFAULT_CLUSTER_TOL, verify: bool | None = None) -> tuple[ExponentialSum, PoleSet]:
    """Exact time-domain image of a proper rational function, with its poles."""
    if f.num.is_zero:
        return ExponentialSum(()), PoleSet((), ())
    poles = find_poles(f.den, cluster_tol)
    return to_time_domain(partial_fractions(f, poles, verify=verify)), poles
