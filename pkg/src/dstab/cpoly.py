"""Complex-coefficient polynomial and rational-function algebra.

``CPoly`` stores coefficients in ascending degree order; ``CRational`` keeps
its denominator monic.  No pole-zero cancellation is ever performed
implicitly -- cancellation can silently hide unstable hidden modes -- but an
explicit :func:`reduce` utility exists for callers that want it.

The root finder is an Aberth-Ehrlich simultaneous iteration; tests
cross-check it against companion-matrix eigenvalues.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateLoopError,
    NotAPoleError,
    NotSimplePoleError,
    PoleEvaluationError,
    RootFindingError,
)

# Trailing coefficients below TRIM_TOL * max|c| are treated as zero.
TRIM_TOL = 1e-14
# Relative tolerance for clustering numerically coincident roots
# (conjugate-pair detection in the real-equivalent embedding).
CLUSTER_TOL = 1e-8


def _trim(coeffs: tuple[complex, ...]) -> tuple[complex, ...]:
    scale = max((abs(c) for c in coeffs), default=0.0)
    if scale == 0.0:
        return (0j,)
    k = len(coeffs)
    while k > 1 and abs(coeffs[k - 1]) <= TRIM_TOL * scale:
        k -= 1
    return tuple(complex(c) for c in coeffs[:k])


@dataclass(frozen=True)
class CPoly:
    """Polynomial with complex coefficients, ascending degree order."""

    coeffs: tuple[complex, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "coeffs", _trim(tuple(self.coeffs)))

    @classmethod
    def zero(cls) -> CPoly:
        return cls((0j,))

    @classmethod
    def one(cls) -> CPoly:
        return cls((1 + 0j,))

    @classmethod
    def from_roots(cls, roots: list[complex] | tuple[complex, ...], lead: complex = 1.0) -> CPoly:
        c = np.array([complex(lead)])
        for r in roots:
            c = np.convolve(c, np.array([-complex(r), 1.0]))
        return cls(tuple(c))

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 1 and self.coeffs[0] == 0

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return -1 if self.is_zero else len(self.coeffs) - 1

    @property
    def norm_inf(self) -> float:
        return max(abs(c) for c in self.coeffs)

    def __call__(self, z: complex | np.ndarray) -> complex | np.ndarray:
        if isinstance(z, np.ndarray):
            acc = np.zeros_like(z, dtype=complex)
            for c in reversed(self.coeffs):
                acc = acc * z + c
            return acc
        acc = 0j
        for c in reversed(self.coeffs):
            acc = acc * z + c
        return acc

    def derivative(self) -> CPoly:
        if self.degree <= 0:
            return CPoly.zero()
        return CPoly(tuple(k * c for k, c in enumerate(self.coeffs) if k >= 1))

    def conjugate_coeffs(self) -> CPoly:
        """Polynomial with conjugated coefficients (roots are conjugated)."""
        return CPoly(tuple(c.conjugate() for c in self.coeffs))

    def __add__(self, other: CPoly) -> CPoly:
        n = max(len(self.coeffs), len(other.coeffs))
        a = list(self.coeffs) + [0j] * (n - len(self.coeffs))
        for k, c in enumerate(other.coeffs):
            a[k] += c
        return CPoly(tuple(a))

    def __sub__(self, other: CPoly) -> CPoly:
        return self + other.scale(-1.0)

    def __mul__(self, other: CPoly) -> CPoly:
        if self.is_zero or other.is_zero:
            return CPoly.zero()
        return CPoly(tuple(np.convolve(np.array(self.coeffs), np.array(other.coeffs))))

    def scale(self, a: complex) -> CPoly:
        return CPoly(tuple(a * c for c in self.coeffs))

    def compose_linear(self, a: complex, b: complex) -> CPoly:
        """Return p(a*x + b) via Horner on polynomial coefficients."""
        acc = CPoly.zero()
        lin = CPoly((complex(b), complex(a)))
        for c in reversed(self.coeffs):
            acc = acc * lin + CPoly((complex(c),))
        return acc

    def real_coeffs(self, tol: float = 1e-9) -> CPoly:
        """Drop imaginary parts, checking they are rounding noise."""
        scale = max(self.norm_inf, 1e-300)
        worst = max(abs(c.imag) for c in self.coeffs)
        if worst > tol * scale:
            raise ValueError(f"coefficients are not real: worst Im = {worst:.3e} (scale {scale:.3e})")
        return CPoly(tuple(complex(c.real) for c in self.coeffs))


def roots(p: CPoly, *, residual_tol: float = 1e-8, max_iter: int = 200) -> list[complex]:
    """All roots of ``p`` with multiplicity, via Aberth-Ehrlich iteration.

    Postcondition: every root satisfies the backward-stable residual bound
    |p(root)| < tol * sum_k |c_k| max(1, |root|)^k (raises
    :class:`RootFindingError` otherwise); for polynomials with roots of
    moderate magnitude this coincides with |p(root)| / max|c_k| < tol.
    Roots are sorted by real part, then imaginary part.
    """
    if p.is_zero:
        raise RootFindingError("zero polynomial has no well-defined root set")
    if p.degree == 0:
        return []
    c = np.array(p.coeffs, dtype=complex)
    if not np.all(np.isfinite(c)):
        raise RootFindingError("polynomial has non-finite coefficients")
    # Exact zero constant terms correspond to roots at the origin.
    k0 = 0
    while k0 < len(c) - 1 and c[k0] == 0:
        k0 += 1
    found: list[complex] = [0j] * k0
    c = c[k0:]
    n = len(c) - 1
    if n == 0:
        return found
    c = c / c[-1]
    if n == 1:
        found.append(complex(-c[0]))
        return _sorted_roots(found, p, residual_tol)

    # Rescale the variable by the geometric mean of the root magnitudes so
    # the iteration works near the unit circle.
    sigma = abs(c[0]) ** (1.0 / n)
    if not (1e-8 < sigma < 1e8):
        sigma = 1.0
    q = c * sigma ** np.arange(n + 1) / sigma**n
    dq = q[1:] * np.arange(1, n + 1)

    radius = 1.0 + max(abs(q[:-1]))
    angles = 2.0 * math.pi * (np.arange(n) + 0.353) / n
    x = radius * np.exp(1j * angles)

    qscale = np.abs(q)
    for _ in range(max_iter):
        pv = _polyval(q, x)
        dpv = _polyval(dq, x)
        dpv = np.where(np.abs(dpv) < 1e-300, 1e-300, dpv)
        w = pv / dpv
        diff = x[:, None] - x[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        s = inv.sum(axis=1)
        denom = 1.0 - w * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        delta = w / denom
        x = x - delta
        if not np.all(np.isfinite(x)):
            raise RootFindingError("Aberth iteration diverged")
        scale_at = _polyval(qscale.astype(complex), np.abs(x) + 0j).real
        if np.all(np.abs(pv) <= 1e-12 * np.maximum(scale_at, 1e-300)):
            break
        if np.all(np.abs(delta) <= 5e-16 * (1.0 + np.abs(x))):
            break

    found.extend(complex(r) * sigma for r in x)
    return _sorted_roots(found, p, residual_tol)


def _polyval(ascending: np.ndarray, x: np.ndarray) -> np.ndarray:
    acc = np.zeros_like(x, dtype=complex)
    for ck in ascending[::-1]:
        acc = acc * x + ck
    return acc


def _sorted_roots(found: list[complex], p: CPoly, residual_tol: float) -> list[complex]:
    worst = 0.0
    for r in found:
        scale = sum(abs(ck) * max(1.0, abs(r)) ** k for k, ck in enumerate(p.coeffs))
        worst = max(worst, abs(p(r)) / max(scale, 1e-300))
    if worst > residual_tol:
        raise RootFindingError(f"root residual {worst:.3e} exceeds {residual_tol:.1e}")
    return sorted(found, key=lambda z: (z.real, z.imag))


def cluster_roots(values: list[complex], rel_tol: float = CLUSTER_TOL) -> list[tuple[complex, int]]:
    """Group numerically coincident values into (center, multiplicity) pairs."""
    clusters: list[tuple[complex, int]] = []
    for v in sorted(values, key=lambda z: (z.real, z.imag)):
        for i, (center, mult) in enumerate(clusters):
            if abs(v - center) <= rel_tol * max(1.0, abs(center)):
                new_center = (center * mult + v) / (mult + 1)
                clusters[i] = (new_center, mult + 1)
                break
        else:
            clusters.append((v, 1))
    return clusters


@dataclass(frozen=True)
class CRational:
    """Ratio of complex-coefficient polynomials with a monic denominator."""

    num: CPoly
    den: CPoly

    def __post_init__(self) -> None:
        if self.den.is_zero:
            raise ZeroDivisionError("rational function with zero denominator")
        lead = self.den.coeffs[-1]
        if lead != 1:
            object.__setattr__(self, "num", self.num.scale(1.0 / lead))
            object.__setattr__(self, "den", self.den.scale(1.0 / lead))

    @classmethod
    def from_coeffs(cls, num: list[complex] | tuple[complex, ...], den: list[complex] | tuple[complex, ...]) -> CRational:
        return cls(CPoly(tuple(num)), CPoly(tuple(den)))

    @property
    def is_proper(self) -> bool:
        return self.num.degree <= self.den.degree

    @property
    def is_strictly_proper(self) -> bool:
        return self.num.degree < self.den.degree

    def __call__(self, z: complex) -> complex:
        d = self.den(z)
        scale = self.den.norm_inf * max(1.0, abs(z)) ** self.den.degree
        if abs(d) < 1e-12 * scale:
            raise PoleEvaluationError(f"evaluation at z = {z} is within tolerance of a pole")
        return self.num(z) / d

    def poles(self) -> list[complex]:
        return roots(self.den)

    def zeros(self) -> list[complex]:
        return roots(self.num) if self.num.degree >= 1 else []


def evaluate(r: CRational, z: complex) -> complex:
    """Evaluate ``r`` at ``z``; raises :class:`PoleEvaluationError` near poles."""
    return r(z)


def substitute_affine(r: CRational, a: complex, b: complex) -> CRational:
    """The rational function nu -> r(a*nu + b) (degree-preserving, a != 0)."""
    if a == 0:
        raise ValueError("affine substitution requires a != 0")
    return CRational(r.num.compose_linear(a, b), r.den.compose_linear(a, b))


def rotate(r: CRational, phi: float) -> CRational:
    """Multiply by the unit phasor e^{j*phi}."""
    return CRational(r.num.scale(cmath.exp(1j * phi)), r.den)


def feedback(r: CRational, rho: complex) -> CRational:
    """Close the loop [1 + rho*r]^{-1} r without pole-zero cancellation."""
    den = r.den + r.num.scale(complex(rho))
    if den.is_zero:
        raise DegenerateLoopError("closed loop denominator is identically zero")
    return CRational(r.num, den)


def residue_at(r: CRational, p: complex) -> complex:
    """Residue of ``r`` at a simple pole ``p`` (num(p) / den'(p))."""
    scale = r.den.norm_inf * max(1.0, abs(p)) ** r.den.degree
    if abs(r.den(p)) > 1e-8 * scale:
        raise NotAPoleError(f"{p} is not a pole (|den| = {abs(r.den(p)):.3e})")
    dden = r.den.derivative()
    dscale = max(dden.norm_inf, 1e-300) * max(1.0, abs(p)) ** max(dden.degree, 0)
    dval = dden(p)
    if abs(dval) <= 1e-8 * dscale:
        raise NotSimplePoleError(f"pole at {p} is not simple (|den'| = {abs(dval):.3e})")
    return r.num(p) / dval


def reduce(r: CRational, tol: float = 1e-9) -> CRational:
    """Cancel numerically common numerator/denominator roots.

    Never called implicitly by the library.
    """
    if r.num.is_zero or r.num.degree == 0 or r.den.degree == 0:
        return r
    num_roots = roots(r.num)
    den_roots = roots(r.den)
    num_lead = r.num.coeffs[-1]
    remaining_den = list(den_roots)
    kept_num: list[complex] = []
    for z in num_roots:
        match = None
        for i, q in enumerate(remaining_den):
            if abs(z - q) <= tol * max(1.0, abs(q)):
                match = i
                break
        if match is None:
            kept_num.append(z)
        else:
            remaining_den.pop(match)
    if len(kept_num) == len(num_roots):
        return r
    return CRational(CPoly.from_roots(kept_num, num_lead), CPoly.from_roots(remaining_den))


@dataclass(frozen=True)
class RealRationalMatrix2x2:
    """Real-rational 2x2 block [[re, -im], [im, re]] over a common denominator."""

    re: CRational
    im: CRational

    def __post_init__(self) -> None:
        if self.re.den.coeffs != self.im.den.coeffs:
            raise ValueError("blocks must share a common denominator")

    @property
    def den(self) -> CPoly:
        return self.re.den

    @property
    def entries(self) -> tuple[tuple[CRational, CRational], tuple[CRational, CRational]]:
        neg_im = CRational(self.im.num.scale(-1.0), self.im.den)
        return ((self.re, neg_im), (self.im, self.re))

    def __call__(self, z: complex) -> np.ndarray:
        a = self.re(z)
        b = self.im(z)
        return np.array([[a, -b], [b, a]], dtype=complex)


def real_equiv(r: CRational) -> RealRationalMatrix2x2:
    """Embed a complex-coefficient rational function as a 2x2 real-rational block.

    Splitting r = r_re + j*r_im requires a real-coefficient denominator: the
    least common multiple of den(r) and its conjugate-coefficient polynomial.
    Self-conjugate denominator factors are detected by root clustering
    (relative tolerance ``CLUSTER_TOL``) and are **not** doubled.
    """
    den_roots = roots(r.den) if r.den.degree >= 1 else []
    clusters = cluster_roots(den_roots)

    # Extra factors complete the conjugate pairs: each cluster center p of
    # multiplicity m contributes max(0, m - mult(conj p)) copies of conj(p).
    extra: list[complex] = []
    for center, mult in clusters:
        if abs(center.imag) <= CLUSTER_TOL * max(1.0, abs(center)):
            continue  # real pole, self-conjugate
        conj_mult = 0
        for other, m2 in clusters:
            if abs(other - center.conjugate()) <= CLUSTER_TOL * max(1.0, abs(center)):
                conj_mult = m2
                break
        extra.extend([center.conjugate()] * max(0, mult - conj_mult))

    ext = CPoly.from_roots(extra)
    den_real = (r.den * ext).real_coeffs(tol=1e-6)
    num_ext = r.num * ext
    num_re = CPoly(tuple(complex(c.real) for c in num_ext.coeffs))
    num_im = CPoly(tuple(complex(c.imag) for c in num_ext.coeffs))
    return RealRationalMatrix2x2(CRational(num_re, den_real), CRational(num_im, den_real))
