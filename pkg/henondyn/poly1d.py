"""
One-variable polynomial dynamics

Monic centered polynomials p(z) = z^d + a_{d-2} z^{d-2} + ... + a_0 together with
their critical points, Green function G_p, maximal escape rate M(p), Böttcher
coordinate and Lyapunov exponent.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Callable, List, Sequence, Tuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

from .common.errors import BranchTrackingError, ConvergenceError, DomainError
from .common.logging import logger
from .common.schemas import PolynomialModel, complex_to_pair, pair_to_complex

ComplexLike = Union[complex, np.ndarray]

DEFAULT_TOL = 1e-12
CUTOFF_SLACK = 200
BOTTCHER_TAIL = 1e-16
MAX_TAIL_TERMS = 256
CLUSTER_FACTOR = 1e-7


@dataclass(frozen=True)
class MonicCenteredPolynomial:
    """p(z) = z^d + sum_{j <= d-2} a_j z^j, coefficients stored as (a_0, ..., a_{d-2})"""

    degree: int
    coeffs: Tuple[complex, ...]

    def __post_init__(self):
        if int(self.degree) != self.degree or self.degree < 2:
            raise DomainError(f"degree must be an integer >= 2, got {self.degree}")
        coeffs = tuple(complex(c) for c in self.coeffs)
        if len(coeffs) != self.degree - 1:
            raise DomainError(
                f"degree {self.degree} needs {self.degree - 1} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "degree", int(self.degree))
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def monomial(cls, degree: int) -> "MonicCenteredPolynomial":
        return cls(degree, (0j,) * (degree - 1))

    @classmethod
    def quadratic(cls, c: complex) -> "MonicCenteredPolynomial":
        return cls(2, (c,))

    @classmethod
    def from_coefficients(cls, full: Sequence[complex]) -> "MonicCenteredPolynomial":
        """Build from highest-degree-first coefficients [1, 0, a_{d-2}, ..., a_0]"""
        full = [complex(c) for c in full]
        if len(full) < 3:
            raise DomainError("need at least degree 2")
        if abs(full[0] - 1) > 1e-12 or abs(full[1]) > 1e-12:
            raise DomainError(f"polynomial is not monic and centered: leading terms {full[:2]}")
        return cls(len(full) - 1, tuple(reversed(full[2:])))

    @cached_property
    def horner(self) -> Tuple[complex, ...]:
        """Highest-degree-first coefficients"""
        return (1 + 0j, 0j) + tuple(reversed(self.coeffs))

    @cached_property
    def derivative_horner(self) -> Tuple[complex, ...]:
        d = self.degree
        return tuple((d - i) * c for i, c in enumerate(self.horner[:-1]))

    def full_coefficients(self) -> np.ndarray:
        return np.array(self.horner, dtype=complex)

    def __call__(self, z: ComplexLike) -> ComplexLike:
        return eval_poly(self, z)

    def derivative(self, z: ComplexLike) -> ComplexLike:
        return eval_poly_derivative(self, z)

    def max_coefficient(self) -> float:
        return max((abs(c) for c in self.coeffs), default=0.0)

    def rescaled(self, alpha_in: complex, alpha_out: complex) -> "MonicCenteredPolynomial":
        """z -> alpha_out^{-1} p(alpha_in z), with b_m -> alpha_out^{-1} alpha_in^m b_m.

        The leading coefficient alpha_out^{-1} alpha_in^d is assumed to be 1; callers
        choose the scalings so that it is.
        """
        return MonicCenteredPolynomial(
            self.degree,
            tuple(c * alpha_in ** m / alpha_out for m, c in enumerate(self.coeffs)))

    def to_model(self) -> PolynomialModel:
        return PolynomialModel(degree=self.degree, coeffs=[complex_to_pair(c) for c in self.coeffs])

    @classmethod
    def from_model(cls, model: PolynomialModel) -> "MonicCenteredPolynomial":
        return cls(model.degree, tuple(pair_to_complex(c) for c in model.coeffs))

    def __str__(self):
        terms = [f"z^{self.degree}"]
        for j in range(self.degree - 2, -1, -1):
            c = self.coeffs[j]
            if c != 0:
                terms.append(f"({c:.6g})" + (f"z^{j}" if j > 1 else "z" if j == 1 else ""))
        return " + ".join(terms)


@dataclass(frozen=True)
class EscapeRate:
    M: float
    R: float


def eval_poly(p: MonicCenteredPolynomial, z: ComplexLike) -> ComplexLike:
    """Horner evaluation; works on scalars and numpy arrays, overflow propagates as inf/nan"""
    acc = 1.0 + 0j
    for c in p.horner[1:]:
        acc = acc * z + c
    return acc


def eval_poly_derivative(p: MonicCenteredPolynomial, z: ComplexLike) -> ComplexLike:
    coeffs = p.derivative_horner
    acc = coeffs[0]
    for c in coeffs[1:]:
        acc = acc * z + c
    return acc


# --------------------------------------------------------------------------
# Root finding
# --------------------------------------------------------------------------

def polynomial_roots(coeffs: Sequence[complex], max_iter: int = 500, tol: float = 1e-15) -> np.ndarray:
    """All roots of a polynomial (highest-degree first) by Aberth-Ehrlich iteration.

    Multiple roots are returned repeated; they converge to within roughly
    eps^(1/m) of the true root, so callers usually pass the result through
    cluster_roots.
    """
    c = np.trim_zeros(np.asarray(coeffs, dtype=complex), "f")
    if c.size == 0:
        raise DomainError("zero polynomial has no well-defined roots")
    n = c.size - 1
    if n == 0:
        return np.empty(0, dtype=complex)
    c = c / c[0]
    if not np.any(c[1:]):
        return np.zeros(n, dtype=complex)
    # trailing zero coefficients are exact roots at the origin
    nz = np.flatnonzero(c)
    n_zero = n - nz[-1]
    if n_zero:
        tail = polynomial_roots(c[: c.size - n_zero], max_iter, tol)
        return np.concatenate([tail, np.zeros(n_zero, dtype=complex)])

    dc = c[:-1] * np.arange(n, 0, -1)
    abs_c = np.abs(c)
    bound = 2.0 * max(abs_c[k] ** (1.0 / k) for k in range(1, n + 1))
    center = -c[1] / n
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = center + bound * np.exp(1j * angles)

    eps = np.finfo(float).eps
    residual = np.inf
    for _ in range(max_iter):
        pz = np.polyval(c, z)
        dpz = np.polyval(dc, z)
        dpz = np.where(dpz == 0, eps, dpz)
        ratio = pz / dpz
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        inv = 1.0 / diff
        np.fill_diagonal(inv, 0.0)
        w = ratio / (1.0 - ratio * inv.sum(axis=1))
        z = z - w
        scale = np.polyval(abs_c, np.abs(z))
        residual = np.max(np.abs(np.polyval(c, z)) / np.maximum(scale, eps))
        if np.all(np.abs(w) <= tol * (1.0 + np.abs(z))) or residual <= 64 * eps:
            return z
    if residual <= 1e-10:
        return z
    raise ConvergenceError(f"Aberth iteration did not converge for degree {n}", residual=residual)


def linkage_labels(points: np.ndarray, radius: Union[float, np.ndarray]) -> np.ndarray:
    """Single-linkage cluster labels of complex points of shape (n,) or (n, m).

    Distances are max norms over real and imaginary parts. ``radius`` may be a
    per-point array; two points join when within the larger of their radii.
    """
    pts = np.asarray(points, dtype=complex)
    if pts.ndim == 1:
        pts = pts[:, None]
    if len(pts) < 2:
        return np.zeros(len(pts), dtype=int)
    radii = np.broadcast_to(np.asarray(radius, dtype=float), (len(pts),))
    embedded = np.concatenate([pts.real, pts.imag], axis=1)
    dist = squareform(pdist(embedded, metric="chebyshev"))
    adjacency = dist <= np.maximum(radii[:, None], radii[None, :])
    _, labels = connected_components(csr_matrix(adjacency), directed=False)
    return labels


def cluster_roots(roots: Sequence[complex], radius: float) -> List[Tuple[complex, int]]:
    """Single-linkage clustering; returns (centroid, size) sorted by (re, im)"""
    pts = np.asarray(roots, dtype=complex)
    labels = linkage_labels(pts, radius)
    clusters = [(complex(np.mean(pts[labels == label])), int(np.sum(labels == label)))
                for label in np.unique(labels)]
    clusters.sort(key=lambda cm: (round(cm[0].real, 12), round(cm[0].imag, 12)))
    return clusters


def argument_principle_count(func: Callable[[np.ndarray], np.ndarray], center: complex,
                             radius: float, samples: int = 1024) -> int:
    """Number of zeros minus poles of func inside the circle |z - center| = radius"""
    theta = 2 * np.pi * np.arange(samples + 1) / samples
    values = np.asarray(func(center + radius * np.exp(1j * theta)), dtype=complex)
    if np.any(values == 0) or not np.all(np.isfinite(values)):
        raise ConvergenceError("function vanishes or overflows on the contour")
    total = np.sum(np.angle(values[1:] / values[:-1]))
    return int(round(total / (2 * np.pi)))


@lru_cache(maxsize=4096)
def _critical_points_cached(p: MonicCenteredPolynomial) -> Tuple[complex, ...]:
    d = p.degree
    monic_derivative = np.array(p.derivative_horner, dtype=complex) / d
    raw = polynomial_roots(monic_derivative)
    radius = CLUSTER_FACTOR * (1.0 + max(1.0, float(np.max(np.abs(raw)))))
    points: List[complex] = []
    for centroid, size in cluster_roots(raw, radius):
        points.extend([centroid] * size)
    return tuple(points)


def critical_points(p: MonicCenteredPolynomial) -> np.ndarray:
    """Roots of p' with multiplicity (d - 1 values)"""
    return np.array(_critical_points_cached(p), dtype=complex)


# --------------------------------------------------------------------------
# Green function and escape rate
# --------------------------------------------------------------------------

def coefficient_radius(p: MonicCenteredPolynomial) -> float:
    """Radius beyond which |p(z)/z^d - 1| < 1/2, hence |p(z)| >= 5|z|"""
    d = p.degree
    r = 10.0
    for j, a in enumerate(p.coeffs):
        r = max(r, 2.0 ** (d / (d - 1)) * (1.0 + abs(a)) ** (1.0 / (d - j)))
    return r


def escape_radius(p: MonicCenteredPolynomial, tol: float = DEFAULT_TOL) -> float:
    return max(4.0 * max_escape_rate(p, tol).R, coefficient_radius(p))


def bounded_cutoff(degree: int, tol: float) -> int:
    return int(math.ceil(math.log(1.0 / tol) / math.log(degree))) + CUTOFF_SLACK


def _theta(p: MonicCenteredPolynomial, u: complex) -> complex:
    """p(w)/w^d - 1 expressed through u = 1/w"""
    acc = 0j
    for a in p.coeffs:
        acc = acc * u + a
    return acc * u * u


def _wrap(ell: complex) -> complex:
    return complex(ell.real, math.remainder(ell.imag, 2 * math.pi))


def _theta_bound(p: MonicCenteredPolynomial, ell: complex) -> float:
    """Upper bound of |theta| at w = exp(ell)"""
    u = math.exp(-ell.real)
    return sum(abs(a) for a in p.coeffs) * max(u * u, u ** p.degree)


def _escaping_green(p: MonicCenteredPolynomial, w: complex, tol: float) -> float:
    """G_p(w) for |w| beyond the coefficient radius, summed in log space"""
    d = p.degree
    ell = cmath.log(w)
    g = ell.real
    weight = 1.0 / d
    for _ in range(MAX_TAIL_TERMS):
        lt = cmath.log(1 + _theta(p, cmath.exp(-ell)))
        g += weight * lt.real
        ell = _wrap(d * ell + lt)
        weight /= d
        # a single vanishing theta says nothing about the rest of the tail
        if 2.0 * weight * _theta_bound(p, ell) < tol * 1e-3:
            break
    return g


def _green_p(p: MonicCenteredPolynomial, z: complex, tol: float, r_esc: float) -> float:
    d = p.degree
    n_max = bounded_cutoff(d, tol)
    z = complex(z)
    n = 0
    while abs(z) <= r_esc:
        if n >= n_max:
            return 0.0
        z = eval_poly(p, z)
        n += 1
    return _escaping_green(p, z, tol) * float(d) ** (-n)


def green_p(p: MonicCenteredPolynomial, z: complex, tol: float = DEFAULT_TOL) -> float:
    """G_p(z) = lim d^{-n} log+ |p^n(z)| with absolute error below tol"""
    if tol <= 0:
        raise DomainError("tol must be positive")
    return _green_p(p, z, tol, escape_radius(p, tol))


@lru_cache(maxsize=4096)
def _max_escape_rate_cached(p: MonicCenteredPolynomial, tol: float) -> EscapeRate:
    # R_p is not known yet, so critical orbits escape past the coefficient radius alone
    r_esc = coefficient_radius(p)
    values = [_green_p(p, c, tol, r_esc) for c in _critical_points_cached(p)]
    M = max(values) if values else 0.0
    return EscapeRate(M=M, R=math.exp(M))


def max_escape_rate(p: MonicCenteredPolynomial, tol: float = DEFAULT_TOL) -> EscapeRate:
    """M(p) = max G_p(c) over critical points, R_p = e^M"""
    if tol <= 0:
        raise DomainError("tol must be positive")
    return _max_escape_rate_cached(p, tol)


def bottcher_p(p: MonicCenteredPolynomial, z: complex, tol: float = DEFAULT_TOL) -> complex:
    """Böttcher coordinate on {G_p > M(p)} via z * prod (1 + theta_k)^(1/d^(k+1))"""
    z = complex(z)
    g = green_p(p, z, tol)
    M = max_escape_rate(p, tol).M
    if g <= M:
        raise DomainError(f"Böttcher coordinate needs G_p(z) > M(p); got G={g:.6g}, M={M:.6g}")
    d = p.degree
    ell = cmath.log(z)
    acc = ell
    weight = 1.0 / d
    for k in range(MAX_TAIL_TERMS):
        theta = _theta(p, cmath.exp(-ell))
        if abs(theta) >= 1:
            raise BranchTrackingError(
                f"product factor {k} has |theta|={abs(theta):.3g} >= 1 at z={z}", residual=abs(theta))
        lt = cmath.log(1 + theta)
        acc += weight * lt
        ell = _wrap(d * ell + lt)
        weight /= d
        if 2.0 * weight * _theta_bound(p, ell) < BOTTCHER_TAIL:
            break
    return cmath.exp(acc)


# --------------------------------------------------------------------------
# Lyapunov exponent
# --------------------------------------------------------------------------

def mp_lyapunov(p: MonicCenteredPolynomial, tol: float = DEFAULT_TOL) -> float:
    """log d + sum of G_p over critical points counted with multiplicity"""
    return math.log(p.degree) + sum(green_p(p, c, tol) for c in critical_points(p))


def backward_lyapunov_estimate(p: MonicCenteredPolynomial, samples: int = 100_000, seed: int = 0,
                               chains: int = 1000, burn_in: int = 60) -> float:
    """Average of log|p'| along random backward orbits, which sample the equilibrium measure.

    All chains advance together; preimages come from batched companion-matrix
    eigenvalues.
    """
    rng = np.random.default_rng(seed)
    d = p.degree
    steps = int(math.ceil(samples / chains))
    z = rng.normal(size=chains) + 1j * rng.normal(size=chains)

    companion = np.zeros((chains, d, d), dtype=complex)
    companion[:, np.arange(1, d), np.arange(d - 1)] = 1.0
    head = -np.array(p.horner[1:], dtype=complex)
    rows = np.arange(chains)

    total = 0.0
    count = 0
    for step in range(burn_in + steps):
        companion[:, 0, :] = head
        companion[:, 0, -1] = head[-1] + z
        roots = np.linalg.eigvals(companion)
        z = roots[rows, rng.integers(0, d, size=chains)]
        if step >= burn_in:
            with np.errstate(divide="ignore"):
                logs = np.log(np.abs(eval_poly_derivative(p, z)))
            finite = np.isfinite(logs)
            total += float(np.sum(logs[finite]))
            count += int(np.count_nonzero(finite))
    logger.debug(f"backward iteration: {count} samples over {chains} chains")
    return total / count
