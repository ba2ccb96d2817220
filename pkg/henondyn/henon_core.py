"""
Compositions of Hénon maps in Friedland-Milnor normal form

A composition f = h_k o ... o h_1 is stored in application order (h_1 first),
each factor h(x, y) = (a y + p(x), x) with p monic and centered. Points of C^2
are (x, y) tuples of complex scalars or numpy arrays; norms are max norms.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
from pydantic import ValidationError

from .common.errors import ConvergenceError, DomainError, UncertifiedDomainError
from .common.logging import logger
from .common.schemas import CompositionModel, FactorModel, complex_to_pair, pair_to_complex
from .common.utils import load_json, parse_model
from .poly1d import (
    BOTTCHER_TAIL,
    DEFAULT_TOL,
    EscapeRate,
    MAX_TAIL_TERMS,
    MonicCenteredPolynomial,
    _theta,
    _wrap,
    bounded_cutoff,
    coefficient_radius,
    eval_poly,
    eval_poly_derivative,
    max_escape_rate,
)

Point = Tuple[complex, complex]

UNITY_TOL = 1e-12
INVERSE_CHECK_POINTS = 100
INVERSE_CHECK_TOL = 1e-8


@dataclass(frozen=True)
class HenonFactor:
    """h(x, y) = (a y + p(x), x)"""

    a: complex
    p: MonicCenteredPolynomial

    def __post_init__(self):
        a = complex(self.a)
        if a == 0:
            raise DomainError("Hénon factor needs a nonzero Jacobian parameter a")
        object.__setattr__(self, "a", a)

    @property
    def degree(self) -> int:
        return self.p.degree

    def __call__(self, x, y):
        return self.a * y + eval_poly(self.p, x), x

    def inverse(self, x, y):
        return y, (x - eval_poly(self.p, y)) / self.a

    def differential(self, x) -> np.ndarray:
        return np.array([[eval_poly_derivative(self.p, x), self.a], [1.0, 0.0]], dtype=complex)

    def to_model(self) -> FactorModel:
        return FactorModel(a=complex_to_pair(self.a), poly=self.p.to_model())

    @classmethod
    def from_model(cls, model: FactorModel) -> "HenonFactor":
        return cls(pair_to_complex(model.a), MonicCenteredPolynomial.from_model(model.poly))


@dataclass(frozen=True)
class HenonComposition:
    """f = h_k o ... o h_1; ``factors`` lists h_1, ..., h_k"""

    factors: Tuple[HenonFactor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise DomainError("a composition needs at least one factor")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def single(cls, a: complex, p: MonicCenteredPolynomial) -> "HenonComposition":
        return cls((HenonFactor(a, p),))

    @classmethod
    def quadratic(cls, a: complex, c: complex = 0j) -> "HenonComposition":
        """(x, y) -> (a y + x^2 + c, x)"""
        return cls.single(a, MonicCenteredPolynomial.quadratic(c))

    @property
    def k(self) -> int:
        return len(self.factors)

    @property
    def multidegree(self) -> Tuple[int, ...]:
        return tuple(h.degree for h in self.factors)

    @property
    def multi_jacobian(self) -> Tuple[complex, ...]:
        return tuple(h.a for h in self.factors)

    @property
    def degree(self) -> int:
        return int(np.prod(self.multidegree))

    def __call__(self, point):
        return evaluate(self, point)

    def rotated(self, shift: int) -> "HenonComposition":
        """Cyclic permutation, conjugate to f through h_shift o ... o h_1"""
        shift %= self.k
        return HenonComposition(self.factors[shift:] + self.factors[:shift])

    def to_model(self) -> CompositionModel:
        return CompositionModel(factors=[h.to_model() for h in self.factors])

    @classmethod
    def from_model(cls, model: CompositionModel) -> "HenonComposition":
        return cls(tuple(HenonFactor.from_model(m) for m in model.factors))

    def to_json(self) -> str:
        return self.to_model().model_dump_json(indent=2)

    @classmethod
    def from_json(cls, text: str) -> "HenonComposition":
        try:
            model = CompositionModel.model_validate_json(text)
        except ValidationError as e:
            first = e.errors()[0]
            loc = ".".join(str(part) for part in first.get("loc", ()))
            raise ValueError(f"invalid map JSON at '{loc}': {first.get('msg')}") from None
        return cls.from_model(model)

    def __str__(self):
        parts = [f"(({h.a:.6g})y + {h.p}, x)" for h in reversed(self.factors)]
        return " o ".join(parts)


def load_composition(path: Union[str, Path]) -> HenonComposition:
    """Read a map file; syntax and schema errors name the failing location"""
    model = parse_model(CompositionModel, load_json(path), source=str(path))
    return HenonComposition.from_model(model)


def sup_norm(point) -> float:
    return max(abs(point[0]), abs(point[1]))


# --------------------------------------------------------------------------
# Evaluation and differentials
# --------------------------------------------------------------------------

def evaluate(f: HenonComposition, point):
    x, y = point
    for h in f.factors:
        x, y = h(x, y)
    return x, y


def inverse_evaluate(f: HenonComposition, point):
    x, y = point
    for h in reversed(f.factors):
        x, y = h.inverse(x, y)
    return x, y


def iterate(f: HenonComposition, point, n: int):
    for _ in range(n):
        point = evaluate(f, point)
    return point


def differential(f: HenonComposition, point: Point) -> np.ndarray:
    """2x2 differential of f at a scalar point (chain rule over factors)"""
    x, y = complex(point[0]), complex(point[1])
    jac = np.eye(2, dtype=complex)
    for h in f.factors:
        jac = h.differential(x) @ jac
        x, y = h(x, y)
    return jac


def jacobian_const(f: HenonComposition) -> complex:
    """jac(f) = (-1)^k prod a_i"""
    out = (-1.0 + 0j) ** f.k
    for a in f.multi_jacobian:
        out *= a
    return complex(out)


def escape_rate_M(f: HenonComposition, tol: float = DEFAULT_TOL) -> EscapeRate:
    """M(f) = max_i M(p_i), R_f = e^M"""
    M = max(max_escape_rate(h.p, tol).M for h in f.factors)
    return EscapeRate(M=M, R=math.exp(M))


# --------------------------------------------------------------------------
# Conjugacy action of the (d-1)-th roots of unity
# --------------------------------------------------------------------------

def unity_group(d: int) -> List[complex]:
    return [cmath.exp(2j * math.pi * j / (d - 1)) for j in range(d - 1)]


def unity_action(f: HenonComposition, alpha: complex) -> HenonComposition:
    """alpha . f = s_1^{-1} o f o s_1 with s_i(x, y) = (alpha_i x, alpha_{i-1} y)"""
    d = f.degree
    alpha = complex(alpha)
    if abs(alpha ** (d - 1) - 1) > UNITY_TOL:
        raise DomainError(f"alpha={alpha} is not a root of unity of order dividing d-1={d - 1}")
    k = f.k
    alphas = [alpha]
    for h in f.factors[:-1]:
        alphas.append(alphas[-1] ** h.degree)
    factors = []
    for j, h in enumerate(f.factors):
        a_next = alphas[(j + 1) % k]
        a_prev = alphas[(j - 1) % k]
        factors.append(HenonFactor(h.a * a_prev / a_next, h.p.rescaled(alphas[j], a_next)))
    return HenonComposition(tuple(factors))


def mbar(f: HenonComposition, tol: float = DEFAULT_TOL) -> float:
    """max of M over the orbit of f under the unity action"""
    return max(escape_rate_M(unity_action(f, alpha), tol).M for alpha in unity_group(f.degree))


# --------------------------------------------------------------------------
# Inverse normal form
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class InverseNormalForm:
    """f^{-1} = psi o g o psi^{-1} with psi(x, y) = (delta y, gamma x)"""

    g: HenonComposition
    gamma: complex
    delta: complex
    residual: float

    def psi(self, point):
        x, y = point
        return self.delta * y, self.gamma * x

    def psi_inverse(self, point):
        u, v = point
        return v / self.gamma, u / self.delta


@lru_cache(maxsize=512)
def inverse_conjugacy(f: HenonComposition) -> InverseNormalForm:
    """Normal form of f^{-1} together with the linear conjugacy.

    tau o f^{-1} o tau is a composition of non-monic factors (a^{-1} y - a^{-1} p(x), x);
    diagonal maps L_j(x, y) = (gamma_j x, gamma_{j-1} y) make every factor monic.
    The cyclic closing condition gamma_0^{d-1} = 1/Lambda is solved with the
    principal root, so the result is defined up to the unity action.
    """
    k = f.k
    d = f.degree
    old = list(reversed(f.factors))  # new application order: h_k^-, ..., h_1^-
    leads = [-1.0 / h.a for h in old]

    lam = 1.0 + 0j
    for lead, h in zip(leads, old):
        lam = lead * lam ** h.degree
    gamma0 = (1.0 / lam) ** (1.0 / (d - 1))

    gammas = [gamma0]
    for lead, h in zip(leads, old):
        gammas.append(lead * gammas[-1] ** h.degree)
    closing = abs(gammas[-1] - gamma0) / abs(gamma0)
    if closing > 1e-8:
        logger.warning(f"inverse normal form: cyclic closing error {closing:.2e}")
    gammas[-1] = gamma0

    def gam(i):
        return gammas[i % k]

    factors = []
    for j, h in enumerate(old, start=1):
        b = (1.0 / h.a) * gam(j - 2) / gam(j)
        q = h.p.rescaled(gam(j - 1), -h.a * gam(j))
        factors.append(HenonFactor(b, q))
    g = HenonComposition(tuple(factors))
    form = InverseNormalForm(g=g, gamma=gamma0, delta=gam(-1), residual=0.0)

    rng = np.random.default_rng(1234)
    pts = (rng.uniform(-1, 1, INVERSE_CHECK_POINTS) + 1j * rng.uniform(-1, 1, INVERSE_CHECK_POINTS),
           rng.uniform(-1, 1, INVERSE_CHECK_POINTS) + 1j * rng.uniform(-1, 1, INVERSE_CHECK_POINTS))
    lhs = form.psi(evaluate(g, pts))
    rhs = inverse_evaluate(f, form.psi(pts))
    scale = 1.0 + np.maximum(np.abs(rhs[0]), np.abs(rhs[1]))
    residual = float(np.max(np.maximum(np.abs(lhs[0] - rhs[0]), np.abs(lhs[1] - rhs[1])) / scale))
    if residual > INVERSE_CHECK_TOL:
        raise ConvergenceError("inverse normal form fails the conjugacy check", residual=residual)
    return InverseNormalForm(g=g, gamma=gamma0, delta=gam(-1), residual=residual)


def inverse_normal_form(f: HenonComposition) -> HenonComposition:
    return inverse_conjugacy(f).g


# --------------------------------------------------------------------------
# Green functions and Böttcher function
# --------------------------------------------------------------------------

def plus_escape_radius(f: HenonComposition, tol: float = DEFAULT_TOL) -> float:
    """Radius of the region {|x| >= r, |y| <= |x|} where every factor step has |theta| < 3/4"""
    R = escape_rate_M(f, tol).R
    r = max(12.0 * f.degree * R, 10.0)
    for h in f.factors:
        r = max(r, coefficient_radius(h.p), (4.0 * abs(h.a)) ** (1.0 / (h.degree - 1)))
    return r


def orbit_escape_radius(f: HenonComposition, tol: float = DEFAULT_TOL) -> float:
    """Escape radius used for classifying orbits: max(10 R_f, 4)"""
    return max(10.0 * escape_rate_M(f, tol).R, 4.0)


def _log_theta(h: HenonFactor, lx: complex, ly) -> complex:
    """log(1 + theta) for one factor step with x = exp(lx), y = exp(ly) (ly None means y = 0)"""
    theta = _theta(h.p, cmath.exp(-lx))
    if ly is not None:
        theta += h.a * cmath.exp(ly - h.degree * lx)
    return theta


def _tail_bound(f: HenonComposition, lx: complex) -> float:
    amax = max(abs(h.a) for h in f.factors)
    bmax = max(sum(abs(c) for c in h.p.coeffs) for h in f.factors)
    return (amax + bmax) * math.exp(-lx.real)


def green_plus(f: HenonComposition, point, tol: float = DEFAULT_TOL) -> float:
    """G^+_f(z) = lim d^{-n} log+ ||f^n(z)||"""
    if tol <= 0:
        raise DomainError("tol must be positive")
    x, y = complex(point[0]), complex(point[1])
    r_esc = plus_escape_radius(f, tol)
    max_steps = bounded_cutoff(f.degree, tol) * f.k
    log_scale = 0.0
    idx = 0
    steps = 0
    while not (abs(x) >= r_esc and abs(y) <= abs(x)):
        if steps >= max_steps:
            return 0.0
        h = f.factors[idx]
        x, y = h(x, y)
        log_scale += math.log(h.degree)
        idx = (idx + 1) % f.k
        steps += 1

    lx = cmath.log(x)
    ly = cmath.log(y) if y != 0 else None
    g = lx.real
    weight = 1.0
    for _ in range(MAX_TAIL_TERMS * f.k):
        h = f.factors[idx]
        theta = _log_theta(h, lx, ly)
        lt = cmath.log(1 + theta)
        weight /= h.degree
        g += weight * lt.real
        lx, ly = _wrap(h.degree * lx + lt), lx
        idx = (idx + 1) % f.k
        if 2.0 * weight * _tail_bound(f, lx) < tol * 1e-3:
            break
    return g * math.exp(-log_scale)


def green_minus(f: HenonComposition, point, tol: float = DEFAULT_TOL) -> float:
    """G^-_f = G^+ of the inverse normal form, pulled back through the linear conjugacy"""
    form = inverse_conjugacy(f)
    return green_plus(form.g, form.psi_inverse((complex(point[0]), complex(point[1]))), tol)


def check_bottcher_hypotheses(f: HenonComposition, tol: float = DEFAULT_TOL) -> EscapeRate:
    rate = escape_rate_M(f, tol)
    for i, h in enumerate(f.factors, start=1):
        bound = rate.R ** (h.degree - 1)
        if abs(h.a) > bound * (1 + 1e-12):
            raise UncertifiedDomainError(
                f"factor {i}: |a|={abs(h.a):.6g} exceeds R_f^(d_i-1)={bound:.6g}; "
                f"use the inverse normal form for this regime")
    return rate


def bottcher_plus(f: HenonComposition, point, tol: float = DEFAULT_TOL, depth: int = None) -> complex:
    """phi_f(x, y) = x prod_m (1 + Theta(f^m(x, y)))^(1/d^(m+1)) on {|y| <= |x|, |x| >= 12 d R_f}"""
    rate = check_bottcher_hypotheses(f, tol)
    x, y = complex(point[0]), complex(point[1])
    d = f.degree
    if abs(y) > abs(x) or abs(x) < 12 * d * rate.R:
        raise DomainError(
            f"point ({x:.6g}, {y:.6g}) outside the Böttcher domain |y| <= |x|, |x| >= {12 * d * rate.R:.6g}")

    lx = cmath.log(x)
    ly = cmath.log(y) if y != 0 else None
    acc = lx
    weight = 1.0 / d
    n_terms = depth if depth is not None else MAX_TAIL_TERMS
    for _ in range(n_terms):
        big_l = 0j
        for h in f.factors:
            lt = cmath.log(1 + _log_theta(h, lx, ly))
            big_l = h.degree * big_l + lt
            lx, ly = _wrap(h.degree * lx + lt), lx
        one_plus = cmath.exp(big_l)
        if abs(one_plus - 1) >= 1:
            raise ConvergenceError("Böttcher product left the principal branch", residual=abs(one_plus - 1))
        acc += weight * cmath.log(one_plus)
        weight /= d
        # stop on the tail bound: at y = 0 a monomial factor gives an exactly zero first theta
        if depth is None and 2.0 * d * weight * _tail_bound(f, lx) < BOTTCHER_TAIL:
            break
    return cmath.exp(acc)
