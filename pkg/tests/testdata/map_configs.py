"""Shared map configurations for henondyn tests"""

import json

import numpy as np

from henondyn.henon_core import HenonComposition, HenonFactor
from henondyn.poly1d import MonicCenteredPolynomial

# Nearly the one-variable map z -> z^2; chi^+ should be close to log 2
HYPERBOLIC_QUADRATIC = {"name": "hyperbolic", "a": 0.05, "c": 0.0}

# Horseshoe regime, every periodic point is a saddle
HORSESHOE_QUADRATIC = {"name": "horseshoe", "a": 0.3, "c": -10.0}

# Large escape rate, small Jacobian: sandwich bounds and fold certificate
ESCAPING_CONFIGS = [
    {"name": "escaping-c1e2", "a": 0.001, "c": 1e2, "slow": False},
    {"name": "escaping-c1e3", "a": 0.001, "c": 1e3, "slow": True},
    {"name": "escaping-c1e4", "a": 0.001, "c": 1e4, "slow": True},
]

# Jacobian -1 quartic family (y + (x^2 - l^2)^2, x) with constant period-1/2 data
DEGENERATE_LAMBDAS = [0.3, 0.5, 0.8, 1.1, 1.7, 0.4 + 0.3j, -0.6 + 0.2j, 0.9j, 1.3 - 0.5j, 2.0 + 1.0j]

# Parameter with an attracting period-3 cycle besides alpha = (0, 0)
PERIOD3_PARAM = -0.669 + 0.73j
PERIOD3_POINT_X = 0.111236 - 0.069787j

CLI_TIMEOUT = 600


def quadratic(config) -> HenonComposition:
    return HenonComposition.quadratic(config["a"], config["c"])


def degenerate_quartic(lam: complex) -> HenonComposition:
    p = MonicCenteredPolynomial(4, (lam ** 4, 0j, -2 * lam ** 2))
    return HenonComposition.single(1.0, p)


def random_polynomial(rng, degree: int, scale: float = 1.0) -> MonicCenteredPolynomial:
    coeffs = scale * (rng.normal(size=degree - 1) + 1j * rng.normal(size=degree - 1))
    return MonicCenteredPolynomial(degree, tuple(coeffs))


def random_map(rng, degree: int, max_jacobian: float = 0.5) -> HenonComposition:
    a = max_jacobian * rng.uniform(0.2, 1.0) * np.exp(2j * np.pi * rng.uniform())
    return HenonComposition.single(a, random_polynomial(rng, degree))


def two_factor_map() -> HenonComposition:
    return HenonComposition((
        HenonFactor(0.2 + 0.1j, MonicCenteredPolynomial.quadratic(-0.5 + 0.2j)),
        HenonFactor(-0.3, MonicCenteredPolynomial.quadratic(0.4)),
    ))


def write_map(path, f: HenonComposition):
    path.write_text(f.to_json(), encoding="utf-8")
    return str(path)


def map_document(a, coeffs, degree=2) -> str:
    """Hand-written map JSON, the way users write input files"""
    factor = {"a": [complex(a).real, complex(a).imag],
              "poly": {"degree": degree, "coeffs": [[complex(c).real, complex(c).imag] for c in coeffs]}}
    return json.dumps({"factors": [factor]})
