"""henondyn package initialization.

Dynamics of complex Hénon maps: one-variable Green and Böttcher functions,
periodic points and trace spectra, Lyapunov exponents and their escape-rate
bounds, and parameter-space scans of the quadratic family.

Layout:
  - ``henondyn.poly1d``, ``henondyn.henon_core``: the maps and their potentials
  - ``henondyn.periodic``, ``henondyn.spectra``: periodic data
  - ``henondyn.lyap``, ``henondyn.bifurcation``: exponents, certificates, scans
  - ``henondyn.common``: logging, display, arguments, schemas, errors
"""

from .henon_core import HenonComposition, HenonFactor, load_composition
from .poly1d import MonicCenteredPolynomial

__version__ = "0.1.0"

__all__ = ["HenonComposition", "HenonFactor", "MonicCenteredPolynomial", "load_composition", "__version__"]
