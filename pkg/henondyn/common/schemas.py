"""JSON schemas for everything henondyn reads or writes.

Complex numbers travel as ``[re, im]`` pairs of JSON numbers, except orbit
data, which uses ``float.hex`` strings so that points survive a round trip
bit for bit.
"""

from typing import Any, Dict, List, Optional
from pydantic import BaseModel, Field, conlist, model_validator

ComplexPair = conlist(float, min_length=2, max_length=2)
HexComplex = conlist(str, min_length=2, max_length=2)


def complex_to_pair(z) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def pair_to_complex(pair) -> complex:
    return complex(float(pair[0]), float(pair[1]))


def complex_to_hex(z) -> List[str]:
    z = complex(z)
    return [float(z.real).hex(), float(z.imag).hex()]


def hex_to_complex(pair) -> complex:
    def _part(v):
        return float.fromhex(v) if isinstance(v, str) else float(v)
    return complex(_part(pair[0]), _part(pair[1]))


class PolynomialModel(BaseModel):
    degree: int = Field(ge=2)
    coeffs: List[ComplexPair]

    @model_validator(mode="after")
    def _check_length(self):
        if len(self.coeffs) != self.degree - 1:
            raise ValueError(
                f"polynomial of degree {self.degree} needs {self.degree - 1} coefficients "
                f"(a_0..a_{self.degree - 2}), got {len(self.coeffs)}")
        return self


class FactorModel(BaseModel):
    a: ComplexPair
    poly: PolynomialModel

    @model_validator(mode="after")
    def _check_jacobian(self):
        if self.a[0] == 0.0 and self.a[1] == 0.0:
            raise ValueError("factor parameter a must be nonzero")
        return self


class CompositionModel(BaseModel):
    """Factors listed in application order h_1, ..., h_k"""
    factors: List[FactorModel] = Field(min_length=1)


class OrbitRecordModel(BaseModel):
    period: int = Field(ge=1)
    exact_period: int = Field(ge=1)
    points: List[conlist(HexComplex, min_length=2, max_length=2)]
    eigenvalues: conlist(HexComplex, min_length=2, max_length=2)
    trace: HexComplex
    orbit_type: str
    multiplicity: int = Field(ge=1)
    residual: float = Field(ge=0.0)
    unit_eigenvalue: bool = False
    degree_mismatch: bool = False


class PeriodicSetModel(BaseModel):
    map: CompositionModel
    period: int
    status: str
    expected_count: int
    count: int
    records: List[OrbitRecordModel]


class SpectrumModel(BaseModel):
    map: CompositionModel
    jacobian: ComplexPair
    degree: int
    max_period: int
    traces: Dict[str, List[ComplexPair]]
    exact_traces: Dict[str, Dict[str, List[ComplexPair]]] = Field(default_factory=dict)
    unstable: Dict[str, List[ComplexPair]]
    status: Dict[str, str]
    flagged: Dict[str, int] = Field(default_factory=dict)


class SpectrumComparisonModel(BaseModel):
    equal: bool
    max_distance: float
    worst_period: Optional[int] = None
    worst_pair: Optional[conlist(ComplexPair, min_length=2, max_length=2)] = None
    reason: str = ""


class IsospectralMatchModel(BaseModel):
    map: CompositionModel
    distance: float


class IsospectralModel(BaseModel):
    base: CompositionModel
    mode: str
    max_period: int
    cells_scanned: int
    status: str
    matches: List[IsospectralMatchModel]


class ExceptionalModel(BaseModel):
    status: str
    kappa: Optional[ComplexPair] = None
    roots_of_unity: int = 1
    max_deviation: Optional[float] = None


class LyapunovModel(BaseModel):
    map: CompositionModel
    chi_plus_estimate: Optional[float]
    chi_minus: Optional[float]
    chi_minus_stable_mean: Optional[float] = None
    period_used: int
    saddle_count: int
    spread: Optional[float]
    bound_lower: Optional[float]
    bound_upper: Optional[float]
    hypotheses_ok: bool
    status: str
    method: str = "direct"


class BoundsModel(BaseModel):
    chi_estimate: float
    escape_rate: float
    lower: float
    upper: float
    lower_applicable: bool
    upper_applicable: bool
    lower_margin: float
    upper_margin: float
    passed: Optional[bool]
    reasons: List[str] = Field(default_factory=list)


class CrossedMapModel(BaseModel):
    ok: bool
    radius: float
    degree: Optional[int]
    min_ratio: float
    witness: Optional[conlist(ComplexPair, min_length=2, max_length=2)] = None


class FoldModel(BaseModel):
    status: str
    reason: str = ""
    rigorous: bool = False
    s: Optional[float] = None
    s_star: Optional[float] = None
    annulus_index: Optional[int] = None
    q: Optional[int] = None
    critical_point: Optional[ComplexPair] = None
    critical_value: Optional[ComplexPair] = None
    disk_radius: Optional[float] = None
    escape_rate: Optional[float] = None
    factor_index: Optional[int] = None
    projection: Optional[str] = None
    horizontal_degrees: List[int] = Field(default_factory=list)


class TrackStepModel(BaseModel):
    param: ComplexPair
    points: List[conlist(HexComplex, min_length=2, max_length=2)]
    eigenvalues: conlist(HexComplex, min_length=2, max_length=2)
    moduli: conlist(float, min_length=2, max_length=2)


class TrackEventModel(BaseModel):
    step: int
    kind: str
    eigenvalue_index: int
    direction: str
    param: ComplexPair


class TrackModel(BaseModel):
    family: str
    period: int
    status: str
    reason: str = ""
    steps: List[TrackStepModel]
    events: List[TrackEventModel]
    monodromy: Optional[List[int]] = None


class CycleModel(BaseModel):
    period: int
    points: List[conlist(HexComplex, min_length=2, max_length=2)]
    eigenvalues: conlist(HexComplex, min_length=2, max_length=2)


class ScanHitModel(BaseModel):
    param: ComplexPair
    modulus: float
    angle_index: int
    cycles: List[CycleModel]


class ScanModel(BaseModel):
    family: str
    moduli: List[float]
    angles_per_modulus: int
    inits: int
    max_iter: int
    max_period: int
    parameters_scanned: int
    undecided_fraction: float
    hits: List[ScanHitModel]


class SliceModel(BaseModel):
    window: conlist(float, min_length=4, max_length=4)
    resolution: conlist(int, min_length=2, max_length=2)
    max_iter: int
    class_counts: Dict[str, int]
    registry: List[CycleModel]
    image_path: Optional[str] = None


class FixedPointModel(BaseModel):
    point: conlist(ComplexPair, min_length=2, max_length=2)
    eigenvalues: conlist(ComplexPair, min_length=2, max_length=2)
    orbit_type: str


class QuadraticAnalysisModel(BaseModel):
    a: ComplexPair
    alpha: FixedPointModel
    beta: FixedPointModel
    siegel_candidate: bool
    neutral_arc: bool


class GreenValueModel(BaseModel):
    point: conlist(ComplexPair, min_length=2, max_length=2)
    value: ComplexPair


class GreenModel(BaseModel):
    map: CompositionModel
    function: str
    values: List[GreenValueModel]


class CheckModel(BaseModel):
    name: str
    passed: bool
    detail: str = ""


class SelftestModel(BaseModel):
    passed: bool
    checks: List[CheckModel]


class ErrorModel(BaseModel):
    error: Dict[str, Any]
