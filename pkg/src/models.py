from enum import Enum
from typing import Annotated, Any, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, model_validator

from src.settings import N_MAX_CAP


class StrictModel(BaseModel):
    """Base for scenario-file records: unknown keys are errors."""

    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# ---------------------------------------------------------------------------
# Coefficient descriptors
# ---------------------------------------------------------------------------


class CoagFamily(str, Enum):
    CONSTANT = "constant"
    ADDITIVE = "additive"
    MULTIPLICATIVE = "multiplicative"
    POWER_SYM = "power_sym"
    SLOW_SUBLINEAR = "slow_sublinear"
    SQRT_PRODUCT = "sqrt_product"
    LOG_RATIO = "log_ratio"
    CRITICAL_LOG = "critical_log"
    CUSTOM_TABLE = "custom_table"


class PhiChoice(str, Enum):
    LOG = "log"
    ITERATED_LOG = "iterated_log"


class KernelDescriptor(StrictModel):
    """Coagulation family by name + parameters."""

    family: CoagFamily = CoagFamily.CONSTANT
    c: float = Field(1.0, ge=0.0)
    alpha: float = Field(0.5, ge=0.0)
    beta: float = Field(0.5, ge=0.0)
    phi: PhiChoice = PhiChoice.LOG
    table: Optional[str] = None  # CSV of (i, j, value)

    @model_validator(mode="after")
    def _table_required(self):
        if self.family == CoagFamily.CUSTOM_TABLE and not self.table:
            raise ValueError("custom_table kernels need a 'table' CSV path")
        return self


class FragFamily(str, Enum):
    NONE = "none"
    BINARY_UNIFORM = "binary_uniform"
    EROSION = "erosion"
    TABLE = "table"


class FragDescriptor(StrictModel):
    """Linear fragmentation: B_i = rate * i**exponent for i >= 2, B_1 = 0."""

    family: FragFamily = FragFamily.NONE
    rate: float = Field(1.0, ge=0.0)
    exponent: float = 0.0
    table: Optional[str] = None  # CSV of (i, j, value); j == 0 rows hold B_i

    @model_validator(mode="after")
    def _table_required(self):
        if self.family == FragFamily.TABLE and not self.table:
            raise ValueError("table fragmentation needs a 'table' CSV path")
        return self


class DaughterFamily(str, Enum):
    UNIFORM_MASS = "uniform_mass"
    TABLE = "table"


class CollisionDescriptor(StrictModel):
    """Collision-induced fragmentation: b_{k,l} from a kernel, b_{1,1} forced to 0."""

    kernel: KernelDescriptor = Field(default_factory=KernelDescriptor)
    daughters: DaughterFamily = DaughterFamily.UNIFORM_MASS
    table: Optional[str] = None  # CSV of (i, k, l, value)

    @model_validator(mode="after")
    def _table_required(self):
        if self.daughters == DaughterFamily.TABLE and not self.table:
            raise ValueError("table daughters need a 'table' CSV path")
        return self


class DiffusionFamily(str, Enum):
    CONSTANT = "constant"
    ALTERNATING = "alternating"
    POWER = "power"
    TABLE = "table"


class DiffusionDescriptor(StrictModel):
    family: DiffusionFamily = DiffusionFamily.CONSTANT
    d: float = Field(1.0, gt=0.0)
    odd: float = Field(0.5, gt=0.0)
    even: float = Field(2.0, gt=0.0)
    d0: float = Field(1.0, gt=0.0)
    exponent: float = 0.0
    d_min: float = Field(0.5, gt=0.0)
    d_max: float = Field(2.0, gt=0.0)
    values: Optional[list[Annotated[float, Field(gt=0.0)]]] = None

    @model_validator(mode="after")
    def _check(self):
        if self.family == DiffusionFamily.POWER and self.d_min > self.d_max:
            raise ValueError("d_min must not exceed d_max")
        if self.family == DiffusionFamily.TABLE and not self.values:
            raise ValueError("table diffusion needs 'values'")
        return self


class SizeProfile(str, Enum):
    MONODISPERSE = "monodisperse"
    EXPONENTIAL = "exponential"


class SpatialProfile(str, Enum):
    CONSTANT = "constant"
    BUMP = "bump"
    STEP = "step"
    COSINE = "cosine"


class InitialDataDescriptor(StrictModel):
    """c_i^0(x) = size_i * s(x), s of unit spatial mean, sum_i i size_i = mass."""

    size: SizeProfile = SizeProfile.MONODISPERSE
    mass: float = Field(1.0, gt=0.0)
    mean: float = Field(2.0, ge=1.0)
    spatial: SpatialProfile = SpatialProfile.CONSTANT
    x0: float = 0.5
    sigma: float = Field(0.1, gt=0.0)
    amplitude: float = Field(0.5, ge=0.0)
    low: float = Field(0.5, ge=0.0)
    high: float = Field(1.5, ge=0.0)
    mode: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _check(self):
        if self.spatial == SpatialProfile.COSINE and self.amplitude > 1.0:
            raise ValueError("cosine amplitude above 1 gives negative data")
        if self.spatial == SpatialProfile.STEP and self.low + self.high <= 0.0:
            raise ValueError("step profile must carry positive mass")
        return self


# ---------------------------------------------------------------------------
# Simulation configuration
# ---------------------------------------------------------------------------


class ModelKind(str, Enum):
    LINEAR_FRAG = "linear_frag"
    COLLISION_FRAG = "collision_frag"


class TruncationMode(str, Enum):
    CONSERVATIVE = "conservative"
    NON_CONSERVATIVE = "non_conservative"


class DiffusionScheme(str, Enum):
    IMPLICIT_EULER = "implicit_euler"
    CRANK_NICOLSON = "crank_nicolson"


class GridParams(StrictModel):
    length: float = Field(1.0, gt=0.0)
    cells: int = Field(1, ge=1)


class TimeParams(StrictModel):
    dt: float = Field(1.0e-3, gt=0.0)
    t_final: float = Field(1.0, gt=0.0)
    sample_stride: int = Field(10, ge=1)  # in steps
    diffusion_scheme: DiffusionScheme = DiffusionScheme.IMPLICIT_EULER
    keep_snapshots: bool = False

    @model_validator(mode="after")
    def _check(self):
        if self.t_final < self.dt:
            raise ValueError("t_final must be at least dt")
        return self

    @property
    def n_steps(self) -> int:
        return max(1, int(round(self.t_final / self.dt)))


class SimConfig(StrictModel):
    model: ModelKind = ModelKind.LINEAR_FRAG
    truncation: TruncationMode = TruncationMode.CONSERVATIVE
    n: int = Field(64, ge=1)
    grid: GridParams = Field(default_factory=GridParams)
    time: TimeParams = Field(default_factory=TimeParams)
    kernel: KernelDescriptor = Field(default_factory=KernelDescriptor)
    fragmentation: FragDescriptor = Field(default_factory=FragDescriptor)
    collision: Optional[CollisionDescriptor] = None
    diffusion: DiffusionDescriptor = Field(default_factory=DiffusionDescriptor)
    initial: InitialDataDescriptor = Field(default_factory=InitialDataDescriptor)
    tracked_sizes: list[Annotated[int, Field(ge=1)]] = Field(
        default_factory=lambda: [1, 2]
    )

    @model_validator(mode="after")
    def _check(self):
        if self.n > N_MAX_CAP:
            raise ValueError(f"n={self.n} exceeds the kernel cap {N_MAX_CAP}")
        if self.model == ModelKind.COLLISION_FRAG and self.collision is None:
            raise ValueError("collision_frag model needs a 'collision' block")
        too_big = [i for i in self.tracked_sizes if i > self.n]
        if too_big:
            raise ValueError(f"tracked sizes {too_big} exceed n={self.n}")
        return self


# ---------------------------------------------------------------------------
# Analysis requests
# ---------------------------------------------------------------------------


class ThetaFamily(str, Enum):
    POWER = "power"
    INV_SQRT_PHI = "inv_sqrt_phi"
    CONSTANT = "constant"


class ThetaDescriptor(StrictModel):
    family: ThetaFamily = ThetaFamily.POWER
    epsilon: float = Field(0.5, gt=0.0)
    scale: float = Field(1.0, gt=0.0)
    floor: float = Field(0.5, gt=0.0)
    phi: PhiChoice = PhiChoice.LOG


class LambdaSource(str, Enum):
    INITIAL_DATA = "initial_data"
    LOG = "log"
    IDENTITY = "identity"


class LambdaDescriptor(StrictModel):
    source: LambdaSource = LambdaSource.LOG


class GelationVerdict(str, Enum):
    GELATION = "gelation-consistent"
    CONSERVATION = "conservation-consistent"
    INCONCLUSIVE = "inconclusive"


class MassConservationRequest(StrictModel):
    report: Literal["mass_conservation"]
    tolerance: float = Field(1.0e-8, gt=0.0)


class DualityRequest(StrictModel):
    report: Literal["duality"]


class L1TermsRequest(StrictModel):
    report: Literal["l1_terms"]
    sizes: list[Annotated[int, Field(ge=1)]] = Field(default_factory=lambda: [1, 2])


class SuperlinearRequest(StrictModel):
    report: Literal["superlinear"]
    theta: ThetaDescriptor = Field(default_factory=ThetaDescriptor)
    lam: LambdaDescriptor = Field(default_factory=LambdaDescriptor, alias="lambda")
    probe_range: Optional[int] = Field(None, ge=2)


class LogMomentRequest(StrictModel):
    report: Literal["log_moment"]
    constant: float = Field(2.0, gt=0.0)


class GelationScanRequest(StrictModel):
    report: Literal["gelation_scan"]
    sizes: list[Annotated[int, Field(ge=2)]]
    expect: Optional[GelationVerdict] = None

    @model_validator(mode="after")
    def _increasing(self):
        if any(b <= a for a, b in zip(self.sizes, self.sizes[1:])):
            raise ValueError("gelation scan sizes must be increasing")
        return self


class TightnessRequest(StrictModel):
    report: Literal["tightness"]
    k: list[Annotated[int, Field(ge=2)]] = Field(default_factory=lambda: [16, 64, 256])
    expect_decreasing: Optional[bool] = None


class StructureRequest(StrictModel):
    report: Literal["structure"]


class SublinearityRequest(StrictModel):
    report: Literal["sublinearity"]
    sizes: list[Annotated[int, Field(ge=1)]] = Field(default_factory=lambda: [1, 2])
    horizon: int = Field(1024, ge=16)


class ThetaDominationRequest(StrictModel):
    report: Literal["theta_domination"]
    theta: ThetaDescriptor = Field(default_factory=ThetaDescriptor)
    probe_range: int = Field(500, ge=1)


class PsiConstructionRequest(StrictModel):
    report: Literal["psi_construction"]
    theta: ThetaDescriptor = Field(default_factory=ThetaDescriptor)
    lam: LambdaDescriptor = Field(default_factory=LambdaDescriptor, alias="lambda")
    length: int = Field(2000, ge=2)
    probe_range: int = Field(1000, ge=2)


class RegularityRequest(StrictModel):
    report: Literal["regularity"]
    p: float = Field(3.0, ge=1.0)


AnalysisRequest = Annotated[
    Union[
        MassConservationRequest,
        DualityRequest,
        L1TermsRequest,
        SuperlinearRequest,
        LogMomentRequest,
        GelationScanRequest,
        TightnessRequest,
        StructureRequest,
        SublinearityRequest,
        ThetaDominationRequest,
        PsiConstructionRequest,
        RegularityRequest,
    ],
    Field(discriminator="report"),
]


class Scenario(StrictModel):
    """One scenario file = one reproducible experiment."""

    name: str
    description: str = ""
    simulation: SimConfig = Field(default_factory=SimConfig)
    analyses: list[AnalysisRequest] = Field(default_factory=list)
    output_dir: Optional[str] = None


# ---------------------------------------------------------------------------
# Reports
# ---------------------------------------------------------------------------


class BoundStatus(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    FLAG = "flag"


class BoundReport(BaseModel):
    """Measured quantity vs. predicted bound."""

    formula: str
    measured: float
    bound: float
    margin: float
    status: BoundStatus
    details: dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def evaluate(
        cls,
        formula: str,
        measured: float,
        bound: float,
        flag_on_failure: bool = False,
        details: Optional[dict[str, Any]] = None,
    ) -> "BoundReport":
        margin = float(bound) - float(measured)
        if margin >= 0.0:
            status = BoundStatus.PASS
        elif flag_on_failure:
            status = BoundStatus.FLAG
        else:
            status = BoundStatus.FAIL
        return cls(
            formula=formula,
            measured=float(measured),
            bound=float(bound),
            margin=margin,
            status=status,
            details=details or {},
        )

    @property
    def ok(self) -> bool:
        return self.status != BoundStatus.FAIL


class Violation(BaseModel):
    rule: str
    indices: tuple[int, ...]
    detail: str = ""


class ValidationReport(BaseModel):
    n: int
    violations: list[Violation] = Field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.violations


class TrendSeries(BaseModel):
    name: str
    samples: list[float]
    running_sup: list[float]
    decay: bool
    limit_estimate: float


class TrendReport(BaseModel):
    """Finite-horizon sublinearity trend; never a certified limit."""

    i: int
    horizon: int
    js: list[int]
    series: list[TrendSeries]
    K_i: float


class GelationRow(BaseModel):
    n: int
    mass_loss: float


class GelationScanResult(BaseModel):
    rows: list[GelationRow]
    verdict: GelationVerdict
