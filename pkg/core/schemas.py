from typing import Literal, Optional

from django.conf import settings
from ninja import Field, Schema
from pydantic import ConfigDict, field_validator

from core.funcspace import Grid


# -------------------------------------------------------------
# PROBLEM / GRID
# -------------------------------------------------------------
class ConfigSchema(Schema):
    """Run-config section; unknown keys are rejected so typos surface."""

    model_config = ConfigDict(extra="forbid")


class ProblemId(ConfigSchema):
    name: str = Field("paper_example", min_length=1)
    parameters: dict[str, float] = Field(default_factory=dict)


class GridConfig(ConfigSchema):
    t_max: float = Field(20.0, gt=0, allow_inf_nan=False)
    n_nodes: int = Field(2001, ge=2)

    def build(self) -> Grid:
        return Grid(t_max=self.t_max, n_nodes=self.n_nodes)


# -------------------------------------------------------------
# NUMERICS
# -------------------------------------------------------------
class QuadConfig(ConfigSchema):
    base_panels: int = Field(16, ge=2)
    rel_tol: float = Field(1e-9, gt=0, allow_inf_nan=False)
    abs_tol: float = Field(1e-12, gt=0, allow_inf_nan=False)
    max_refine: int = Field(20, ge=1)

    @field_validator("base_panels")
    @classmethod
    def _even_panels(cls, value: int) -> int:
        if value % 2:
            raise ValueError("base_panels must be even")
        return value


class SolveConfig(ConfigSchema):
    tol: float = Field(1e-8, gt=0, allow_inf_nan=False)
    max_iter: int = Field(500, ge=1)
    damping: float = Field(1.0, gt=0, le=1)
    init: Literal["g", "zero"] = "g"
    divergence_factor: float = Field(1e6, gt=1, allow_inf_nan=False)


class MncParams(ConfigSchema):
    eps_ladder: list[float] = Field(
        default_factory=lambda: [0.5, 0.2, 0.1, 0.05, 0.02, 0.01]
    )
    # None → (t_max/4, t_max/2, t_max) and 0.8·t_max once the grid is known.
    k_ladder: Optional[list[float]] = None
    tail_start: Optional[float] = Field(None, ge=0)

    @field_validator("eps_ladder")
    @classmethod
    def _decreasing_eps(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("eps_ladder must not be empty")
        if any(e <= 0 for e in value):
            raise ValueError("eps_ladder entries must be positive")
        if any(b >= a for a, b in zip(value, value[1:])):
            raise ValueError("eps_ladder must be strictly decreasing")
        return value

    @field_validator("k_ladder")
    @classmethod
    def _increasing_k(cls, value: Optional[list[float]]) -> Optional[list[float]]:
        if value is None:
            return value
        if not value:
            raise ValueError("k_ladder must not be empty")
        if any(k <= 0 for k in value):
            raise ValueError("k_ladder entries must be positive")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("k_ladder must be strictly increasing")
        return value


class VerifyConfig(ConfigSchema):
    n_samples: int = Field(10_000, ge=1)
    range_bound: float = Field(100.0, gt=0)
    box_bound: float = Field(10.0, gt=0)
    n_states: int = Field(100, ge=1)
    n_pairs: int = Field(20, ge=1)
    state_bound: float = Field(1.0, gt=0)
    warp_samples: int = Field(1000, ge=1)
    t_ladder: list[float] = Field(default_factory=lambda: [5.0, 10.0, 20.0, 30.0, 40.0, 50.0])

    @field_validator("t_ladder")
    @classmethod
    def _increasing_ladder(cls, value: list[float]) -> list[float]:
        if not value or any(t < 0 for t in value):
            raise ValueError("t_ladder must be a nonempty list of nonnegative times")
        if any(b <= a for a, b in zip(value, value[1:])):
            raise ValueError("t_ladder must be strictly increasing")
        return value


class DiagnoseConfig(ConfigSchema):
    window: int = Field(5, ge=1)
    axiom_trials: int = Field(100, ge=1)
    family_size: int = Field(5, ge=1)
    # 0 turns the condensing probe off
    condensing_trials: int = Field(2, ge=0)
    condensing_family: int = Field(2, ge=1)


# -------------------------------------------------------------
# RUN CONFIG (the JSON document given to every command)
# -------------------------------------------------------------
class RunConfig(ConfigSchema):
    problem: ProblemId = Field(default_factory=ProblemId)
    grid: GridConfig = Field(default_factory=GridConfig)
    solve: SolveConfig = Field(default_factory=SolveConfig)
    quad: QuadConfig = Field(default_factory=QuadConfig)
    mnc: MncParams = Field(default_factory=MncParams)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    diagnose: DiagnoseConfig = Field(default_factory=DiagnoseConfig)
    output_dir: str = Field(default_factory=lambda: str(settings.TRIPLED_OUTPUT_DIR))
    seed: int = 0
    retain_trace: bool = False


# -------------------------------------------------------------
# OUTPUT PAYLOADS
# -------------------------------------------------------------
class ModulusEntryOut(Schema):
    k: float
    eps: float
    value: float


class MncReportOut(Schema):
    omega0_est: float
    tail_diam_est: float
    mu_est: float
    modulus_table: list[ModulusEntryOut]


class WindowMncOut(Schema):
    start: int
    stop: int
    components: list[MncReportOut]
    mu_max: float
    mu_sum: float


class SolveReportOut(Schema):
    problem: str
    parameters: dict[str, float]
    t_max: float
    n_nodes: int
    tol: float
    damping: float
    status: Literal["converged", "inconclusive"]
    converged: bool
    iterations: int
    final_residual: float
    residuals: list[float]
    extension_hits: int
    mnc_trace: Optional[list[WindowMncOut]] = None


class ConditionOut(Schema):
    condition: str
    component: Optional[int] = None
    status: Literal["verified-on-samples", "violated", "advisory"]
    witness: Optional[list[Optional[float]]] = None
    measured: Optional[float] = None
    note: str = ""


class DecayCurveOut(Schema):
    component: int
    t: list[float]
    values: list[float]
    status: Literal["verified-on-samples", "violated", "advisory"]


class ConstantsOut(Schema):
    G: float
    M: list[float]
    D_estimate: list[Optional[float]]
    D_upper: list[Optional[float]]
    delta: list[float]
    alpha: list[float]
    r0: Optional[float] = None


class HypothesisReportOut(Schema):
    problem: str
    passed: bool
    conditions: list[ConditionOut]
    constants: ConstantsOut
    decay: list[DecayCurveOut]


class AxiomFailureOut(Schema):
    trial: int
    check: Literal["monotonicity", "convexity"]
    lam: Optional[float] = None
    lhs: float
    rhs: float


class AxiomSuiteOut(Schema):
    trials: int
    monotonicity_passed: int
    convexity_passed: int
    passed: bool
    failures: list[AxiomFailureOut]


class CondensingTrialOut(Schema):
    mu_in: float
    mu_out: list[float]
    ratio: Optional[float] = None


class CondensingOut(Schema):
    trials: list[CondensingTrialOut]
    max_ratio: Optional[float] = None
    worst_trial: Optional[int] = None


class DiagnoseOut(Schema):
    problem: str
    window: int
    solve_status: Literal["converged", "inconclusive"]
    iterations: int
    windows: list[WindowMncOut]
    final_window: Optional[WindowMncOut] = None
    axioms: AxiomSuiteOut
    condensing: Optional[CondensingOut] = None


class ProblemOut(Schema):
    name: str
    description: str
    parameters: dict[str, float]
