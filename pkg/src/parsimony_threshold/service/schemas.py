"""Request and response models for the HTTP service.

Every endpoint is a POST taking a small JSON body; tree sources are
either a model spec string (``fixed:0.8``, ``yule:6``, ``iid:...``) or
an inline tree document in the library's JSON format. File references
are resolved by the caller — the service never reads the filesystem.
"""

from __future__ import annotations

from pydantic import BaseModel, ConfigDict, Field

from ..trees import DEFAULT_DEPTH_CAP

_NO_PROTECTED = ConfigDict(protected_namespaces=())

CutsetSpec = str | list[int] | None


class TreeSourceRequest(BaseModel):
    """Common tree-source fields: exactly one of `model` / `tree`."""

    model_config = _NO_PROTECTED

    model: str | None = Field(default=None, description="weight model spec, e.g. fixed:0.75")
    tree: dict | None = Field(default=None, description="inline tree document (JSON format)")
    cutset: CutsetSpec = Field(default=None, description="regular:N, ids:..., or an id list")
    seed: int = 0
    depth_cap: int = DEFAULT_DEPTH_CAP


class SimulateRequest(TreeSourceRequest):
    trials: int = Field(default=10_000, ge=1)
    dump_states: bool = False
    threads: int | None = Field(default=None, ge=1)
    chunk: int = Field(default=8192, ge=1)


class TableBlock(BaseModel):
    columns: list[str]
    rows: list[list]


class SimulateResponse(BaseModel):
    estimate: float
    stderr: float
    trials: int
    successes: int
    cutset_size: int
    states: TableBlock | None = None


class ExactRaRequest(TreeSourceRequest):
    pass


class ExactRaResponse(BaseModel):
    ra: float
    d_root: float
    u_root: float
    cutset_size: int


class FixedPointRequest(BaseModel):
    p: float
    tol: float = Field(default=1e-12, gt=0)
    max_iters: int = Field(default=1_000_000, ge=1)


class FixedPointResponse(BaseModel):
    p: float
    w: float
    d: float
    u: float
    ra: float
    iterations: int
    converged: bool
    regime: str


class ThinningSpec(BaseModel):
    q_tilde: float = Field(gt=0.0, le=1.0)


class BranchingRequest(BaseModel):
    model_config = _NO_PROTECTED

    model: str
    seed: int = 0
    depths: list[int] = Field(default=[5, 10, 15, 20])
    tol: float = Field(default=0.01, gt=0)
    thinning: ThinningSpec | None = None
    bracket: tuple[float, float] | None = None
    depth_cap: int = DEFAULT_DEPTH_CAP


class KappaProbeOut(BaseModel):
    kappa: float
    depths: list[int]
    values: list[float]
    decays: bool


class BranchingResponse(BaseModel):
    value: float
    lower: float
    upper: float
    tolerance: float
    converged: bool
    note: str | None = None
    probes: list[KappaProbeOut]


class ConditionRequest(BranchingRequest):
    pass


class ConditionResponse(BaseModel):
    holds: bool | None
    conclusive: bool
    margin: float
    estimate: float
    threshold: float
    min_weight: float


class ExtinctionRequest(BaseModel):
    q_tilde: float = Field(gt=0.0, le=1.0)
    depth: int = Field(default=20, ge=1)
    trials: int = Field(default=10_000, ge=1)
    seed: int = 0
    per_trial: bool = False


class ExtinctionResponse(BaseModel):
    q_tilde: float
    depth: int
    trials: int
    extinct: int
    survived: int
    frequency: float
    stderr: float
    analytic: float
    table: TableBlock | None = None


class SubtreeRequest(BaseModel):
    """Percolation runs on the whole materialized tree: a model spec
    plus an explicit depth, or an inline tree document."""

    model_config = _NO_PROTECTED

    model: str | None = None
    tree: dict | None = None
    depth: int | None = Field(default=None, ge=1)
    theta_star: float = Field(gt=0.0, lt=1.0)
    H: int = Field(ge=0)
    seed: int = 0
    depth_cap: int = DEFAULT_DEPTH_CAP


class SubtreeResponse(BaseModel):
    theta_star: float
    H: int
    max_level: int
    survived: bool
    level_counts: list[int]
    subtree_size: int


class ConstantsRequest(BaseModel):
    phi_prime: float = Field(gt=0.0)
    theta_star: float = Field(gt=0.0, lt=1.0)


class ConstantsResponse(BaseModel):
    H: int
    eps_prime: float


class SweepRequest(BaseModel):
    kind: str = Field(pattern="^(fixed_p|yule_lambda)$")
    grid: list[float]
    depths: list[int]
    trials: int = Field(default=0, ge=0)
    seed: int = 0
    tree_samples: int = Field(default=1, ge=1)
    threads: int | None = Field(default=None, ge=1)
    chunk: int = Field(default=8192, ge=1)
    depth_cap: int = DEFAULT_DEPTH_CAP


class SweepResponse(BaseModel):
    kind: str
    grid: list[float]
    depths: list[int]
    trials: int
    tree_samples: int
    seed: int
    table: TableBlock


class OracleCheckRequest(TreeSourceRequest):
    tolerance: float = Field(default=1e-12, gt=0)


class OracleCheckResponse(BaseModel):
    brute_force: float
    recurrence: float
    difference: float
    ok: bool


class HealthResponse(BaseModel):
    status: str
    version: str
