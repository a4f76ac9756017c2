"""Request and response bodies of the HTTP API."""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HealthResponse(BaseModel):
    status: str
    version: str


class LengthModel(_Strict):
    dist: Literal["fixed", "geometric"] = "geometric"
    value: float = Field(20.0, ge=1)


class PolicyModel(_Strict):
    kind: Literal["windowed", "bernoulli-toggle", "always-on", "always-off"] = "windowed"
    on_length: LengthModel = LengthModel(dist="geometric", value=20.0)
    off_length: LengthModel = LengthModel(dist="geometric", value=80.0)
    toggle_probability: float = Field(0.05, gt=0, le=1)
    budget: float = Field(0.25, gt=0, le=1)
    rng_seed: int = 0


class BoundsModel(_Strict):
    max_chain_length: int = Field(8, ge=1)
    max_outputs: int = Field(10_000, ge=0)
    depth: int = Field(1, ge=0)
    loop_bound: int = Field(3, ge=0)
    inline_depth: int = Field(2, ge=0)


class SynthRequest(_Strict):
    program: str
    depth: int = Field(1, ge=0)
    loop_bound: int = Field(3, ge=0)
    inline_depth: int = Field(2, ge=0)


class SynthResponse(BaseModel):
    conditions: list[str]
    cshash: str
    program_hash: str
    relevant_methods: list[str]
    file: str


class MonitorRequest(_Strict):
    program: str
    conditions: str  # condition file text
    policy: PolicyModel = PolicyModel()
    seeds: list[int] = Field(default_factory=lambda: [0], min_length=1)
    installation: str = "local"
    production: bool = False


class RunStats(BaseModel):
    seed: int
    events_total: int
    events_recorded: int
    signature_evaluations: int
    recorded_fraction: float
    fault: Optional[str] = None


class MonitorResponse(BaseModel):
    cshash: str
    fragment_count: int
    fragments: str  # fragment file text
    runs: list[RunStats]


class ReconstructRequest(_Strict):
    fragments: list[str] = Field(min_length=1)  # one or more fragment files
    conditions: Optional[str] = None
    program: Optional[str] = None
    max_chain_length: int = Field(8, ge=1)
    max_outputs: int = Field(10_000, ge=0)


class ReconstructResponse(BaseModel):
    cshash: str
    fragment_count: int
    trace_count: int
    traces: str  # trace file text


class GenRequest(_Strict):
    rng_seed: int = 42
    n_classes: int = Field(4, ge=1)
    n_methods_per_class: int = Field(3, ge=1)
    max_branch_depth: int = Field(2, ge=0)
    max_loop_nesting: int = Field(1, ge=0)
    min_fields: int = Field(1, ge=1)
    max_fields: int = Field(3, ge=1)
    n_interfaces: int = Field(1, ge=1)
    max_statements: int = Field(3, ge=1)
    main_iterations: int = Field(3, ge=1)
    allow_faults: bool = False


class GenResponse(BaseModel):
    source: str
    program_hash: str


class EvalRequest(_Strict):
    program: Optional[str] = None
    seed: int = 42  # generator seed when no program is given
    runs: int = Field(100, ge=1)
    policy: PolicyModel = PolicyModel()
    bounds: BoundsModel = BoundsModel()
    allow_faults: bool = False
    include_artifacts: bool = False


class EvalResponse(BaseModel):
    metrics: dict
    program: Optional[str] = None
    conditions: Optional[str] = None
    fragments: Optional[str] = None
    traces: Optional[str] = None


class CollectRequest(_Strict):
    fragments: str


class CollectResponse(BaseModel):
    cshash: str
    accepted: int
    total: int
    installations: list[str]
