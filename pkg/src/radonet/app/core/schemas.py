from enum import IntEnum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from radonet.app.constants.graph_types import ExperimentType
from radonet.app.core.config import settings


# 退出码定义
class ExitCode(IntEnum):
    OK = 0
    CONFIG_ERROR = 1
    STATISTICAL_FAILURE = 2
    IO_ERROR = 3


# ---------------------------------------------------------------- 实验配置

class SeedGraphSpec(BaseModel):
    """种子图: 预置名字、内联边列表或快照文件, 三选一"""
    model_config = ConfigDict(extra="forbid")

    preset: Optional[str] = Field(None, description="P3 / K3 / E3 / C4 / P4 / star")
    edges: Optional[List[Tuple[int, int]]] = Field(None, description="内联边列表")
    n_vertices: Optional[int] = Field(None, ge=2, description="内联边列表的顶点数")
    snapshot: Optional[str] = Field(None, description="快照文件路径")
    t0: int = Field(32, ge=2, description="star 种子的 t0")
    degree: int = Field(16, ge=1, description="star 种子中心顶点的度数")

    @model_validator(mode="after")
    def _exactly_one_source(self):
        given = [x is not None for x in (self.preset, self.edges, self.snapshot)]
        if sum(given) == 0:
            self.preset = "P3"
        elif sum(given) > 1:
            raise ValueError("preset / edges / snapshot 只能指定一个")
        if self.edges is not None and self.n_vertices is None:
            self.n_vertices = max([max(e) for e in self.edges], default=1) + 1
        return self


class UrnOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    starts: List[Tuple[int, int]] = Field(default_factory=lambda: [(1, 1), (2, 1)], description="坛子初始 (黑, 白)")
    horizon: int = Field(10_000, ge=2)
    replicates: int = Field(2000, ge=1)
    equivalence: bool = Field(False, description="是否运行完整过程与坛子的等价性检验")
    equivalence_replicates: int = Field(5000, ge=1)
    equivalence_horizon: int = Field(2000, ge=3)
    equivalence_vertex: int = Field(0, ge=0)
    equivalence_significance: float = Field(0.001, gt=0, lt=1)
    drought_horizons: List[int] = Field(default_factory=lambda: [10, 100, 1000, 10_000])

    @model_validator(mode="after")
    def _positive_starts(self):
        for black, white in self.starts:
            if black < 1 or white < 1:
                raise ValueError(f"坛子初始的黑白球数都必须为正: {[black, white]}")
            if black + white >= self.horizon:
                raise ValueError(f"坛子初始 t={black + white} 必须小于 horizon={self.horizon}")
        return self


class TailsOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    t0: int = Field(32, ge=4)
    degree: int = Field(16, ge=1)
    i_max: int = Field(3, ge=1)
    horizon: int = Field(10_000, ge=5)
    replicates: int = Field(4000, ge=1)
    halving_i_max: int = Field(4, ge=1)

    @model_validator(mode="after")
    def _star_fits(self):
        if self.degree >= self.t0:
            raise ValueError(f"star 种子要求 degree < t0, 实际 degree={self.degree}, t0={self.t0}")
        if self.horizon <= self.t0:
            raise ValueError(f"tails.horizon={self.horizon} 必须大于 t0={self.t0}")
        return self


class OracleOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    exhaustive_n: int = Field(4, ge=2, le=5, description="穷举所有 n 个顶点以内的种子图")
    random_family: int = Field(24, ge=0, description="额外随机种子图的个数")
    max_t: int = Field(8, ge=1, description="随机种子图的最大 t")
    normalized_lambda: str = Field("1/2", description="λ 归一化检查使用的有理数 λ")

    @model_validator(mode="after")
    def _random_family_has_room(self):
        # 随机种子图的 t 从 3 起取
        if self.random_family and self.max_t < 3:
            raise ValueError(f"oracle.max_t={self.max_t} 必须 >= 3")
        return self


class RadoOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    max_size: int = Field(2, ge=1, description="|U|、|V| 的上限")
    pool_size: int = Field(settings.REQUEST_POOL_SIZE, ge=2, description="请求从最早的 k 个标准顶点中选取")
    request_time: int = Field(100, ge=2, description="在该时刻的快照上选取请求顶点池")
    request_count: Optional[int] = Field(None, ge=0, description="随机抽样的请求数, 为空时枚举全部")
    satisfied_threshold: float = Field(0.99, gt=0, le=1)
    singleton_tolerance: float = Field(0.15, gt=0)
    independence_significance: float = Field(0.001, gt=0, lt=1)
    sweep_sizes: List[int] = Field(default_factory=lambda: [3], description="λ<1 时检查的 |U|")
    sweep_threshold: float = Field(0.5, ge=0, le=1)
    burn_in: int = Field(2000, ge=0)


class SweepOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    lambdas: List[float] = Field(default_factory=lambda: [0.5, 0.7, 0.9, 1.0])
    sizes: List[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    slope_t_min: int = Field(100, ge=2)
    slope_ranges: Dict[str, Tuple[float, float]] = Field(
        default_factory=lambda: {"0.5": (0.4, 0.6), "1.0": (0.9, 1.0)},
        description="λ -> 最大度数 log-log 斜率的允许区间",
    )
    separation_lambdas: List[float] = Field(
        default_factory=lambda: [0.5],
        description="在这些 λ 上断言 |U| > 1/(1-λ) 的请求满足比例不超过 rado.sweep_threshold",
    )

    @field_validator("lambdas")
    @classmethod
    def _lambda_domain(cls, v: List[float]) -> List[float]:
        for lam in v:
            if not (0.0 < lam <= 1.0):
                raise ValueError(f"λ 必须在 (0, 1] 内: {lam}")
        return v


class CensusOptions(BaseModel):
    model_config = ConfigDict(extra="forbid")

    xi: float = Field(0.05, gt=0)
    second_half_threshold: float = Field(0.01, ge=0, le=1)
    hoeffding_replicates: int = Field(100, ge=1)
    hoeffding_horizon: int = Field(10_000, ge=3)


class ExperimentConfig(BaseModel):
    """一次实验的完整配置 (JSON 文件)"""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    experiment: ExperimentType = Field(ExperimentType.SIMULATE)
    seed_graph: SeedGraphSpec = Field(default_factory=SeedGraphSpec)
    lam: float = Field(1.0, alias="lambda", gt=0, le=1, description="吸附强度 λ ∈ (0, 1]")
    horizon: int = Field(..., ge=2, description="终止时间 T")
    replicates: int = Field(100, ge=1)
    master_seed: int = Field(0, ge=0, lt=1 << 64)
    tracked_vertices: List[int] = Field(default_factory=list)
    checkpoints: List[int] = Field(default_factory=list)
    snapshot_times: List[int] = Field(default_factory=list)
    track_adjacency: Optional[bool] = Field(None, description="为空时按实验类型决定")
    output_dir: str = Field("out")
    significance: float = Field(settings.SIGNIFICANCE, gt=0, lt=1)

    urn: UrnOptions = Field(default_factory=UrnOptions)
    tails: TailsOptions = Field(default_factory=TailsOptions)
    oracle: OracleOptions = Field(default_factory=OracleOptions)
    rado: RadoOptions = Field(default_factory=RadoOptions)
    sweep: SweepOptions = Field(default_factory=SweepOptions)
    census: CensusOptions = Field(default_factory=CensusOptions)

    @field_validator("checkpoints", "snapshot_times", "tracked_vertices")
    @classmethod
    def _sorted_unique(cls, v: List[int]) -> List[int]:
        return sorted(set(v))

    @model_validator(mode="after")
    def _within_horizon(self):
        for name in ("checkpoints", "snapshot_times"):
            late = [t for t in getattr(self, name) if t > self.horizon]
            if late:
                raise ValueError(f"{name} 超出 horizon={self.horizon}: {late}")
        return self

    @property
    def needs_adjacency(self) -> bool:
        if self.track_adjacency is not None:
            return self.track_adjacency
        return bool(self.snapshot_times) or self.experiment in (ExperimentType.RADO, ExperimentType.SYMMETRY)


# ---------------------------------------------------------------- 过程记录

class StepRecord(BaseModel):
    t_new: int = Field(..., description="新顶点的时间 t+1")
    new_degree: int = Field(..., ge=0, description="d_{t+1}(t+1)")
    edge_count_after: int = Field(..., ge=0, description="E(t+1)")
    tracked_degrees: Dict[int, int] = Field(default_factory=dict, description="跟踪顶点在这一步之后的度数")


# ---------------------------------------------------------------- 统计报告

class TailCheckRow(BaseModel):
    i: int
    threshold: float
    bound: float
    empirical_fraction: float
    n: int
    margin: float
    passed: bool


class TailCheckReport(BaseModel):
    t0: int
    rows: List[TailCheckRow] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)


class HoeffdingReport(BaseModel):
    xi: float
    eligible_steps: int = Field(0, description="满足 E(t) >= ξt² 的步数")
    violations: int = Field(0, description="其中新顶点度数为 0 的步数")
    bound_sum: float = Field(0.0, description="Σ e^{-ξ²t}, 对满足条件的步求和")
    last_zero_birth_t: Optional[int] = None
    last_violation_t: Optional[int] = None


class HalvingProfileRow(BaseModel):
    i: int
    bound: float
    empirical_fraction: float
    margin: float
    passed: bool


class CensusRow(BaseModel):
    replicate: int
    isolated_births: int = 0
    universal_births: int = 0
    last_isolated_t: Optional[int] = None
    last_universal_t: Optional[int] = None
    second_half_birth: bool = False


class CensusReport(BaseModel):
    horizon: int
    rows: List[CensusRow] = Field(default_factory=list)

    @property
    def second_half_fraction(self) -> float:
        if not self.rows:
            return 0.0
        return sum(r.second_half_birth for r in self.rows) / len(self.rows)

    @property
    def both_kinds(self) -> int:
        """同时出现孤立与全连接新顶点的副本数"""
        return sum(1 for r in self.rows if r.isolated_births and r.universal_births)


class SatisfactionRow(BaseModel):
    request_id: str
    t: int
    satisfied_fraction: float
    mean_witness_count: float
    ci_low: float
    ci_high: float


# ---------------------------------------------------------------- 实验摘要

class AssertionResult(BaseModel):
    name: str
    passed: bool
    detail: Dict[str, Any] = Field(default_factory=dict)


class ExperimentSummary(BaseModel):
    experiment: ExperimentType
    master_seed: int
    lam: float
    horizon: int
    replicates: int
    assertions: List[AssertionResult] = Field(default_factory=list)
    results: Dict[str, Any] = Field(default_factory=dict)
    plot_data: Dict[str, List[Dict[str, Any]]] = Field(default_factory=dict, exclude=True)

    def check(self, name: str, passed: bool, **detail: Any) -> bool:
        self.assertions.append(AssertionResult(name=name, passed=bool(passed), detail=detail))
        return bool(passed)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def exit_code(self) -> ExitCode:
        return ExitCode.OK if self.passed else ExitCode.STATISTICAL_FAILURE
