"""
增长过程引擎

时刻 t -> t+1: 新顶点 t+1 以概率 λ·d_u(t)/t 独立地连接每个已有顶点 u。
抽样走 numba 内核 (双精度), 单步分布的精确枚举走 Fraction (任意精度有理数)。
"""
import itertools
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from radonet.app.core.config import settings
from radonet.app.core.exceptions import (
    AdjacencyCapError,
    EnumerationGuardError,
    ParameterDomainError,
    UntrackedVertexError,
)
from radonet.app.core.logger import logger
from radonet.app.core.schemas import ExperimentConfig, SeedGraphSpec, StepRecord
from radonet.app.models.growing_graph import GrowingGraph, check_lambda, new_seed, preset_seed
from radonet.app.utils import artifacts
from radonet.app.utils.kernels import grow_chunk, steps_within_budget

RationalLike = Union[Fraction, int, str]


class Trajectory(BaseModel):
    """
    一次运行的逐步记录 (列式存储)

    第 s 行对应新顶点 t_new[s]; tracked_degrees[s, j] 为 tracked[j] 在这一步之后的
    度数, 顶点尚未出生时为 -1。seed_* 字段保存种子时刻的同类数据。
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    seed_description: str
    lam: float
    seed_t: int
    seed_edge_count: int
    tracked: List[int] = Field(default_factory=list)
    seed_tracked_degrees: np.ndarray
    t_new: np.ndarray
    new_degree: np.ndarray
    edge_count: np.ndarray
    max_degree: np.ndarray
    tracked_degrees: np.ndarray
    snapshot_paths: Dict[int, str] = Field(default_factory=dict)
    final_graph: Optional[GrowingGraph] = Field(None, exclude=True)

    def __len__(self) -> int:
        return int(self.t_new.size)

    @property
    def horizon(self) -> int:
        return int(self.t_new[-1]) if len(self) else self.seed_t

    def records(self) -> Iterator[StepRecord]:
        for s in range(len(self)):
            yield StepRecord(
                t_new=int(self.t_new[s]),
                new_degree=int(self.new_degree[s]),
                edge_count_after=int(self.edge_count[s]),
                tracked_degrees={
                    u: int(self.tracked_degrees[s, j])
                    for j, u in enumerate(self.tracked) if self.tracked_degrees[s, j] >= 0
                },
            )

    def edge_series(self) -> Tuple[np.ndarray, np.ndarray]:
        """(t, E(t)), 从种子时刻开始"""
        ts = np.concatenate([[self.seed_t], self.t_new]).astype(np.int64)
        es = np.concatenate([[self.seed_edge_count], self.edge_count]).astype(np.int64)
        return ts, es

    def degree_series(self, u: int) -> Tuple[np.ndarray, np.ndarray]:
        """(t, d_u(t)), 从 max(u, 种子时刻) 开始"""
        if u not in self.tracked:
            raise UntrackedVertexError(u)
        j = self.tracked.index(u)
        ts = np.concatenate([[self.seed_t], self.t_new]).astype(np.int64)
        ds = np.concatenate([[self.seed_tracked_degrees[j]], self.tracked_degrees[:, j]]).astype(np.int64)
        born = ds >= 0
        return ts[born], ds[born]


class ExactStepDistribution(BaseModel):
    """G(t) 一步之后新顶点邻居集合的精确分布, 只列出正概率的结果"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: int
    lam: Fraction
    degrees: Tuple[int, ...]
    edge_count: int
    outcomes: List[Tuple[FrozenSet[int], Fraction]]

    def total(self) -> Fraction:
        return sum((p for _, p in self.outcomes), Fraction(0))

    def expect(self, fn: Callable[[FrozenSet[int]], Fraction]) -> Fraction:
        return sum((p * fn(s) for s, p in self.outcomes), Fraction(0))

    def probability_of(self, subset) -> Fraction:
        key = frozenset(subset)
        for s, p in self.outcomes:
            if s == key:
                return p
        return Fraction(0)

    def new_degree_mean(self) -> Fraction:
        return self.expect(lambda s: Fraction(len(s)))

    def new_degree_variance(self) -> Fraction:
        mean = self.new_degree_mean()
        return self.expect(lambda s: Fraction(len(s)) ** 2) - mean * mean


# ---------------------------------------------------------------- 种子图

def build_seed(spec: SeedGraphSpec, track_adjacency: bool = True) -> GrowingGraph:
    """按配置构造种子图"""
    if spec.snapshot is not None:
        g, _ = artifacts.read_snapshot(Path(spec.snapshot), track_adjacency=track_adjacency)
        return g
    if spec.edges is not None:
        return new_seed(spec.edges, spec.n_vertices, track_adjacency=track_adjacency)
    return preset_seed(spec.preset, track_adjacency=track_adjacency, t0=spec.t0, degree=spec.degree)


def describe_seed(spec: SeedGraphSpec) -> str:
    if spec.snapshot is not None:
        return f"snapshot:{spec.snapshot}"
    if spec.edges is not None:
        return f"edges:n={spec.n_vertices},E={len(spec.edges)}"
    if spec.preset == "star":
        return f"star:t0={spec.t0},degree={spec.degree}"
    return spec.preset


# ---------------------------------------------------------------- 抽样

def _advance(g: GrowingGraph, n_steps: int, lam: float, rng: np.random.Generator,
             tracked: np.ndarray, nbr_out: np.ndarray, cur_max: int):
    """推进 n_steps 步, 返回 (新度数, 最大度数, 跟踪度数, 当前最大度数)"""
    t_start = g.t
    degrees = g.reserve(t_start + n_steps)
    draws = (t_start + n_steps) * (t_start + n_steps + 1) // 2 - t_start * (t_start + 1) // 2
    uniforms = rng.random(draws)
    new_degrees = np.empty(n_steps, dtype=np.int64)
    max_degrees = np.empty(n_steps, dtype=np.int64)
    tracked_out = np.empty((n_steps, tracked.size), dtype=np.int64)
    if nbr_out.size < draws:
        nbr_out = np.empty(draws, dtype=np.int32)
    written = grow_chunk(degrees, t_start, n_steps, lam, uniforms, nbr_out,
                         new_degrees, max_degrees, tracked, tracked_out, cur_max)
    g.commit_steps(new_degrees, nbr_out[:written])
    cur_max = int(max_degrees[-1])
    return new_degrees, max_degrees, tracked_out, cur_max


def step(g: GrowingGraph, rng: np.random.Generator, lam: float = 1.0,
         tracked: Sequence[int] = ()) -> StepRecord:
    """单步: G(t) -> G(t+1), 原地修改 g"""
    lam = check_lambda(lam)
    if g.t < 1:
        raise ParameterDomainError("step 需要 t >= 1", t=g.t)
    tracked_arr = np.asarray(list(tracked), dtype=np.int64)
    cur_max = int(g.degrees.max())
    nbr_out = np.empty(g.t + 1, dtype=np.int32)
    new_degrees, _, tracked_out, _ = _advance(g, 1, lam, rng, tracked_arr, nbr_out, cur_max)
    return StepRecord(
        t_new=g.t,
        new_degree=int(new_degrees[0]),
        edge_count_after=g.edge_count,
        tracked_degrees={int(u): int(tracked_out[0, j]) for j, u in enumerate(tracked_arr) if tracked_out[0, j] >= 0},
    )


def run(config: ExperimentConfig, rng: np.random.Generator, seed_graph: Optional[GrowingGraph] = None,
        on_checkpoint: Optional[Callable[[GrowingGraph], None]] = None,
        snapshot_dir: Optional[Path] = None, keep_graph: bool = False) -> Trajectory:
    """
    从种子图运行到 config.horizon

    Args:
        seed_graph: 覆盖 config.seed_graph 的种子图 (会被原地推进)
        on_checkpoint: 在每个 checkpoint 时刻以当前图调用
        snapshot_dir: 写快照的目录, 在 snapshot_times 的每个时刻写一次
        keep_graph: 是否在轨迹上保留最终的图
    """
    lam = float(config.lam)
    assert 0.0 < lam <= 1.0, "λ 必须在 (0, 1] 内"
    g = seed_graph if seed_graph is not None else build_seed(config.seed_graph, config.needs_adjacency)
    seed_t = g.t
    horizon = config.horizon
    if horizon <= seed_t:
        raise ParameterDomainError(f"horizon {horizon} 必须大于种子时刻 {seed_t}", horizon=horizon, seed_t=seed_t)
    if g.track_adjacency and horizon > g.adjacency_cap:
        raise AdjacencyCapError(horizon, g.adjacency_cap)

    tracked = [u for u in config.tracked_vertices]
    bad = [u for u in tracked if u < 0 or u > horizon]
    if bad:
        raise ParameterDomainError(f"跟踪顶点超出 [0, {horizon}]: {bad}", tracked=bad)
    tracked_arr = np.asarray(tracked, dtype=np.int64)
    seed_tracked = np.array([g.degree(u) if u <= seed_t else -1 for u in tracked], dtype=np.int64)
    seed_edges = g.edge_count

    n_total = horizon - seed_t
    t_new = np.arange(seed_t + 1, horizon + 1, dtype=np.int64)
    new_degree = np.empty(n_total, dtype=np.int64)
    max_degree = np.empty(n_total, dtype=np.int64)
    tracked_degrees = np.empty((n_total, len(tracked)), dtype=np.int64)

    stops = sorted({t for t in list(config.checkpoints) + list(config.snapshot_times) if t > seed_t} | {horizon})
    snapshot_set = set(config.snapshot_times)
    checkpoint_set = set(config.checkpoints)
    snapshot_paths: Dict[int, str] = {}

    nbr_out = np.empty(max(settings.CHUNK_DRAWS, horizon + 1), dtype=np.int32)
    cur_max = int(g.degrees.max())
    done = 0
    for stop in stops:
        while g.t < stop:
            n = steps_within_budget(g.t, stop - g.t, settings.CHUNK_DRAWS)
            nd, md, td, cur_max = _advance(g, n, lam, rng, tracked_arr, nbr_out, cur_max)
            new_degree[done: done + n] = nd
            max_degree[done: done + n] = md
            tracked_degrees[done: done + n] = td
            done += n
        if stop in snapshot_set and snapshot_dir is not None:
            path = Path(snapshot_dir) / f"snapshot_t{stop}.txt"
            artifacts.write_snapshot(g, path, lam)
            snapshot_paths[stop] = str(path)
        if stop in checkpoint_set and on_checkpoint is not None:
            on_checkpoint(g)

    edge_count = seed_edges + np.cumsum(new_degree)
    logger.debug(f"运行完成: t={g.t}, E={g.edge_count}, 最大度数={cur_max}")
    return Trajectory(
        seed_description=describe_seed(config.seed_graph) if seed_graph is None else repr(seed_graph),
        lam=lam,
        seed_t=seed_t,
        seed_edge_count=seed_edges,
        tracked=tracked,
        seed_tracked_degrees=seed_tracked,
        t_new=t_new,
        new_degree=new_degree,
        edge_count=edge_count,
        max_degree=max_degree,
        tracked_degrees=tracked_degrees,
        snapshot_paths=snapshot_paths,
        final_graph=g if keep_graph else None,
    )


def sample_step_codes(g: GrowingGraph, rng: np.random.Generator, lam: float, n_samples: int) -> np.ndarray:
    """
    不修改 g, 从 G(t) 独立抽 n_samples 次下一步的邻居集合

    返回每次结果的位编码 (第 u 位表示连到 u), 用于与精确分布做拟合优度检验。
    """
    lam = check_lambda(lam)
    if g.t + 1 > 62:
        raise ParameterDomainError("位编码最多支持 62 个顶点", t=g.t)
    p = lam * g.degrees.astype(float) / g.t
    hits = rng.random((n_samples, g.t + 1)) < p
    weights = np.left_shift(np.int64(1), np.arange(g.t + 1, dtype=np.int64))
    return hits.astype(np.int64) @ weights


def subset_code(subset) -> int:
    return sum(1 << int(u) for u in subset)


# ---------------------------------------------------------------- 精确 oracle

def as_fraction(lam: RationalLike) -> Fraction:
    value = Fraction(lam)
    if not (0 < value <= 1):
        raise ParameterDomainError(f"λ 必须在 (0, 1] 内, 实际 {lam}", lam=str(lam))
    return value


def exact_step_distribution(g: GrowingGraph, lam: RationalLike = 1) -> ExactStepDistribution:
    """
    枚举下一步所有正概率的邻居集合, 概率为精确有理数

    只在 0 < p_u < 1 的顶点上分支: p_u = 1 的顶点必然在集合中, p_u = 0 的必然不在。
    """
    lam = as_fraction(lam)
    if g.t > settings.ORACLE_MAX_T:
        raise EnumerationGuardError(g.t, settings.ORACLE_MAX_T)
    if g.t < 1:
        raise ParameterDomainError("需要 t >= 1", t=g.t)
    degrees = tuple(int(d) for d in g.degrees)
    probs = [lam * Fraction(d, g.t) for d in degrees]
    forced = frozenset(u for u, p in enumerate(probs) if p == 1)
    free = [u for u, p in enumerate(probs) if 0 < p < 1]
    outcomes: List[Tuple[FrozenSet[int], Fraction]] = []
    for choice in itertools.product((False, True), repeat=len(free)):
        prob = Fraction(1)
        chosen = set(forced)
        for u, take in zip(free, choice):
            if take:
                prob *= probs[u]
                chosen.add(u)
            else:
                prob *= 1 - probs[u]
        outcomes.append((frozenset(chosen), prob))
    return ExactStepDistribution(t=g.t, lam=lam, degrees=degrees, edge_count=g.edge_count, outcomes=outcomes)


def expected_new_degree(g: GrowingGraph, lam: float = 1.0) -> float:
    """E[d_{t+1}(t+1) | G(t)] = λ·2E(t)/t"""
    return lam * 2.0 * g.edge_count / g.t


def new_degree_variance(g: GrowingGraph, lam: float = 1.0) -> float:
    """新顶点度数的 Poisson-Binomial 方差 Σ p_u(1 - p_u)"""
    p = check_lambda(lam) * g.degrees.astype(float) / g.t
    return float(np.sum(p * (1.0 - p)))
