"""
扩展性质检查

请求 (U, V): 找一个与 U 中每个顶点相邻、与 V 中任何顶点都不相邻的见证顶点。
见证计数只统计编号大于 max(U ∪ V) 的顶点。
"""
import itertools
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from radonet.app.core.config import settings
from radonet.app.core.exceptions import AdjacencyCapError, RequestError
from radonet.app.core.log_decorators import log_method
from radonet.app.core.logger import logger
from radonet.app.core.schemas import ExperimentConfig, SatisfactionRow
from radonet.app.models.growing_graph import GrowingGraph
from radonet.app.services.business import process_engine
from radonet.app.tasks.replicates import run_replicates
from radonet.app.utils.stats import chi2_independence_2x2, wilson_interval


class WitnessRequest(BaseModel):
    """不相交的顶点集 (U, V)"""
    model_config = ConfigDict(frozen=True)

    U: FrozenSet[int] = Field(default_factory=frozenset)
    V: FrozenSet[int] = Field(default_factory=frozenset)

    @model_validator(mode="after")
    def _disjoint(self):
        common = self.U & self.V
        if common:
            raise RequestError(f"U 与 V 必须不相交, 公共顶点: {sorted(common)}", common=sorted(common))
        return self

    @property
    def members(self) -> FrozenSet[int]:
        return self.U | self.V

    @property
    def floor(self) -> int:
        """见证顶点必须大于这个编号; 空请求为 -1"""
        return max(self.members) if self.members else -1

    @property
    def request_id(self) -> str:
        u = ".".join(str(x) for x in sorted(self.U))
        v = ".".join(str(x) for x in sorted(self.V))
        return f"U={u}|V={v}"

    def remap(self, pool: Sequence[int]) -> "WitnessRequest":
        """把按池内名次写的请求映射到具体顶点"""
        return WitnessRequest(U=frozenset(int(pool[i]) for i in self.U), V=frozenset(int(pool[i]) for i in self.V))


class SatisfactionCurve(BaseModel):
    replicate: int
    request_id: str
    request: WitnessRequest
    samples: List[Tuple[int, int]] = Field(default_factory=list, description="(t, witness_count)")
    first_satisfied_t: Optional[int] = None
    predicted_proportion: Optional[float] = None


# ---------------------------------------------------------------- 快照查询

def _candidate_mask(g: GrowingGraph, req: WitnessRequest) -> np.ndarray:
    for v in req.members:
        g._check_vertex(v)
    mask = np.ones(g.t + 1, dtype=bool)
    if req.U:
        mask &= g.adjacency_rows(sorted(req.U)).all(axis=1)
    if req.V:
        mask &= ~g.adjacency_rows(sorted(req.V)).any(axis=1)
    if req.members:
        mask[sorted(req.members)] = False
    return mask


def find_witness(g: GrowingGraph, req: WitnessRequest) -> Optional[int]:
    """最小的见证顶点 w ∉ U ∪ V, 没有则返回 None"""
    hits = np.flatnonzero(_candidate_mask(g, req))
    return int(hits[0]) if hits.size else None


def witness_count(g: GrowingGraph, req: WitnessRequest) -> int:
    """编号大于 max(U ∪ V) 的见证顶点个数"""
    mask = _candidate_mask(g, req)
    return int(np.count_nonzero(mask[req.floor + 1:]))


# ---------------------------------------------------------------- 请求生成

def request_pool(g: GrowingGraph, pool_size: int = settings.REQUEST_POOL_SIZE) -> List[int]:
    """最早的 pool_size 个标准顶点"""
    return [int(u) for u in g.standard_vertices()[:pool_size]]


def enumerate_requests(pool: Sequence[int], max_u: int, max_v: int) -> List[WitnessRequest]:
    """pool 上所有 |U| <= max_u, |V| <= max_v 且不同时为空的不相交请求 (确定顺序)"""
    pool = list(pool)
    requests = []
    for nu in range(0, max_u + 1):
        for us in itertools.combinations(pool, nu):
            rest = [v for v in pool if v not in us]
            for nv in range(0, max_v + 1):
                if nu == 0 and nv == 0:
                    continue
                for vs in itertools.combinations(rest, nv):
                    requests.append(WitnessRequest(U=frozenset(us), V=frozenset(vs)))
    return requests


def generate_requests(snapshot: GrowingGraph, max_size: int, count: int, rng: np.random.Generator,
                      pool_size: int = settings.REQUEST_POOL_SIZE) -> List[WitnessRequest]:
    """在最早的 pool_size 个标准顶点上均匀抽取 count 个请求"""
    if count == 0:
        return []
    pool = request_pool(snapshot, pool_size)
    if len(pool) < 2 * max_size:
        raise RequestError(
            f"标准顶点不足: 需要 {2 * max_size} 个, 实际 {len(pool)} 个",
            needed=2 * max_size, available=len(pool),
        )
    candidates = enumerate_requests(pool, max_size, max_size)
    idx = rng.choice(len(candidates), size=count, replace=count > len(candidates))
    return [candidates[int(i)] for i in idx]


def predicted_proportion(x_hats: Sequence[float], y_hats: Sequence[float]) -> float:
    """见证比例的极限 ∏x_i · ∏(1 - y_j)"""
    return float(np.prod(np.asarray(x_hats, dtype=float)) * np.prod(1.0 - np.asarray(y_hats, dtype=float)))


def independence_check(g: GrowingGraph, u1: int, u2: int, w_from: int) -> Tuple[float, float, np.ndarray]:
    """
    w ∈ (w_from, t] 上 "与 u1 相邻" 和 "与 u2 相邻" 的 2×2 列联表卡方独立性检验

    Returns:
        (统计量, p 值, 列联表)
    """
    if w_from < max(u1, u2):
        raise RequestError("w_from 必须不小于 max(u1, u2)", w_from=w_from, u1=u1, u2=u2)
    rows = g.adjacency_rows([u1, u2])[w_from + 1:]
    a, b = rows[:, 0], rows[:, 1]
    table = np.array([
        [np.count_nonzero(a & b), np.count_nonzero(a & ~b)],
        [np.count_nonzero(~a & b), np.count_nonzero(~a & ~b)],
    ], dtype=np.int64)
    stat, p = chi2_independence_2x2(table)
    return stat, p, table


# ---------------------------------------------------------------- 满足度实验

class _ReplicateOutcome(BaseModel):
    pool: List[int]
    curves: List[SatisfactionCurve]
    pool_fractions: Dict[int, float] = Field(default_factory=dict)
    independence_p: Optional[float] = None


@log_method(method_type="experiment", level="info")
def satisfaction_experiment(config: ExperimentConfig, requests: Sequence[WitnessRequest],
                            checkpoints: Sequence[int], threads: Optional[int] = None,
                            by_rank: bool = True, stream: int = 0) -> List[SatisfactionCurve]:
    """
    每个副本运行过程并在 checkpoints 上记录每个请求的见证数

    by_rank 为真时请求里的顶点是池内名次: 每个副本在 rado.request_time 时刻取最早的
    pool_size 个标准顶点作为池, 再把请求映射到具体顶点。
    """
    outcomes = run_satisfaction(config, requests, checkpoints, threads=threads, by_rank=by_rank, stream=stream)
    return [c for o in outcomes for c in o.curves]


def run_satisfaction(config: ExperimentConfig, requests: Sequence[WitnessRequest], checkpoints: Sequence[int],
                     threads: Optional[int] = None, by_rank: bool = True, stream: int = 0,
                     independence_pair: Optional[Tuple[int, int]] = None) -> List[_ReplicateOutcome]:
    checkpoints = sorted(set(int(t) for t in checkpoints))
    if not checkpoints:
        raise RequestError("至少需要一个 checkpoint")
    cap = settings.ADJACENCY_CAP
    if checkpoints[-1] > cap or config.horizon > cap:
        raise AdjacencyCapError(max(checkpoints[-1], config.horizon), cap)
    rado = config.rado
    pick_time = rado.request_time if by_rank else None
    if pick_time is not None and pick_time > checkpoints[0]:
        raise RequestError("request_time 不能晚于第一个 checkpoint", request_time=pick_time, first=checkpoints[0])
    run_config = config.model_copy(update={
        "checkpoints": sorted(set(checkpoints) | ({pick_time} if pick_time else set())),
        "snapshot_times": [],
        "track_adjacency": True,
    })

    def _task(i: int, rng: np.random.Generator) -> _ReplicateOutcome:
        state: Dict[str, object] = {"pool": None, "bound": None}
        curves: Dict[str, SatisfactionCurve] = {}

        def _bind(g: GrowingGraph) -> None:
            pool = request_pool(g, rado.pool_size) if by_rank else sorted({v for r in requests for v in r.members})
            need = max((max(r.members) for r in requests if r.members), default=-1) if by_rank else -1
            if by_rank and len(pool) <= need:
                raise RequestError(f"副本 {i}: 标准顶点不足, 池大小 {len(pool)}", replicate=i, pool=len(pool))
            bound = [r.remap(pool) if by_rank else r for r in requests]
            g.watch(pool)
            g.release_adjacency()
            state["pool"], state["bound"] = pool, bound
            for template, concrete in zip(requests, bound):
                curves[template.request_id] = SatisfactionCurve(
                    replicate=i, request_id=template.request_id, request=concrete,
                )

        def _on_checkpoint(g: GrowingGraph) -> None:
            if state["pool"] is None:
                _bind(g)
            if g.t not in checkpoints:
                return
            for template, concrete in zip(requests, state["bound"]):
                count = witness_count(g, concrete)
                curve = curves[template.request_id]
                curve.samples.append((g.t, count))
                if count > 0 and curve.first_satisfied_t is None:
                    curve.first_satisfied_t = g.t

        trajectory = process_engine.run(run_config, rng, on_checkpoint=_on_checkpoint, keep_graph=True)
        g = trajectory.final_graph
        pool = state["pool"]
        fractions = {u: g.degree(u) / g.t for u in pool}
        for curve in curves.values():
            req = curve.request
            curve.predicted_proportion = predicted_proportion(
                [fractions[u] for u in sorted(req.U)], [fractions[v] for v in sorted(req.V)],
            )
        independence_p = None
        if independence_pair is not None and len(pool) > max(independence_pair):
            u1, u2 = pool[independence_pair[0]], pool[independence_pair[1]]
            _, independence_p, _ = independence_check(g, u1, u2, max(u1, u2, g.t // 2))
        return _ReplicateOutcome(pool=pool, curves=[curves[r.request_id] for r in requests],
                                 pool_fractions=fractions, independence_p=independence_p)

    outcomes = run_replicates(_task, config.replicates, config.master_seed, threads=threads,
                              label=f"rado λ={config.lam}", stream=stream)
    logger.info(f"满足度实验完成: {len(requests)} 个请求, {len(checkpoints)} 个 checkpoint, {config.replicates} 个副本")
    return outcomes


def aggregate_satisfaction(curves: Sequence[SatisfactionCurve]) -> List[SatisfactionRow]:
    """按 (请求, t) 汇总: 满足比例、平均见证数与 95% Wilson 区间"""
    grouped: Dict[Tuple[str, int], List[int]] = {}
    order: List[Tuple[str, int]] = []
    for curve in curves:
        for t, count in curve.samples:
            key = (curve.request_id, t)
            if key not in grouped:
                grouped[key] = []
                order.append(key)
            grouped[key].append(count)
    rows = []
    for request_id, t in sorted(order, key=lambda k: (k[0], k[1])):
        counts = grouped[(request_id, t)]
        satisfied = sum(1 for c in counts if c > 0)
        low, high = wilson_interval(satisfied, len(counts))
        rows.append(SatisfactionRow(
            request_id=request_id, t=t,
            satisfied_fraction=satisfied / len(counts),
            mean_witness_count=float(np.mean(counts)),
            ci_low=low, ci_high=high,
        ))
    return rows
