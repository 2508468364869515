"""
鞅观测量

X^c_u(t) = d^c_u(t)/t      单个顶点的度数比例
Y^c(t)   = E^c(t)/(t(t+1))  归一化边数

提供轨迹上的序列、极限估计、减半时刻、界参数, 以及基于单步精确分布的
有理数恒等式检查。
"""
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, computed_field

from radonet.app.constants.graph_types import Colour
from radonet.app.core.exceptions import EmptySampleError, ParameterDomainError
from radonet.app.core.schemas import HalvingProfileRow
from radonet.app.models.growing_graph import GrowingGraph, check_lambda
from radonet.app.services.business.process_engine import (
    ExactStepDistribution,
    RationalLike,
    Trajectory,
    as_fraction,
    exact_step_distribution,
)
from radonet.app.utils.stats import binomial_margin


class XSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    u: int
    colour: Colour
    ts: np.ndarray
    values: np.ndarray


class YSeries(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    colour: Colour
    ts: np.ndarray
    values: np.ndarray


class MartingaleBoundParams(BaseModel):
    """减半时刻界的参数, β = 8A/α 必须小于 1"""
    alpha: float = Field(..., gt=0)
    A: float = Field(..., gt=0)
    t1: int = Field(..., gt=3)

    @computed_field
    @property
    def beta(self) -> float:
        return 8.0 * self.A / self.alpha

    @property
    def applies(self) -> bool:
        return self.beta < 1.0


# ---------------------------------------------------------------- 轨迹上的序列

def track_x(trajectory: Trajectory, u: int, colour: Colour = Colour.BLACK) -> XSeries:
    """X^c_u(t), t 从 max(u, 种子时刻) 开始; 白色由 t - d 得到"""
    colour = Colour(colour)
    ts, ds = trajectory.degree_series(u)
    ts = ts.astype(float)
    black = ds / ts
    values = black if colour is Colour.BLACK else (ts - ds) / ts
    return XSeries(u=u, colour=colour, ts=ts.astype(np.int64), values=values)


def track_y(trajectory: Trajectory, colour: Colour = Colour.BLACK) -> YSeries:
    """Y^c(t) = E^c(t)/(t(t+1)); 白边数 E^w(t) = C(t+1, 2) - E^b(t)"""
    colour = Colour(colour)
    ts, es = trajectory.edge_series()
    denom = ts.astype(float) * (ts + 1)
    if colour is Colour.WHITE:
        es = ts * (ts + 1) // 2 - es
    return YSeries(colour=colour, ts=ts, values=es / denom)


def lambda_normalized_x(degree_series: Sequence[float], u: int, lam: float,
                        t_start: Optional[int] = None) -> np.ndarray:
    """
    d(t) / (u·∏_{j=u}^{t-1}(1 + λ/j)), degree_series[k] 对应 t = t_start + k

    t_start 默认为 u; 种子顶点的序列从种子时刻开始, 需传入 t_start。λ = 1 时归一化因子等于 t。
    """
    lam = check_lambda(lam)
    if u < 1:
        raise ParameterDomainError("λ 归一化要求 u >= 1 (u = 0 时归一化因子无定义)", u=u)
    t_start = u if t_start is None else int(t_start)
    if t_start < u:
        raise ParameterDomainError("序列起点不能早于顶点 u", u=u, t_start=t_start)
    d = np.asarray(degree_series, dtype=float)
    if d.size == 0:
        return d
    factors = 1.0 + lam / np.arange(u, t_start + d.size - 1, dtype=float)
    normalizer = u * np.concatenate([[1.0], np.cumprod(factors)])
    return d / normalizer[t_start - u:]


def lambda_normalizer_exact(u: int, t: int, lam: RationalLike) -> Fraction:
    if u < 1:
        raise ParameterDomainError("λ 归一化要求 u >= 1 (u = 0 时归一化因子无定义)", u=u)
    lam = as_fraction(lam)
    value = Fraction(u)
    for j in range(u, t):
        value *= 1 + lam / j
    return value


# ---------------------------------------------------------------- 极限估计

def halving_times(series: Sequence[float], start_index: int = 0) -> List[int]:
    """n_0 = start_index; n_{i+1} 是第一个值小于 Z(n_i)/2 的下标"""
    values = np.asarray(series, dtype=float)
    if values.size == 0:
        raise EmptySampleError("series")
    if not (0 <= start_index < values.size):
        raise ParameterDomainError("start_index 超出序列范围", start_index=start_index)
    marks = [start_index]
    current = start_index
    while True:
        later = np.flatnonzero(values[current + 1:] < 0.5 * values[current])
        if later.size == 0:
            return marks
        current = current + 1 + int(later[0])
        marks.append(current)


def estimate_limit(series: Sequence[float], tail_window: int) -> Tuple[float, float]:
    """返回 (终值, 最后 tail_window 个值的 max - min)"""
    values = np.asarray(series, dtype=float)
    if tail_window < 1 or tail_window > values.size:
        raise ParameterDomainError(f"窗口长度 {tail_window} 超出序列长度 {values.size}",
                                   tail_window=tail_window, length=int(values.size))
    tail = values[-tail_window:]
    return float(values[-1]), float(tail.max() - tail.min())


def increment_square_sum(series: Sequence[float]) -> float:
    """Σ (Z(t+1) - Z(t))²"""
    values = np.asarray(series, dtype=float)
    return float(np.sum(np.diff(values) ** 2))


def l2_bound(t0: int, horizon: int) -> float:
    """Σ_{t=t0}^{horizon-1} 1/t², X 增量平方和的期望上界"""
    if t0 < 1 or horizon < t0:
        raise ParameterDomainError("要求 1 <= t0 <= horizon", t0=t0, horizon=horizon)
    t = np.arange(t0, horizon, dtype=float)
    return float(np.sum(1.0 / (t * t)))


# ---------------------------------------------------------------- 界参数

def x_bound_params(t1: int) -> MartingaleBoundParams:
    """X 的参数: α = 16, A = 1, β = 1/2"""
    return MartingaleBoundParams(alpha=16.0, A=1.0, t1=t1)


def y_bound_params(alpha: float, t1: int) -> MartingaleBoundParams:
    """Y 的参数: A = α/16, β = 1/2"""
    return MartingaleBoundParams(alpha=alpha, A=alpha / 16.0, t1=t1)


def halving_profile(counts: Sequence[int], beta: float, i_max: int) -> List[HalvingProfileRow]:
    """P(减半次数 >= i) 与 β^i 比较, 带 3σ 二项误差带"""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.size == 0:
        raise EmptySampleError("halving counts")
    rows = []
    for i in range(1, i_max + 1):
        bound = beta ** i
        fraction = float(np.count_nonzero(counts >= i)) / counts.size
        margin = binomial_margin(bound, counts.size)
        rows.append(HalvingProfileRow(i=i, bound=bound, empirical_fraction=fraction,
                                      margin=margin, passed=fraction <= bound + margin))
    return rows


# ---------------------------------------------------------------- 精确恒等式

def _x_next(dist: ExactStepDistribution, u: int, colour: Colour) -> Callable[[frozenset], Fraction]:
    d, t = dist.degrees[u], dist.t
    if colour is Colour.BLACK:
        return lambda s: Fraction(d + (u in s), t + 1)
    return lambda s: Fraction(t - d + (u not in s), t + 1)


def _y_next(dist: ExactStepDistribution, colour: Colour) -> Callable[[frozenset], Fraction]:
    t, e = dist.t, dist.edge_count
    if colour is Colour.BLACK:
        return lambda s: Fraction(e + len(s), (t + 1) * (t + 2))
    total = (t + 1) * (t + 2) // 2
    return lambda s: Fraction(total - e - len(s), (t + 1) * (t + 2))


def x_exact(dist: ExactStepDistribution, u: int, colour: Colour = Colour.BLACK) -> Fraction:
    d = dist.degrees[u]
    return Fraction(d if colour is Colour.BLACK else dist.t - d, dist.t)


def y_exact(dist: ExactStepDistribution, colour: Colour = Colour.BLACK) -> Fraction:
    t, e = dist.t, dist.edge_count
    if colour is Colour.WHITE:
        e = t * (t + 1) // 2 - e
    return Fraction(e, t * (t + 1))


def oracle_identities(g: GrowingGraph, lam: RationalLike = 1) -> Dict[str, bool]:
    """
    在 G(t) 的单步精确分布上检查鞅恒等式与二阶矩界 (两种颜色)

    λ = 1 时检查 X、Y 的鞅性与二阶矩界; 任意 λ 检查 λ 归一化 X 的鞅性
    (跳过 u = 0)。返回 名字 -> 是否成立。
    """
    dist = exact_step_distribution(g, lam)
    lam = dist.lam
    t = dist.t
    results: Dict[str, bool] = {"probabilities_sum_to_one": dist.total() == 1}
    standard = [u for u, d in enumerate(dist.degrees) if 0 < d < t]

    if lam == 1:
        for colour in (Colour.BLACK, Colour.WHITE):
            c = colour.value
            for u in standard:
                x_now = x_exact(dist, u, colour)
                nxt = _x_next(dist, u, colour)
                results[f"x_martingale[{c},u={u}]"] = dist.expect(nxt) == x_now
                second = dist.expect(lambda s: nxt(s) ** 2) - x_now ** 2
                results[f"x_second_moment[{c},u={u}]"] = second < x_now / (t * t)
            y_now = y_exact(dist, colour)
            nxt_y = _y_next(dist, colour)
            results[f"y_martingale[{c}]"] = dist.expect(nxt_y) == y_now
            if 0 < y_now:
                second_y = dist.expect(lambda s: nxt_y(s) ** 2) - y_now ** 2
                results[f"y_second_moment[{c}]"] = second_y < Fraction(2, t ** 3) * y_now
        results["new_degree_mean"] = dist.new_degree_mean() == Fraction(2 * dist.edge_count, t)
        if dist.edge_count > 0:
            results["new_degree_variance"] = dist.new_degree_variance() < Fraction(2 * dist.edge_count, t)
    else:
        results["new_degree_mean"] = dist.new_degree_mean() == lam * Fraction(2 * dist.edge_count, t)

    for u in standard:
        if u < 1:
            continue
        now = lambda_normalizer_exact(u, t, lam)
        nxt_norm = lambda_normalizer_exact(u, t + 1, lam)
        d = dist.degrees[u]
        expected = dist.expect(lambda s, d=d: Fraction(d + (u in s)) / nxt_norm)
        results[f"lambda_x_martingale[u={u}]"] = expected == Fraction(d) / now
    return results
