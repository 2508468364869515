"""
统计工具

经验分布函数、Kolmogorov-Smirnov 检验、卡方尾概率、二项/泊松误差带、Wilson 区间、
尾部检验、Hoeffding 违例计数以及 log-log 斜率拟合。全部在本仓库内实现。
"""
import math
from typing import Callable, Iterable, List, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator

from radonet.app.core.exceptions import EmptySampleError, ParameterDomainError
from radonet.app.core.schemas import HoeffdingReport, TailCheckReport, TailCheckRow

Z_95 = 1.959963984540054
_KS_TERM_EPS = 1e-12
_GAMMA_EPS = 3e-16
_GAMMA_ITMAX = 500


class EcdfSample(BaseModel):
    """升序排列的样本, n >= 1"""
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    values: np.ndarray

    @field_validator("values", mode="before")
    @classmethod
    def _sorted(cls, v):
        arr = np.sort(np.asarray(v, dtype=float).ravel())
        if arr.size == 0:
            raise EmptySampleError("EcdfSample")
        return arr

    @property
    def n(self) -> int:
        return int(self.values.size)

    def __call__(self, x: float) -> float:
        return float(np.searchsorted(self.values, x, side="right")) / self.n


def ecdf(values: Iterable[float]) -> EcdfSample:
    values = np.asarray(list(values) if not isinstance(values, np.ndarray) else values, dtype=float)
    if values.size == 0:
        raise EmptySampleError("sample")
    return EcdfSample(values=values)


# ---------------------------------------------------------------- Kolmogorov-Smirnov

def ks_statistic(sample: EcdfSample, cdf: Callable[[float], float]) -> float:
    """经验分布与 cdf 的上确界距离 D_n"""
    if not isinstance(sample, EcdfSample):
        sample = ecdf(sample)
    x = sample.values
    n = sample.n
    f = np.fromiter((cdf(float(v)) for v in x), dtype=float, count=n)
    i = np.arange(1, n + 1, dtype=float)
    d_plus = np.max(i / n - f)
    d_minus = np.max(f - (i - 1) / n)
    return float(max(d_plus, d_minus, 0.0))


def kolmogorov_sf(x: float) -> float:
    """Kolmogorov 分布的生存函数 P(K > x)"""
    if x <= 0.0:
        return 1.0
    if x < 1.18:
        # 小 x 用 theta 函数的对偶级数, 交错级数在这里收敛太慢
        s = 0.0
        k = 1
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8.0 * x * x))
            s += term
            if term < _KS_TERM_EPS:
                break
            k += 1
        return float(min(1.0, max(0.0, 1.0 - math.sqrt(2.0 * math.pi) / x * s)))
    p = 0.0
    sign = 1.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        p += sign * term
        if term < _KS_TERM_EPS:
            break
        sign = -sign
        k += 1
    return float(min(1.0, max(0.0, 2.0 * p)))


def ks_p_value(d: float, n: int) -> float:
    """渐近 p 值 2Σ(-1)^{k-1} exp(-2k²nd²), 截断并裁剪到 [0, 1]"""
    if n < 1:
        raise ParameterDomainError("ks_p_value 需要 n >= 1", n=n)
    if not (0.0 <= d <= 1.0):
        raise ParameterDomainError(f"KS 距离必须在 [0, 1] 内: {d}", d=d)
    return kolmogorov_sf(d * math.sqrt(n))


def ks_test(values: Iterable[float], cdf: Callable[[float], float]) -> Tuple[float, float]:
    """单样本 KS: 返回 (D, p)"""
    sample = ecdf(values)
    d = ks_statistic(sample, cdf)
    return d, ks_p_value(d, sample.n)


def ks_two_sample(x: Iterable[float], y: Iterable[float]) -> Tuple[float, float]:
    """两样本 KS: 返回 (D, p), p 使用 (en + 0.12 + 0.11/en)·D 的修正"""
    a = np.sort(np.asarray(list(x) if not isinstance(x, np.ndarray) else x, dtype=float))
    b = np.sort(np.asarray(list(y) if not isinstance(y, np.ndarray) else y, dtype=float))
    if a.size == 0 or b.size == 0:
        raise EmptySampleError("two-sample KS")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / a.size
    cdf_b = np.searchsorted(b, pooled, side="right") / b.size
    d = float(np.max(np.abs(cdf_a - cdf_b)))
    en = math.sqrt(a.size * b.size / float(a.size + b.size))
    return d, kolmogorov_sf((en + 0.12 + 0.11 / en) * d)


# ---------------------------------------------------------------- 卡方

def _gamma_series(a: float, x: float) -> float:
    """正则化下不完全 gamma P(a, x) 的级数展开"""
    ap = a
    total = delta = 1.0 / a
    for _ in range(_GAMMA_ITMAX):
        ap += 1.0
        delta *= x / ap
        total += delta
        if abs(delta) < abs(total) * _GAMMA_EPS:
            break
    return total * math.exp(-x + a * math.log(x) - math.lgamma(a))


def _gamma_cont_fraction(a: float, x: float) -> float:
    """正则化上不完全 gamma Q(a, x) 的连分式 (modified Lentz)"""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _GAMMA_ITMAX + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _GAMMA_EPS:
            break
    return math.exp(-x + a * math.log(x) - math.lgamma(a)) * h


def chi2_sf(x: float, dof: int) -> float:
    """卡方分布的生存函数 P(χ²_dof > x)"""
    if dof < 1:
        raise ParameterDomainError("卡方自由度必须 >= 1", dof=dof)
    if x <= 0.0:
        return 1.0
    a, half = dof / 2.0, x / 2.0
    if half < a + 1.0:
        return float(min(1.0, max(0.0, 1.0 - _gamma_series(a, half))))
    return float(min(1.0, max(0.0, _gamma_cont_fraction(a, half))))


def chi2_goodness_of_fit(observed: Sequence[float], expected: Sequence[float],
                         min_expected: float = 5.0) -> Tuple[float, int, float]:
    """
    拟合优度检验, 期望频数不足 min_expected 的格子合并到一起。

    Returns:
        (统计量, 自由度, p 值)
    """
    obs = np.asarray(observed, dtype=float)
    exp = np.asarray(expected, dtype=float)
    small = exp < min_expected
    if small.any():
        obs = np.append(obs[~small], obs[small].sum())
        exp = np.append(exp[~small], exp[small].sum())
        if exp[-1] == 0.0:
            obs, exp = obs[:-1], exp[:-1]
    if exp.size < 2:
        return 0.0, 0, 1.0
    stat = float(np.sum((obs - exp) ** 2 / exp))
    dof = int(exp.size - 1)
    return stat, dof, chi2_sf(stat, dof)


def chi2_independence_2x2(table: np.ndarray) -> Tuple[float, float]:
    """2×2 列联表的独立性检验, 返回 (统计量, p 值)"""
    table = np.asarray(table, dtype=float)
    n = table.sum()
    if n == 0:
        raise EmptySampleError("contingency table")
    expected = np.outer(table.sum(axis=1), table.sum(axis=0)) / n
    if np.any(expected == 0):
        return 0.0, 1.0
    stat = float(np.sum((table - expected) ** 2 / expected))
    return stat, chi2_sf(stat, 1)


# ---------------------------------------------------------------- 误差带与区间

def binomial_margin(p: float, n: int, sigmas: float = 3.0) -> float:
    if n < 1:
        raise EmptySampleError("binomial sample")
    return sigmas * math.sqrt(max(p * (1.0 - p), 0.0) / n)


def poisson_margin(mean: float, sigmas: float = 3.0) -> float:
    return sigmas * math.sqrt(max(mean, 0.0))


def wilson_interval(successes: int, n: int, z: float = Z_95) -> Tuple[float, float]:
    """二项比例的 Wilson score 区间"""
    if n < 1:
        raise EmptySampleError("binomial sample")
    p = successes / n
    denom = 1.0 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    return max(0.0, centre - half), min(1.0, centre + half)


# ---------------------------------------------------------------- 过程专用检验

def tail_check(estimates: Sequence[float], t0: int, i_max: int = 3, scale: float = 8.0) -> TailCheckReport:
    """
    检查 P(x̂ < 2^{-i}·scale/t0) <= 2^{-i} + 3σ, i = 1..i_max

    σ 为以 2^{-i} 为成功概率的二项标准差。
    """
    est = np.asarray(estimates, dtype=float)
    if est.size == 0:
        raise EmptySampleError("estimates")
    rows: List[TailCheckRow] = []
    for i in range(1, i_max + 1):
        bound = 2.0 ** -i
        threshold = bound * scale / t0
        fraction = float(np.count_nonzero(est < threshold)) / est.size
        margin = binomial_margin(bound, est.size)
        rows.append(TailCheckRow(
            i=i, threshold=threshold, bound=bound, empirical_fraction=fraction,
            n=int(est.size), margin=margin, passed=fraction <= bound + margin,
        ))
    return TailCheckReport(t0=t0, rows=rows)


def hoeffding_check(t_new: np.ndarray, new_degree: np.ndarray, edge_count_after: np.ndarray,
                    xi: float) -> HoeffdingReport:
    """
    在满足 E(t) >= ξt² 的步上统计 d_{t+1}(t+1) = 0 的次数, 并给出 Σ e^{-ξ²t}

    参数是轨迹的列: 新顶点时间 t+1、新顶点度数、加入后的边数。
    """
    if xi <= 0:
        raise ParameterDomainError("ξ 必须为正", xi=xi)
    t_new = np.asarray(t_new, dtype=np.int64)
    new_degree = np.asarray(new_degree, dtype=np.int64)
    edges_before = np.asarray(edge_count_after, dtype=np.int64) - new_degree
    t = (t_new - 1).astype(float)
    eligible = edges_before >= xi * t * t
    zero = new_degree == 0
    violated = eligible & zero
    zero_times = t_new[zero]
    violation_times = t_new[violated]
    return HoeffdingReport(
        xi=xi,
        eligible_steps=int(np.count_nonzero(eligible)),
        violations=int(np.count_nonzero(violated)),
        bound_sum=float(np.sum(np.exp(-xi * xi * t[eligible]))),
        last_zero_birth_t=int(zero_times[-1]) if zero_times.size else None,
        last_violation_t=int(violation_times[-1]) if violation_times.size else None,
    )


def hoeffding_aggregate(reports: Sequence[HoeffdingReport], sigmas: float = 3.0) -> Tuple[int, float, bool]:
    """多个副本的违例总数与 Σ bound + 3σ 泊松误差带比较, 返回 (总数, 上限, 是否通过)"""
    total = sum(r.violations for r in reports)
    expected = sum(r.bound_sum for r in reports)
    limit = expected + poisson_margin(expected, sigmas)
    return total, limit, total <= limit


def loglog_slope(ts: Sequence[float], values: Sequence[float], t_min: float = 1.0) -> float:
    """t >= t_min 部分 log(value) 对 log(t) 的最小二乘斜率"""
    ts = np.asarray(ts, dtype=float)
    values = np.asarray(values, dtype=float)
    keep = ts >= t_min
    ts, values = ts[keep], values[keep]
    if ts.size < 2:
        raise ParameterDomainError("log-log 拟合至少需要 2 个点", points=int(ts.size))
    if np.any(values <= 0) or np.any(ts <= 0):
        raise ParameterDomainError("log-log 拟合要求 t 与 value 为正")
    lx, ly = np.log(ts), np.log(values)
    lx_c = lx - lx.mean()
    denom = float(np.dot(lx_c, lx_c))
    if denom == 0.0:
        raise ParameterDomainError("log-log 拟合需要至少两个不同的 t")
    return float(np.dot(lx_c, ly - ly.mean()) / denom)


def geometric_grid(start: int, stop: int, points: int = 60) -> np.ndarray:
    """[start, stop] 上对数均匀的整数网格 (去重)"""
    if stop <= start:
        return np.array([stop], dtype=np.int64)
    grid = np.unique(np.round(np.geomspace(start, stop, points)).astype(np.int64))
    return grid
