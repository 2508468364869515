"""
单个顶点的 Pólya 坛子模型

顶点 u 的黑边、白边看作坛中的黑球、白球: 每一步以 黑/t 的概率加一个黑球,
否则加一个白球。黑球比例收敛到 Beta(黑, 白) 分布的极限。
"""
import math
from fractions import Fraction
from typing import Callable, Optional

import numpy as np
from pydantic import BaseModel, Field, model_validator

from radonet.app.core.config import settings
from radonet.app.core.exceptions import ParameterDomainError, RadonetError
from radonet.app.models.growing_graph import GrowingGraph
from radonet.app.utils.kernels import urn_chunk

BETACF_MAX_ITER = 300
BETACF_TOL = 1e-14
_TINY = 1e-300


class UrnState(BaseModel):
    """坛子状态 (黑, 白), t = 黑 + 白"""
    black: int = Field(..., ge=0)
    white: int = Field(..., ge=0)

    @property
    def t(self) -> int:
        return self.black + self.white

    @property
    def fraction(self) -> float:
        return self.black / self.t if self.t else 0.0

    @property
    def absorbing(self) -> bool:
        return self.black == 0 or self.white == 0


class BetaParams(BaseModel):
    """极限分布 Beta(a, b), a、b 取自 t0 时刻的黑/白度数"""
    a: int = Field(..., gt=0)
    b: int = Field(..., gt=0)
    t0: Optional[int] = None

    @model_validator(mode="after")
    def _matches_t0(self):
        if self.t0 is not None and self.a + self.b != self.t0:
            raise ValueError(f"a + b 必须等于 t0: {self.a} + {self.b} != {self.t0}")
        return self

    @classmethod
    def from_urn(cls, urn: UrnState) -> "BetaParams":
        if urn.absorbing:
            raise ParameterDomainError("吸收态坛子没有 Beta 极限参数", black=urn.black, white=urn.white)
        return cls(a=urn.black, b=urn.white, t0=urn.t)

    def cdf(self) -> Callable[[float], float]:
        return beta_cdf(self.a, self.b)

    @property
    def mean(self) -> float:
        return self.a / (self.a + self.b)


def urn_from_vertex(g: GrowingGraph, u: int) -> UrnState:
    """顶点 u 在 G(t) 中的坛子: 黑 = d_u(t), 白 = t - d_u(t)"""
    d = g.degree(u)
    return UrnState(black=d, white=g.t - d)


def urn_run(urn: UrnState, horizon: int, rng: np.random.Generator,
            path: Optional[np.ndarray] = None) -> UrnState:
    """
    把坛子推进到 t = horizon

    Args:
        path: 可选的输出数组, 长度为 horizon - urn.t, 写入每一步之后的黑球数
    """
    if urn.t < 1:
        raise ParameterDomainError("坛子至少要有一个球", t=urn.t)
    if horizon < urn.t:
        raise ParameterDomainError(f"horizon {horizon} 小于当前 t={urn.t}", horizon=horizon, t=urn.t)
    black, t = urn.black, urn.t
    remaining = horizon - t
    offset = 0
    empty = np.empty(0, dtype=np.int64)
    while remaining > 0:
        n = min(remaining, settings.CHUNK_DRAWS)
        uniforms = rng.random(n)
        out = path[offset: offset + n] if path is not None else empty
        black = int(urn_chunk(black, t, uniforms, out))
        t += n
        offset += n
        remaining -= n
    return UrnState(black=black, white=horizon - black)


def expected_next_fraction(urn: UrnState) -> Fraction:
    """E[黑(t+1)/(t+1) | 坛子] 的精确值, 应等于 黑/t"""
    t = urn.t
    p = Fraction(urn.black, t)
    return p * Fraction(urn.black + 1, t + 1) + (1 - p) * Fraction(urn.black, t + 1)


def no_new_ball_probability(d: int, t0: int, horizon: int) -> Fraction:
    """
    度数为 d 的顶点从 t0 到 horizon 一直没有得到新黑边的精确概率

    ∏_{t=t0}^{horizon-1} (1 - d/t), 按伽马函数比值化简为 d 项的乘积。
    """
    if not (0 <= d <= t0) or t0 < 1:
        raise ParameterDomainError("要求 0 <= d <= t0 且 t0 >= 1", d=d, t0=t0)
    if horizon < t0:
        raise ParameterDomainError("horizon 不能小于 t0", horizon=horizon, t0=t0)
    result = Fraction(1)
    for j in range(d):
        result *= Fraction(t0 - d + j, horizon - d + j)
    return result


# ---------------------------------------------------------------- 正则化不完全 Beta

def _betacf(a: float, b: float, x: float) -> float:
    """不完全 Beta 的连分式部分 (modified Lentz)"""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, BETACF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < BETACF_TOL:
            return h
    raise RadonetError(
        f"不完全 Beta 连分式在 {BETACF_MAX_ITER} 次迭代内未收敛 (a={a}, b={b}, x={x})",
        code="BETACF_NO_CONVERGENCE",
        details={"a": a, "b": b, "x": x},
    )


def regularized_incomplete_beta(a: float, b: float, x: float) -> float:
    """I_x(a, b), a, b > 0, 0 <= x <= 1"""
    if not (a > 0 and b > 0):
        raise ParameterDomainError("不完全 Beta 要求 a, b > 0", a=a, b=b)
    if not (0.0 <= x <= 1.0):
        raise ParameterDomainError("不完全 Beta 要求 0 <= x <= 1", x=x)
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    log_front = (math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
                 + a * math.log(x) + b * math.log1p(-x))
    front = math.exp(log_front)
    if x < (a + 1.0) / (a + b + 2.0):
        value = front * _betacf(a, b, x) / a
    else:
        value = 1.0 - front * _betacf(b, a, 1.0 - x) / b
    return min(1.0, max(0.0, value))


def beta_cdf(a: float, b: float) -> Callable[[float], float]:
    return lambda x: regularized_incomplete_beta(a, b, min(1.0, max(0.0, x)))

