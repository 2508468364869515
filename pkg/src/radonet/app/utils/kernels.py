"""numba 内核: 增长过程与 Pólya 坛子的逐步循环"""
import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def grow_chunk(degrees, t_start, n_steps, lam, uniforms, nbr_out,
               new_degrees, max_degrees, tracked, tracked_out, cur_max):
    """
    从 G(t_start) 连续推进 n_steps 步。

    第 s 步 (t = t_start + s) 消耗 uniforms 中连续的 t+1 个数, 顶点 u 以概率
    lam * d_u(t) / t 与新顶点 t+1 相连。新顶点的邻居按顺序写入 nbr_out。
    返回写入 nbr_out 的总数。
    """
    pos = 0
    write = 0
    for s in range(n_steps):
        t = t_start + s
        start = write
        for u in range(t + 1):
            p = lam * degrees[u] / t
            if uniforms[pos] < p:
                nbr_out[write] = u
                write += 1
            pos += 1
        # 本步抽样结束后再更新度数
        for i in range(start, write):
            v = nbr_out[i]
            degrees[v] += 1
            if degrees[v] > cur_max:
                cur_max = degrees[v]
        k = write - start
        degrees[t + 1] = k
        if k > cur_max:
            cur_max = k
        new_degrees[s] = k
        max_degrees[s] = cur_max
        for j in range(tracked.shape[0]):
            v = tracked[j]
            if v <= t + 1:
                tracked_out[s, j] = degrees[v]
            else:
                tracked_out[s, j] = -1
    return write


@njit(cache=True, nogil=True)
def urn_chunk(black, t, uniforms, path_out):
    """
    Pólya 坛子推进 len(uniforms) 步, 第 i 步以 black/t 的概率加黑球。
    path_out 非空时记录每步之后的黑球数。返回最终黑球数。
    """
    record = path_out.shape[0] > 0
    for i in range(uniforms.shape[0]):
        if uniforms[i] < black / t:
            black += 1
        t += 1
        if record:
            path_out[i] = black
    return black


def draws_for_steps(t_start: int, n_steps: int) -> int:
    """从 t_start 起推进 n_steps 步需要的均匀随机数个数: sum_{t}(t+1)"""
    t_end = t_start + n_steps
    return (t_end * (t_end + 1) - t_start * (t_start + 1)) // 2


def steps_within_budget(t_start: int, max_steps: int, budget: int) -> int:
    """在随机数预算内最多能推进的步数 (至少 1 步)"""
    # 解 (t+n)(t+n+1)/2 - t(t+1)/2 <= budget
    base = t_start * (t_start + 1) + 2 * budget
    n = int((np.sqrt(1.0 + 4.0 * base) - 1.0) / 2.0) - t_start
    while n > 0 and draws_for_steps(t_start, n) > budget:
        n -= 1
    return max(1, min(max_steps, n))
