"""
可复现随机数流

所有随机流都是 numpy 的 Philox 计数器型生成器。
副本 i 的流由 mix(master, i) 派生:

    mix(master, i, stream=0) = SeedSequence(entropy=master, spawn_key=(i, stream))

派生只依赖 (master, i, stream), 与线程调度无关。
"""
from typing import Optional

import numpy as np

MASTER_SEED_MASK = (1 << 64) - 1


def mix(master: int, index: int, stream: int = 0) -> np.random.SeedSequence:
    """由主种子与副本编号派生子种子序列"""
    return np.random.SeedSequence(entropy=int(master) & MASTER_SEED_MASK, spawn_key=(int(index), int(stream)))


def make_rng(master: int, index: int = 0, stream: int = 0) -> np.random.Generator:
    """副本 index 的第 stream 条随机流"""
    return np.random.Generator(np.random.Philox(mix(master, index, stream)))


def seeded_rng(seed: Optional[int] = None) -> np.random.Generator:
    """单条流 (测试与交互使用)"""
    if seed is None:
        return np.random.Generator(np.random.Philox())
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed) & MASTER_SEED_MASK)))
