# src/radonet/app/tasks/replicates.py

"""
副本调度

每个副本在线程池中独立运行, 随机流由 mix(master, i) 派生, 结果按副本编号排序后
返回, 与调度顺序无关。内层循环是 nogil 的 numba 内核, 多线程可以并行。
"""
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Dict, List, Optional, TypeVar

import numpy as np
from tqdm import tqdm

from radonet.app.core.config import settings
from radonet.app.core.context import run_ctx
from radonet.app.core.logger import logger
from radonet.app.utils.rng import make_rng

R = TypeVar("R")

# 是否显示进度条 (CLI 的 --quiet 关闭)
_progress_enabled = True


def set_progress(enabled: bool) -> None:
    global _progress_enabled
    _progress_enabled = enabled


def resolve_threads(threads: Optional[int]) -> int:
    if threads is None or threads < 1:
        return max(1, settings.DEFAULT_THREADS)
    return threads


def run_replicates(task: Callable[[int, np.random.Generator], R], n_replicates: int, master_seed: int,
                   threads: Optional[int] = None, label: str = "replicates", stream: int = 0) -> List[R]:
    """
    并行运行 n_replicates 个副本

    Args:
        task: task(i, rng) -> 结果, rng 是副本 i 的第 stream 条随机流
        n_replicates: 副本数
        master_seed: 主种子
        threads: 线程数, 为空时使用 DEFAULT_THREADS
        label: 进度条与日志的标签
        stream: 随机流编号, 同一实验中不同子任务使用不同编号

    Returns:
        按副本编号排序的结果列表
    """
    threads = resolve_threads(threads)
    parent_ctx = run_ctx.get_context()
    start_time = time.time()

    def _one(i: int) -> R:
        run_ctx.set_context({**parent_ctx, "replicate": i})
        try:
            return task(i, make_rng(master_seed, i, stream))
        finally:
            run_ctx.set_context(parent_ctx)

    results: Dict[int, R] = {}
    show = _progress_enabled and sys.stderr.isatty()
    with tqdm(total=n_replicates, desc=label, disable=not show, file=sys.stderr, leave=False) as bar:
        if threads == 1:
            for i in range(n_replicates):
                results[i] = _one(i)
                bar.update(1)
        else:
            with ThreadPoolExecutor(max_workers=threads, thread_name_prefix="replicate") as pool:
                futures = {pool.submit(_one, i): i for i in range(n_replicates)}
                for future in as_completed(futures):
                    i = futures[future]
                    try:
                        results[i] = future.result()
                    except Exception:
                        logger.error(f"{label}: 副本 {i} 失败", exc_info=True)
                        for f in futures:
                            f.cancel()
                        raise
                    bar.update(1)

    duration = time.time() - start_time
    logger.info(f"{label}: {n_replicates} 个副本完成, 线程数 {threads}, 耗时 {duration:.2f}s")
    return [results[i] for i in range(n_replicates)]
