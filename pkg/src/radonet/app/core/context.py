"""
运行上下文管理模块

用 contextvars 保存当前实验 / 副本 / 阶段, logger 在每条日志上自动带出这些字段。
线程池里的每个副本在自己的线程中用 run_ctx.scoped(replicate=i) 设置上下文。
"""
from contextlib import contextmanager
from contextvars import ContextVar
from typing import Any, Dict, Iterator

_run_ctx_var: ContextVar[Dict[str, Any]] = ContextVar("run_context", default={})


class RunContext:
    """运行上下文管理类"""

    @staticmethod
    def get_context() -> Dict[str, Any]:
        return _run_ctx_var.get()

    @staticmethod
    def set_context(ctx: Dict[str, Any]) -> None:
        _run_ctx_var.set(ctx)

    @staticmethod
    def get_experiment() -> str:
        return _run_ctx_var.get().get("experiment", "-")

    @staticmethod
    def get_replicate() -> str:
        replicate = _run_ctx_var.get().get("replicate")
        return "-" if replicate is None else str(replicate)

    @staticmethod
    def get_stage() -> str:
        return _run_ctx_var.get().get("stage", "-")

    @staticmethod
    @contextmanager
    def scoped(**kwargs) -> Iterator[None]:
        """临时覆盖上下文字段, 退出时恢复"""
        token = _run_ctx_var.set({**_run_ctx_var.get(), **kwargs})
        try:
            yield
        finally:
            _run_ctx_var.reset(token)


run_ctx = RunContext()
