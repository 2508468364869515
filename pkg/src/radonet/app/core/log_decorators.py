# core/log_decorators.py

import functools
import time
from typing import Any, Callable, TypeVar, cast

from radonet.app.core.logger import logger

F = TypeVar("F", bound=Callable[..., Any])


def log_method(method_type: str = "service", level: str = "debug") -> Callable[[F], F]:
    """
    通用方法日志装饰器, 记录调用开始/结束与耗时, 失败时记录堆栈后重新抛出

    Args:
        method_type: 方法类型标识, 例如 "service", "experiment"
        level: 成功日志的级别
    """
    def decorator(func: F) -> F:
        qualified_name = f"{func.__module__}.{func.__qualname__}"

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.time()
            logger.debug(f"[{method_type}] 调用开始: {qualified_name}", extra={"params": _format_params(args, kwargs)})
            try:
                result = func(*args, **kwargs)
            except Exception as e:
                duration = time.time() - start_time
                logger.error(
                    f"[{method_type}] 调用失败: {qualified_name}, 错误: {e}, 耗时: {duration:.2f}s",
                    extra={"duration": duration},
                    exc_info=True,
                )
                raise
            duration = time.time() - start_time
            getattr(logger, level)(
                f"[{method_type}] 调用成功: {qualified_name}, 耗时: {duration:.2f}s",
                extra={"duration": duration},
            )
            return result

        return cast(F, wrapper)

    return decorator


def _format_params(args, kwargs):
    """格式化方法参数 (截断长字符串)"""
    params = {}
    if args:
        params["args"] = [str(arg)[:100] for arg in args]
    if kwargs:
        params["kwargs"] = {key: str(value)[:100] for key, value in kwargs.items()}
    return params
