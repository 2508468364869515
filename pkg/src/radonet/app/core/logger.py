# -*- coding: utf-8 -*-
"""
日志系统模块

使用 loguru 输出彩色控制台日志, 可选写入按天轮转的文件; 每条日志自动带上
运行上下文 (实验 / 副本 / 阶段)。
"""
import sys
from pathlib import Path
from typing import Optional

from colorama import init as colorama_init
from dotenv import load_dotenv
from loguru import logger as loguru_logger

from radonet.app.core.config import settings
from radonet.app.core.context import run_ctx

colorama_init()

# 移除默认的 loguru 处理器
loguru_logger.remove()

load_dotenv()

_LOG_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<blue>{extra[experiment]}</blue> | "
    "<magenta>rep={extra[replicate]}</magenta> | "
    "<yellow>{extra[stage]}</yellow> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan> | "
    "<level>{message}</level>"
)

_file_sink_id: Optional[int] = None


def setup_logger(level: Optional[str] = None):
    """初始化并配置 logger"""
    log_level = (level or settings.LOG_LEVEL).upper()

    loguru_logger.add(
        sys.stderr,
        format=_LOG_FORMAT,
        level=log_level, colorize=True, backtrace=True, diagnose=False,
    )

    if settings.LOG_TO_FILE:
        log_dir = Path(settings.LOG_FILE_PATH) if settings.LOG_FILE_PATH else Path.cwd() / "logs"
        add_file_sink(log_dir, log_level)

    return loguru_logger.bind(experiment="-", replicate="-", stage="-")


def add_file_sink(log_dir: Path, level: str = "DEBUG") -> None:
    """追加文件处理器 (每个输出目录一个), 重复调用会替换旧的文件处理器"""
    global _file_sink_id
    log_dir.mkdir(parents=True, exist_ok=True)
    if _file_sink_id is not None:
        try:
            loguru_logger.remove(_file_sink_id)
        except ValueError:
            pass
    _file_sink_id = loguru_logger.add(
        log_dir / "radonet.log",
        format=_LOG_FORMAT,
        level=level.upper(), rotation="00:00", compression="gz", retention="30 days",
        encoding="utf-8", backtrace=True, diagnose=False, colorize=False,
    )


def set_level(level: str) -> None:
    """重建控制台处理器 (CLI 的 --log-level / --quiet 使用)"""
    loguru_logger.remove()
    setup_logger(level)


class LoggerInterface:
    """日志接口封装"""

    def __init__(self, logger_instance):
        self._logger = logger_instance

    def _prepare_extra(self, kwargs):
        """准备 extra 字典, 合并上下文信息"""
        extra = kwargs.pop("extra", {})
        final_extra = {
            "experiment": run_ctx.get_experiment(),
            "replicate": run_ctx.get_replicate(),
            "stage": run_ctx.get_stage(),
            **extra,
        }
        return final_extra, kwargs

    def _emit(self, level: str, msg, *args, **kwargs):
        extra, remaining_kwargs = self._prepare_extra(kwargs)
        exc_info = remaining_kwargs.pop("exc_info", False)
        bound = self._logger.bind(**extra)
        if exc_info:
            bound = bound.opt(exception=exc_info if not isinstance(exc_info, bool) else True)
        getattr(bound, level)(msg, *args, **remaining_kwargs)

    def debug(self, msg, *args, **kwargs):
        self._emit("debug", msg, *args, **kwargs)

    def info(self, msg, *args, **kwargs):
        self._emit("info", msg, *args, **kwargs)

    def warning(self, msg, *args, **kwargs):
        self._emit("warning", msg, *args, **kwargs)

    def error(self, msg, *args, **kwargs):
        self._emit("error", msg, *args, **kwargs)

    def critical(self, msg, *args, **kwargs):
        self._emit("critical", msg, *args, **kwargs)

    def exception(self, msg, *args, **kwargs):
        """记录带有异常堆栈的 ERROR 级别日志"""
        kwargs["exc_info"] = True
        self.error(msg, *args, **kwargs)


_base_logger = setup_logger()
logger = LoggerInterface(_base_logger)

__all__ = ["logger", "setup_logger", "add_file_sink", "set_level"]
