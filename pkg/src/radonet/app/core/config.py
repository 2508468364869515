# src/radonet/app/core/config.py

import os
from functools import lru_cache
from typing import Optional

from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    # 基本配置
    PROJECT_NAME: str = "radonet"
    VERSION: str = "1.0.0"
    ENVIRONMENT: str = os.getenv("ENVIRONMENT", "development")

    # 日志配置
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    LOG_TO_FILE: bool = os.getenv("LOG_TO_FILE", "false").lower() == "true"
    LOG_FILE_PATH: Optional[str] = os.getenv("LOG_FILE_PATH")

    # 模拟引擎
    ADJACENCY_CAP: int = int(os.getenv("ADJACENCY_CAP", "30000"))    # 邻接表模式允许的最大 t
    ORACLE_MAX_T: int = int(os.getenv("ORACLE_MAX_T", "12"))          # 精确枚举 oracle 的 t 上限 (2^(t+1) 个结果)
    CHUNK_DRAWS: int = int(os.getenv("CHUNK_DRAWS", str(1 << 22)))    # 每次 kernel 调用消耗的均匀随机数上限

    # 并行
    DEFAULT_THREADS: int = int(os.getenv("DEFAULT_THREADS", str(os.cpu_count() or 1)))

    # 实验默认值
    REQUEST_POOL_SIZE: int = int(os.getenv("REQUEST_POOL_SIZE", "10"))
    SIGNIFICANCE: float = float(os.getenv("SIGNIFICANCE", "0.01"))

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=True,
        extra="ignore",
    )


@lru_cache()
def get_settings() -> Settings:
    """缓存的设置获取函数"""
    return Settings()


def seed_override() -> Optional[int]:
    """读取 RADONET_SEED 环境变量 (每次调用时读取，不缓存)"""
    raw = os.getenv("RADONET_SEED")
    if raw is None or raw.strip() == "":
        return None
    return int(raw, 0)


settings = get_settings()
