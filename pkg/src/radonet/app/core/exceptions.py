"""
异常定义模块

所有领域错误都继承自 RadonetError，携带 message / code / details 三要素，
CLI 层据此映射进程退出码。
"""
from typing import Any, Dict, Optional


class RadonetError(Exception):
    """radonet 错误基类"""

    exit_code: int = 1

    def __init__(self, message: str, code: str = "RADONET_ERROR", details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.code = code
        self.details = details or {}
        super().__init__(message)


# --- 图结构校验 ---

class GraphValidationError(RadonetError):
    """种子图或加点操作不合法"""

    def __init__(self, message: str, code: str = "GRAPH_INVALID", details: Optional[Dict[str, Any]] = None):
        super().__init__(message, code=code, details=details)


class SelfLoopError(GraphValidationError):
    def __init__(self, vertex: int):
        super().__init__(f"不允许自环: ({vertex}, {vertex})", code="SELF_LOOP", details={"vertex": vertex})


class DuplicateEdgeError(GraphValidationError):
    def __init__(self, u: int, v: int):
        super().__init__(f"重复的边: ({u}, {v})", code="DUPLICATE_EDGE", details={"edge": [u, v]})


class VertexRangeError(GraphValidationError):
    def __init__(self, vertex: int, upper: int):
        super().__init__(
            f"顶点 {vertex} 超出范围 [0, {upper}]",
            code="VERTEX_OUT_OF_RANGE",
            details={"vertex": vertex, "upper": upper},
        )


class TooFewVerticesError(GraphValidationError):
    def __init__(self, n_vertices: int):
        super().__init__(
            f"种子图至少需要 2 个顶点, 实际 {n_vertices}",
            code="TOO_FEW_VERTICES",
            details={"n_vertices": n_vertices},
        )


class DuplicateNeighborError(GraphValidationError):
    def __init__(self, vertex: int):
        super().__init__(f"邻居列表中顶点 {vertex} 重复", code="DUPLICATE_NEIGHBOR", details={"vertex": vertex})


# --- 邻接表 / 资源限制 ---

class AdjacencyDisabledError(RadonetError):
    def __init__(self, operation: str):
        super().__init__(
            f"{operation} 需要邻接表, 但当前图只记录度数",
            code="ADJACENCY_DISABLED",
            details={"operation": operation},
        )


class AdjacencyCapError(RadonetError):
    def __init__(self, t: int, cap: int):
        super().__init__(
            f"邻接表模式的时间 {t} 超过上限 {cap}",
            code="ADJACENCY_CAP_EXCEEDED",
            details={"t": t, "cap": cap},
        )


class EnumerationGuardError(RadonetError):
    def __init__(self, t: int, guard: int):
        super().__init__(
            f"精确枚举要求 t <= {guard}, 实际 t = {t}",
            code="ENUMERATION_GUARD",
            details={"t": t, "guard": guard},
        )


# --- 参数 / 输入 ---

class ParameterDomainError(RadonetError):
    """参数不在定义域内"""

    def __init__(self, message: str, **details: Any):
        super().__init__(message, code="PARAMETER_DOMAIN", details=details)


class UntrackedVertexError(RadonetError):
    def __init__(self, vertex: int):
        super().__init__(f"轨迹中没有跟踪顶点 {vertex}", code="UNTRACKED_VERTEX", details={"vertex": vertex})


class RequestError(RadonetError):
    """见证请求不合法"""

    def __init__(self, message: str, **details: Any):
        super().__init__(message, code="REQUEST_INVALID", details=details)


class EmptySampleError(RadonetError):
    def __init__(self, what: str = "sample"):
        super().__init__(f"{what} 为空", code="EMPTY_SAMPLE", details={"what": what})


# --- CLI 层 ---

class ConfigError(RadonetError):
    """配置文件错误, 消息中带行号"""

    exit_code = 1

    def __init__(self, message: str, line: Optional[int] = None, **details: Any):
        self.line = line
        prefix = f"line {line}: " if line is not None else ""
        super().__init__(prefix + message, code="CONFIG_ERROR", details={"line": line, **details})


class ArtifactIOError(RadonetError):
    exit_code = 3

    def __init__(self, path: str, reason: str):
        super().__init__(f"写入/读取 {path} 失败: {reason}", code="ARTIFACT_IO", details={"path": path})
