# src/radonet/app/constants/graph_types.py

from enum import Enum


class VertexClass(str, Enum):
    """顶点分类"""
    STANDARD = "Standard"
    ISOLATED = "Isolated"      # 度为 0, 之后永远为 0
    UNIVERSAL = "Universal"    # 度为 t, λ=1 时之后永远为 t

    @property
    def code(self) -> int:
        return _CLASS_CODES[self]

    @classmethod
    def from_code(cls, code: int) -> "VertexClass":
        return _CODE_CLASSES[int(code)]


_CLASS_CODES = {VertexClass.STANDARD: 0, VertexClass.ISOLATED: 1, VertexClass.UNIVERSAL: 2}
_CODE_CLASSES = {v: k for k, v in _CLASS_CODES.items()}


class Colour(str, Enum):
    """边的颜色: 黑边是过程产生的边, 白边是补图的边"""
    BLACK = "black"
    WHITE = "white"


class ExperimentType(str, Enum):
    """实验选择器, 与 CLI 子命令一一对应"""
    SIMULATE = "simulate"
    URN = "urn"
    ORACLE_CHECK = "oracle-check"
    TAILS = "tails"
    RADO = "rado"
    LAMBDA_SWEEP = "lambda-sweep"
    SYMMETRY = "symmetry"
    CENSUS = "census"
