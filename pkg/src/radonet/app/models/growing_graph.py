"""
增长图模型 G(t)

顶点为稠密整数 0..t, 不删除顶点或边。度数数组总是存在; 邻接信息可选, 以
"出生邻居表" 的 CSR 形式保存: 顶点 w 的表是它出生时 (或种子图中) 连到的、
编号小于 w 的邻居, 升序排列。
"""
from typing import Dict, Iterable, List, Optional, Sequence, Set, Tuple

import numpy as np

from radonet.app.constants.graph_types import VertexClass
from radonet.app.core.config import settings
from radonet.app.core.exceptions import (
    AdjacencyCapError,
    AdjacencyDisabledError,
    DuplicateEdgeError,
    DuplicateNeighborError,
    ParameterDomainError,
    SelfLoopError,
    TooFewVerticesError,
    VertexRangeError,
)

_STANDARD = VertexClass.STANDARD.code
_ISOLATED = VertexClass.ISOLATED.code
_UNIVERSAL = VertexClass.UNIVERSAL.code


class GrowingGraph:
    """当前状态 G(t): 度数、边数、顶点分类, 以及可选的邻接表"""

    def __init__(self, n_vertices: int, birth_lists: Sequence[np.ndarray],
                 track_adjacency: bool = True, adjacency_cap: Optional[int] = None):
        self.t = n_vertices - 1
        self.track_adjacency = track_adjacency
        self.adjacency_cap = settings.ADJACENCY_CAP if adjacency_cap is None else adjacency_cap

        capacity = max(16, n_vertices * 2)
        self._degrees = np.zeros(capacity, dtype=np.int64)
        self._classes = np.zeros(capacity, dtype=np.int8)

        for w, earlier in enumerate(birth_lists):
            self._degrees[w] += len(earlier)
            if len(earlier):
                np.add.at(self._degrees, earlier, 1)
        self.edge_count = int(sum(len(earlier) for earlier in birth_lists))

        if track_adjacency:
            if self.t > self.adjacency_cap:
                raise AdjacencyCapError(self.t, self.adjacency_cap)
            lengths = np.array([len(earlier) for earlier in birth_lists], dtype=np.int64)
            self._offsets = np.zeros(capacity + 1, dtype=np.int64)
            self._offsets[1:n_vertices + 1] = np.cumsum(lengths)
            flat = np.concatenate([np.asarray(e, dtype=np.int32) for e in birth_lists]) if self.edge_count else np.zeros(0, dtype=np.int32)
            self._flat = np.zeros(max(64, 2 * len(flat)), dtype=np.int32)
            self._flat[:len(flat)] = flat
        else:
            self._offsets = None
            self._flat = None
        self._owner_cache: Optional[np.ndarray] = None

        self._universal: Set[int] = set()
        self._refresh_all_classes()

        # 监视顶点: 行 w 第 j 列表示 w 与第 j 个监视顶点相邻
        self._watched: List[int] = []
        self._watch_lookup: Optional[np.ndarray] = None
        self._watch_rows: Optional[np.ndarray] = None

    # ------------------------------------------------------------------ 属性

    @property
    def n_vertices(self) -> int:
        return self.t + 1

    @property
    def degrees(self) -> np.ndarray:
        """黑度数 d_u(t) (只读视图)"""
        view = self._degrees[: self.t + 1]
        view.flags.writeable = False
        return view

    @property
    def class_codes(self) -> np.ndarray:
        view = self._classes[: self.t + 1]
        view.flags.writeable = False
        return view

    @property
    def classification(self) -> List[VertexClass]:
        return [VertexClass.from_code(c) for c in self._classes[: self.t + 1]]

    @property
    def universal_vertices(self) -> List[int]:
        return sorted(self._universal)

    def standard_vertices(self) -> np.ndarray:
        return np.flatnonzero(self._classes[: self.t + 1] == _STANDARD)

    def count_class(self, vertex_class: VertexClass) -> int:
        return int(np.count_nonzero(self._classes[: self.t + 1] == vertex_class.code))

    def is_complete(self) -> bool:
        return self.edge_count == self.t * (self.t + 1) // 2

    def is_edgeless(self) -> bool:
        return self.edge_count == 0

    # ------------------------------------------------------------------ 查询

    def _check_vertex(self, u: int) -> int:
        u = int(u)
        if u < 0 or u > self.t:
            raise VertexRangeError(u, self.t)
        return u

    def degree(self, u: int) -> int:
        return int(self._degrees[self._check_vertex(u)])

    def white_degree(self, u: int) -> int:
        """白度数 d^w_u(t) = t - d^b_u(t)"""
        return self.t - self.degree(u)

    def classify_vertex(self, u: int) -> VertexClass:
        return VertexClass.from_code(self._classes[self._check_vertex(u)])

    def attach_probability(self, u: int, lam: float = 1.0) -> float:
        """新顶点 t+1 与 u 相连的概率 λ·d_u(t)/t"""
        check_lambda(lam)
        d = self.degree(u)
        if d == 0:
            return 0.0
        if d == self.t:
            return float(lam)
        return lam * d / self.t

    def _require_adjacency(self, operation: str) -> None:
        if not self.track_adjacency:
            raise AdjacencyDisabledError(operation)

    def earlier_neighbors(self, w: int) -> np.ndarray:
        """w 的出生邻居表 (编号小于 w 的邻居, 升序)"""
        self._require_adjacency("earlier_neighbors")
        w = self._check_vertex(w)
        return self._flat[self._offsets[w]: self._offsets[w + 1]]

    def _owners(self) -> np.ndarray:
        """flat 中每个条目所属的顶点 (缓存到下一次增长)"""
        n_entries = int(self._offsets[self.t + 1])
        if self._owner_cache is None or len(self._owner_cache) != n_entries:
            lengths = np.diff(self._offsets[: self.t + 2])
            self._owner_cache = np.repeat(np.arange(self.t + 1, dtype=np.int64), lengths)
        return self._owner_cache

    def adjacency_mask(self, v: int) -> np.ndarray:
        """长度 t+1 的布尔数组, 第 w 位表示 w 与 v 相邻"""
        self._require_adjacency("adjacency_mask")
        v = self._check_vertex(v)
        mask = np.zeros(self.t + 1, dtype=bool)
        mask[self.earlier_neighbors(v)] = True
        n_entries = int(self._offsets[self.t + 1])
        later = self._owners()[self._flat[:n_entries] == v]
        mask[later] = True
        return mask

    def neighbors(self, u: int) -> np.ndarray:
        return np.flatnonzero(self.adjacency_mask(u))

    def is_adjacent(self, u: int, v: int) -> bool:
        self._require_adjacency("is_adjacent")
        u, v = self._check_vertex(u), self._check_vertex(v)
        if u == v:
            return False
        lo, hi = (u, v) if u < v else (v, u)
        earlier = self.earlier_neighbors(hi)
        i = int(np.searchsorted(earlier, lo))
        return i < len(earlier) and int(earlier[i]) == lo

    def edges(self) -> np.ndarray:
        """全部黑边, 形状 (E, 2), 每行 u < v, 按字典序排列"""
        self._require_adjacency("edges")
        n_entries = int(self._offsets[self.t + 1])
        lo = self._flat[:n_entries].astype(np.int64)
        hi = self._owners()
        order = np.lexsort((hi, lo))
        return np.stack([lo[order], hi[order]], axis=1)

    def birth_lists(self) -> List[np.ndarray]:
        self._require_adjacency("birth_lists")
        return [self.earlier_neighbors(w).copy() for w in range(self.t + 1)]

    # ------------------------------------------------------------------ 监视顶点

    def watch(self, vertices: Iterable[int]) -> None:
        """登记监视顶点, 之后每个新顶点与它们的相邻关系增量记录"""
        self._require_adjacency("watch")
        new = [self._check_vertex(v) for v in vertices if int(v) not in self._watched]
        if not new:
            return
        self._watched.extend(new)
        self._watch_lookup = np.full(max(self._watched) + 1, -1, dtype=np.int64)
        self._watch_lookup[self._watched] = np.arange(len(self._watched))
        rows = np.zeros((len(self._degrees), len(self._watched)), dtype=bool)
        if self._watch_rows is not None:
            rows[: self._watch_rows.shape[0], : self._watch_rows.shape[1]] = self._watch_rows
        for v in new:
            rows[: self.t + 1, self._watch_lookup[v]] = self.adjacency_mask(v)
        self._watch_rows = rows

    @property
    def watched(self) -> List[int]:
        return list(self._watched)

    def release_adjacency(self) -> None:
        """丢弃邻接表, 只保留度数和监视顶点的行; 之后内存为 O(t·k)"""
        self.track_adjacency = False
        self._offsets = None
        self._flat = None
        self._owner_cache = None

    def adjacency_rows(self, vertices: Sequence[int]) -> np.ndarray:
        """形状 (t+1, k) 的布尔矩阵, 第 j 列为与 vertices[j] 的相邻关系"""
        vertices = [self._check_vertex(v) for v in vertices]
        if self._watch_rows is not None and all(v in self._watched for v in vertices):
            cols = [int(self._watch_lookup[v]) for v in vertices]
            return self._watch_rows[: self.t + 1, cols]
        if not vertices:
            return np.zeros((self.t + 1, 0), dtype=bool)
        return np.stack([self.adjacency_mask(v) for v in vertices], axis=1)

    # ------------------------------------------------------------------ 增长

    def _ensure_capacity(self, n_vertices: int) -> None:
        capacity = len(self._degrees)
        if n_vertices <= capacity:
            return
        new_capacity = max(n_vertices, capacity * 2)
        self._degrees = _grow(self._degrees, new_capacity)
        self._classes = _grow(self._classes, new_capacity)
        if self._offsets is not None:
            self._offsets = _grow(self._offsets, new_capacity + 1)
        if self._watch_rows is not None:
            rows = np.zeros((new_capacity, self._watch_rows.shape[1]), dtype=bool)
            rows[: self._watch_rows.shape[0]] = self._watch_rows
            self._watch_rows = rows

    def _ensure_flat(self, n_entries: int) -> None:
        if n_entries > len(self._flat):
            self._flat = _grow(self._flat, max(n_entries, len(self._flat) * 2))

    def reserve(self, horizon: int) -> np.ndarray:
        """保证度数数组能容纳 G(horizon), 返回可写的度数缓冲区 (供 kernel 原地更新)"""
        if self.track_adjacency and horizon > self.adjacency_cap:
            raise AdjacencyCapError(horizon, self.adjacency_cap)
        self._ensure_capacity(horizon + 1)
        return self._degrees

    def add_vertex(self, neighbors: Iterable[int]) -> "GrowingGraph":
        """加入新顶点 t+1, 与 neighbors 中的顶点相连"""
        nbrs = [int(v) for v in neighbors]
        seen: Set[int] = set()
        for v in nbrs:
            if v < 0 or v > self.t:
                raise VertexRangeError(v, self.t)
            if v in seen:
                raise DuplicateNeighborError(v)
            seen.add(v)
        arr = np.array(sorted(nbrs), dtype=np.int64)
        self.reserve(self.t + 1)
        if len(arr):
            self._degrees[arr] += 1
        self._degrees[self.t + 1] = len(arr)
        self.commit_steps(np.array([len(arr)], dtype=np.int64), arr.astype(np.int32))
        # 手工加点可以让孤立顶点获得邻居, 过程本身不会
        for v in arr:
            if self._classes[v] == _ISOLATED:
                self._classes[v] = _UNIVERSAL if self._degrees[v] == self.t else _STANDARD
                if self._classes[v] == _UNIVERSAL:
                    self._universal.add(int(v))
        return self

    def commit_steps(self, new_degrees: np.ndarray, nbr_flat: np.ndarray) -> None:
        """
        登记已经写入度数缓冲区的若干步: 推进 t、边数、分类和邻接表。

        调用前度数缓冲区必须已包含这些步之后的度数 (kernel 原地更新)。
        """
        n_steps = len(new_degrees)
        if n_steps == 0:
            return
        t_before = self.t
        t_after = t_before + n_steps
        self._ensure_capacity(t_after + 1)
        births = np.arange(t_before + 1, t_after + 1)

        self.t = t_after
        self.edge_count += int(new_degrees.sum())

        # 新顶点的分类按出生时刻计算, 之后再统一复核全连接顶点
        codes = np.full(n_steps, _STANDARD, dtype=np.int8)
        codes[new_degrees == 0] = _ISOLATED
        codes[new_degrees == births] = _UNIVERSAL
        self._classes[t_before + 1: t_after + 1] = codes
        self._universal.update(int(b) for b in births[codes == _UNIVERSAL])
        lost = [u for u in self._universal if self._degrees[u] != self.t]
        for u in lost:
            self._universal.discard(u)
            self._classes[u] = _STANDARD

        if self.track_adjacency:
            start = int(self._offsets[t_before + 1])
            total = start + len(nbr_flat)
            self._ensure_flat(total)
            self._flat[start:total] = nbr_flat
            self._offsets[t_before + 2: t_after + 2] = start + np.cumsum(new_degrees)
            self._owner_cache = None
        if self._watch_rows is not None and len(nbr_flat):
            owners = np.repeat(births, new_degrees)
            in_range = nbr_flat < len(self._watch_lookup)
            cols = np.full(len(nbr_flat), -1, dtype=np.int64)
            cols[in_range] = self._watch_lookup[nbr_flat[in_range]]
            hit = cols >= 0
            self._watch_rows[owners[hit], cols[hit]] = True

    def _refresh_all_classes(self) -> None:
        d = self._degrees[: self.t + 1]
        codes = np.full(self.t + 1, _STANDARD, dtype=np.int8)
        codes[d == 0] = _ISOLATED
        codes[d == self.t] = _UNIVERSAL
        self._classes[: self.t + 1] = codes
        self._universal = set(int(u) for u in np.flatnonzero(codes == _UNIVERSAL))

    # ------------------------------------------------------------------ 其它

    def copy(self) -> "GrowingGraph":
        clone = GrowingGraph.__new__(GrowingGraph)
        clone.__dict__.update(self.__dict__)
        clone._degrees = self._degrees.copy()
        clone._classes = self._classes.copy()
        clone._offsets = None if self._offsets is None else self._offsets.copy()
        clone._flat = None if self._flat is None else self._flat.copy()
        clone._owner_cache = None
        clone._universal = set(self._universal)
        clone._watched = list(self._watched)
        clone._watch_lookup = None if self._watch_lookup is None else self._watch_lookup.copy()
        clone._watch_rows = None if self._watch_rows is None else self._watch_rows.copy()
        return clone

    def check_invariants(self) -> None:
        """校验度数和、度数范围、分类一致性以及邻接表长度"""
        d = self._degrees[: self.t + 1]
        assert int(d.sum()) == 2 * self.edge_count, "度数和 != 2E"
        assert int(d.min()) >= 0 and int(d.max()) <= self.t, "度数越界"
        expected = np.full(self.t + 1, _STANDARD, dtype=np.int8)
        expected[d == 0] = _ISOLATED
        expected[d == self.t] = _UNIVERSAL
        assert np.array_equal(expected, self._classes[: self.t + 1]), "分类与度数不一致"
        assert not (np.any(expected == _ISOLATED) and np.any(expected == _UNIVERSAL)), "同时存在孤立与全连接顶点"
        if self.track_adjacency:
            n_entries = int(self._offsets[self.t + 1])
            lengths = np.diff(self._offsets[: self.t + 2])
            counted = lengths + np.bincount(self._flat[:n_entries], minlength=self.t + 1)[: self.t + 1]
            assert np.array_equal(counted, d), "邻接表长度与度数不一致"

    def __repr__(self) -> str:
        mode = "adjacency" if self.track_adjacency else "degree-only"
        return f"GrowingGraph(t={self.t}, E={self.edge_count}, mode={mode})"


def _grow(arr: np.ndarray, size: int) -> np.ndarray:
    out = np.zeros(size, dtype=arr.dtype)
    out[: len(arr)] = arr
    return out


def check_lambda(lam: float) -> float:
    if not (0.0 < float(lam) <= 1.0):
        raise ParameterDomainError(f"λ 必须在 (0, 1] 内, 实际 {lam}", lam=lam)
    return float(lam)


# ---------------------------------------------------------------------- 操作


def new_seed(edge_list: Iterable[Tuple[int, int]], n_vertices: int,
             track_adjacency: bool = True, adjacency_cap: Optional[int] = None) -> GrowingGraph:
    """由边列表构造种子图 G(t), t = n_vertices - 1"""
    n_vertices = int(n_vertices)
    if n_vertices < 2:
        raise TooFewVerticesError(n_vertices)
    earlier: List[List[int]] = [[] for _ in range(n_vertices)]
    seen: Set[Tuple[int, int]] = set()
    for u, v in edge_list:
        u, v = int(u), int(v)
        for x in (u, v):
            if x < 0 or x >= n_vertices:
                raise VertexRangeError(x, n_vertices - 1)
        if u == v:
            raise SelfLoopError(u)
        key = (u, v) if u < v else (v, u)
        if key in seen:
            raise DuplicateEdgeError(*key)
        seen.add(key)
        earlier[key[1]].append(key[0])
    birth = [np.array(sorted(e), dtype=np.int32) for e in earlier]
    return GrowingGraph(n_vertices, birth, track_adjacency=track_adjacency, adjacency_cap=adjacency_cap)


def white_degree(g: GrowingGraph, u: int) -> int:
    return g.white_degree(u)


def attach_probability(g: GrowingGraph, u: int, lam: float = 1.0) -> float:
    return g.attach_probability(u, lam)


def classify_vertex(g: GrowingGraph, u: int) -> VertexClass:
    return g.classify_vertex(u)


def add_vertex(g: GrowingGraph, neighbors: Iterable[int]) -> GrowingGraph:
    return g.add_vertex(neighbors)


def complement(g: GrowingGraph) -> GrowingGraph:
    """补图 (白图): 同一顶点集, 边恰为 g 的非边"""
    g._require_adjacency("complement")
    birth = []
    for w in range(g.t + 1):
        birth.append(np.setdiff1d(np.arange(w, dtype=np.int32), g.earlier_neighbors(w)).astype(np.int32))
    return GrowingGraph(g.t + 1, birth, track_adjacency=True, adjacency_cap=g.adjacency_cap)


# ---------------------------------------------------------------------- 预置种子

PRESET_SEEDS: Dict[str, Tuple[List[Tuple[int, int]], int]] = {
    "P3": ([(0, 1), (1, 2)], 3),
    "K3": ([(0, 1), (0, 2), (1, 2)], 3),
    "E3": ([], 3),
    "C4": ([(0, 1), (1, 2), (2, 3), (0, 3)], 4),
    "P4": ([(0, 1), (1, 2), (2, 3)], 4),
}


def star_edges(t0: int, degree: int) -> List[Tuple[int, int]]:
    """顶点 0 连 1..degree, 其余顶点串成一条路; 共 t0+1 个顶点"""
    if not (1 <= degree < t0):
        raise ParameterDomainError(f"star 种子要求 1 <= degree < t0, 实际 degree={degree}, t0={t0}", degree=degree, t0=t0)
    edges = [(0, i) for i in range(1, degree + 1)]
    edges += [(i, i + 1) for i in range(1, t0)]
    return edges


def preset_seed(name: str, track_adjacency: bool = True, **kwargs) -> GrowingGraph:
    """按名字构造预置种子: P3 / K3 / E3 / C4 / P4 / star"""
    if name == "star":
        t0 = int(kwargs.get("t0", 32))
        degree = int(kwargs.get("degree", 16))
        return new_seed(star_edges(t0, degree), t0 + 1, track_adjacency=track_adjacency)
    if name not in PRESET_SEEDS:
        raise ParameterDomainError(f"未知的预置种子: {name}", name=name)
    edges, n = PRESET_SEEDS[name]
    return new_seed(edges, n, track_adjacency=track_adjacency)
