"""
产物读写: 快照、轨迹 CSV、序列 CSV、结果 JSON 与实验摘要

所有写入失败统一转换为 ArtifactIOError (退出码 3)。
"""
import csv
import json
import re
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from radonet.app.core.exceptions import ArtifactIOError, ConfigError
from radonet.app.core.logger import logger
from radonet.app.models.growing_graph import GrowingGraph, new_seed

SNAPSHOT_HEADER = "# radonet-snapshot t={t} n={n} lambda={lam}"
_HEADER_RE = re.compile(r"^# radonet-snapshot t=(\d+) n=(\d+) lambda=(\S+)$")


def _open_for_write(path: Path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        return open(path, "w", encoding="utf-8", newline="\n")
    except OSError as e:
        raise ArtifactIOError(str(path), str(e)) from e


# ---------------------------------------------------------------- 快照

def write_snapshot(g: GrowingGraph, path: Path, lam: float) -> Path:
    """写黑边快照: 头部一行, 之后每条边一行 "u v", u < v, 字典序"""
    path = Path(path)
    edges = g.edges()
    try:
        with _open_for_write(path) as f:
            f.write(SNAPSHOT_HEADER.format(t=g.t, n=g.t + 1, lam=repr(float(lam))) + "\n")
            for u, v in edges:
                f.write(f"{u} {v}\n")
    except OSError as e:
        raise ArtifactIOError(str(path), str(e)) from e
    logger.debug(f"快照已写入 {path}: t={g.t}, E={len(edges)}")
    return path


def read_snapshot(path: Path, track_adjacency: bool = True) -> Tuple[GrowingGraph, Dict[str, Any]]:
    """读快照, 返回 (图, 头部字段)"""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise ArtifactIOError(str(path), str(e)) from e
    if not lines:
        raise ConfigError(f"快照文件为空: {path}", line=1)
    m = _HEADER_RE.match(lines[0])
    if not m:
        raise ConfigError(f"快照头部格式错误: {lines[0]!r}", line=1)
    t, n, lam = int(m.group(1)), int(m.group(2)), float(m.group(3))
    if n != t + 1:
        raise ConfigError(f"快照头部 n={n} 与 t={t} 不一致", line=1)
    edges: List[Tuple[int, int]] = []
    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise ConfigError(f"快照边格式错误: {line!r}", line=lineno)
        edges.append((int(parts[0]), int(parts[1])))
    g = new_seed(edges, n, track_adjacency=track_adjacency)
    return g, {"t": t, "n": n, "lambda": lam}


# ---------------------------------------------------------------- CSV

def write_rows_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
                   comments: Optional[Dict[str, Any]] = None) -> Path:
    """通用 CSV 写入; comments 写成以 # 开头的元数据行"""
    path = Path(path)
    try:
        with _open_for_write(path) as f:
            for key, value in (comments or {}).items():
                f.write(f"# {key}={value}\n")
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            for row in rows:
                writer.writerow(row)
    except OSError as e:
        raise ArtifactIOError(str(path), str(e)) from e
    return path


def write_dict_rows_csv(path: Path, header: Sequence[str], rows: Iterable[Dict[str, Any]]) -> Path:
    return write_rows_csv(path, header, ([row.get(col, "") for col in header] for row in rows))


def write_trajectory_csv(trajectory, path: Path) -> Path:
    """轨迹 CSV: t,new_degree,edge_count[,d_<u> ...]"""
    header = ["t", "new_degree", "edge_count"] + [f"d_{u}" for u in trajectory.tracked]
    columns = [trajectory.t_new, trajectory.new_degree, trajectory.edge_count]

    def rows():
        for s in range(len(trajectory)):
            row = [int(c[s]) for c in columns]
            row += [int(d) if d >= 0 else "" for d in trajectory.tracked_degrees[s]]
            yield row

    return write_rows_csv(path, header, rows())


def write_series_csv(path: Path, ts: Sequence[int], values: Sequence[float], meta: Dict[str, Any]) -> Path:
    """序列 CSV: t,value, 带 # 元数据头"""
    return write_rows_csv(path, ["t", "value"], zip((int(t) for t in ts), (repr(float(v)) for v in values)), meta)


def read_series_csv(path: Path) -> Tuple[Dict[str, str], np.ndarray, np.ndarray]:
    path = Path(path)
    meta: Dict[str, str] = {}
    ts: List[int] = []
    values: List[float] = []
    try:
        with open(path, encoding="utf-8") as f:
            for line in f:
                line = line.rstrip("\n")
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    meta[key] = value
                elif line and line != "t,value":
                    t, v = line.split(",")
                    ts.append(int(t))
                    values.append(float(v))
    except OSError as e:
        raise ArtifactIOError(str(path), str(e)) from e
    return meta, np.asarray(ts, dtype=np.int64), np.asarray(values, dtype=float)


# ---------------------------------------------------------------- JSON

def _jsonable(obj: Any) -> Any:
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    return str(obj)


def dumps(data: Any) -> str:
    """确定性 JSON: 键排序, 固定缩进"""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False, default=_jsonable) + "\n"


def write_json(path: Path, data: Any) -> Path:
    path = Path(path)
    try:
        with _open_for_write(path) as f:
            f.write(dumps(data))
    except OSError as e:
        raise ArtifactIOError(str(path), str(e)) from e
    return path


def write_summary(summary, out_dir: Path, meta: Dict[str, Any]) -> Path:
    """
    写 summary.json 与 summary.meta.json

    summary.json 只依赖配置与主种子; 时间戳、线程数、耗时放在 meta 里。
    """
    out_dir = Path(out_dir)
    path = write_json(out_dir / "summary.json", summary.model_dump(mode="json"))
    write_json(out_dir / "summary.meta.json", {"written_at": datetime.now().isoformat(), **meta})
    logger.info(f"摘要已写入 {path}")
    return path
