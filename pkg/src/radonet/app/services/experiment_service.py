# src/radonet/app/services/experiment_service.py

"""
实验编排服务

parse_config 读取并校验 JSON 配置; run_experiment 按 experiment 选择对应的 runner,
并行跑副本、汇总断言、写产物; emit_plot_data 把摘要里的绘图数据写成 CSV。
同一份配置与主种子得到逐字节相同的 summary.json。
"""
import json
import time
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from pydantic import ValidationError

from radonet.app.constants.graph_types import Colour, ExperimentType, VertexClass
from radonet.app.core.config import seed_override, settings
from radonet.app.core.context import run_ctx
from radonet.app.core.exceptions import ArtifactIOError, ConfigError, RadonetError
from radonet.app.core.log_decorators import log_method
from radonet.app.core.logger import logger
from radonet.app.core.schemas import CensusReport, CensusRow, ExperimentConfig, ExperimentSummary
from radonet.app.models.growing_graph import GrowingGraph, complement, new_seed, preset_seed
from radonet.app.services.business import martingale_lab, process_engine, rado_checker, urn_model
from radonet.app.tasks.replicates import resolve_threads, run_replicates
from radonet.app.utils import artifacts, stats
from radonet.app.utils.rng import make_rng

# 每个图对应的 CSV 列
FIGURE_HEADERS: Dict[str, List[str]] = {
    "x_fans": ["replicate", "u", "colour", "t", "value"],
    "satisfaction_curves": ["request_id", "t", "satisfied_fraction", "ci_low", "ci_high"],
    "loglog_degree": ["lambda", "t", "mean_max_degree"],
}

FAN_REPLICATES = 20
FAN_POINTS = 60
LIMIT_WINDOW = 1000
SLOPE_TOLERANCE = 1e-9
_RADO_CHECKPOINTS = (1000, 2000, 5000, 10_000, 20_000)

Runner = Callable[[ExperimentConfig, ExperimentSummary, Path, Optional[int]], None]


# ---------------------------------------------------------------- 配置解析

def _line_of(text: str, loc: Sequence[Any]) -> Optional[int]:
    """按 loc 中的键名依次在原文中查找, 返回最后找到的键所在行 (1 起)"""
    pos, line = 0, None
    for part in loc:
        if not isinstance(part, str):
            continue
        idx = text.find(f'"{part}"', pos)
        if idx < 0:
            break
        pos = idx
        line = text.count("\n", 0, idx) + 1
    return line


def parse_config(path: Path, experiment: Optional[ExperimentType] = None) -> ExperimentConfig:
    """
    读取 JSON 配置并校验

    Args:
        path: 配置文件路径
        experiment: 子命令指定的实验类型, 覆盖文件中的 experiment

    Raises:
        ConfigError: 文件不存在、JSON 语法错误或字段不合法, 消息带行号
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"无法读取配置文件 {path}: {e}") from e
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"JSON 语法错误: {e.msg}", line=e.lineno) from e
    if not isinstance(data, dict):
        raise ConfigError("配置必须是 JSON 对象", line=1)

    if experiment is not None:
        declared = data.get("experiment")
        if declared is not None and declared != ExperimentType(experiment).value:
            logger.warning(f"配置中的 experiment={declared} 被子命令 {ExperimentType(experiment).value} 覆盖")
        data["experiment"] = ExperimentType(experiment).value

    try:
        override = seed_override()
    except ValueError as e:
        raise ConfigError(f"RADONET_SEED 不是整数: {e}") from e
    if override is not None:
        logger.info(f"RADONET_SEED 覆盖 master_seed: {override}")
        data["master_seed"] = override

    try:
        config = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        err = e.errors()[0]
        loc = tuple(err.get("loc", ()))
        line = _line_of(text, loc)
        if line is None:
            line = next((_line_of(text, (key,)) for key in data if key in err["msg"]), None)
        where = ".".join(str(p) for p in loc) or "config"
        raise ConfigError(f"{where}: {err['msg']}", line=line, field=where) from e

    if config.experiment is not ExperimentType.TAILS:
        try:
            seed = process_engine.build_seed(config.seed_graph, track_adjacency=False)
        except (RadonetError, ValueError) as e:
            raise ConfigError(f"种子图不合法: {e}", line=_line_of(text, ("seed_graph",))) from e
        if config.horizon <= seed.t:
            raise ConfigError(f"horizon={config.horizon} 必须大于种子时刻 t={seed.t}",
                              line=_line_of(text, ("horizon",)))
    logger.debug(f"配置已加载: {path}, experiment={config.experiment.value}")
    return config


# ---------------------------------------------------------------- 公共工具

def _plain_run_config(config: ExperimentConfig, **update: Any) -> ExperimentConfig:
    """只记度数的运行配置: 不跟踪邻接、不写快照、没有 checkpoint"""
    base = {"track_adjacency": False, "tracked_vertices": [], "checkpoints": [], "snapshot_times": []}
    base.update(update)
    return config.model_copy(update=base)


def _degree_only(g: GrowingGraph) -> GrowingGraph:
    return new_seed(g.edges(), g.n_vertices, track_adjacency=False)


def _fan_rows(replicate: int, u: int, colour: str, ts: np.ndarray, values: np.ndarray) -> List[Dict[str, Any]]:
    grid = stats.geometric_grid(int(ts[0]), int(ts[-1]), FAN_POINTS)
    idx = grid - int(ts[0])
    return [{"replicate": replicate, "u": u, "colour": colour, "t": int(ts[k]), "value": float(values[k])}
            for k in idx]


def _loglog_rows(lam: float, ts: np.ndarray, values: np.ndarray) -> List[Dict[str, Any]]:
    return [{"lambda": lam, "t": int(t), "mean_max_degree": float(v)} for t, v in zip(ts, values)]


def _slope_or_none(ts: np.ndarray, values: np.ndarray, t_min: float) -> Optional[float]:
    """度数全为正且至少两个点时给出 log-log 斜率, 否则为 None (例如空种子)"""
    keep = ts >= t_min
    if np.count_nonzero(keep) < 2 or np.any(values[keep] <= 0):
        return None
    return stats.loglog_slope(ts, values, t_min=t_min)


# ---------------------------------------------------------------- simulate

def _run_simulate(config: ExperimentConfig, summary: ExperimentSummary, out: Path, threads: Optional[int]) -> None:
    seed = process_engine.build_seed(config.seed_graph, track_adjacency=config.needs_adjacency)
    tracked = config.tracked_vertices or [int(u) for u in seed.standard_vertices()[:5]]
    run_config = config.model_copy(update={"tracked_vertices": tracked})
    standard = [u for u in tracked if u <= seed.t and seed.classify_vertex(u) is VertexClass.STANDARD]
    seed_isolated = [int(u) for u in np.flatnonzero(seed.degrees == 0)]
    seed_universal = seed.universal_vertices
    degenerate = "complete" if seed.is_complete() else "edgeless" if seed.is_edgeless() else None
    seed_t = seed.t
    grid = stats.geometric_grid(max(seed_t + 1, 2), config.horizon, FAN_POINTS)
    # 只有副本 0 写快照, 其余副本只记度数
    degree_seed = _degree_only(seed) if seed.track_adjacency else seed
    degree_config = run_config.model_copy(update={"snapshot_times": [], "track_adjacency": False})
    normalized = [u for u in standard if u >= 1] if config.lam < 1.0 else []

    def _task(i: int, rng: np.random.Generator) -> Dict[str, Any]:
        first = i == 0
        trajectory = process_engine.run(
            run_config if first else degree_config, rng, seed_graph=(seed if first else degree_seed).copy(),
            snapshot_dir=out / "snapshots" if first else None, keep_graph=True,
        )
        g = trajectory.final_graph
        if i == 0:
            artifacts.write_trajectory_csv(trajectory, out / "trajectory_r0.csv")
        per_vertex = {}
        fans: List[Dict[str, Any]] = []
        for u in standard:
            xs = martingale_lab.track_x(trajectory, u, Colour.BLACK)
            final, fluctuation = martingale_lab.estimate_limit(xs.values, min(LIMIT_WINDOW, xs.values.size))
            per_vertex[u] = {
                "x_final": final,
                "x_fluctuation": fluctuation,
                "black_degree": g.degree(u),
                "white_degree": g.white_degree(u),
                "x_increment_squares": martingale_lab.increment_square_sum(xs.values),
                "t_start": int(xs.ts[0]),
            }
            if i < FAN_REPLICATES:
                fans += _fan_rows(i, u, Colour.BLACK.value, xs.ts, xs.values)
            if i == 0:
                artifacts.write_series_csv(out / "series" / f"x_black_u{u}.csv", xs.ts, xs.values,
                                           {"u": u, "colour": Colour.BLACK.value, "replicate": 0})
            if u in normalized:
                ts_u, ds_u = trajectory.degree_series(u)
                zs = martingale_lab.lambda_normalized_x(ds_u, u, config.lam, t_start=int(ts_u[0]))
                per_vertex[u]["z_final"], _ = martingale_lab.estimate_limit(zs, min(LIMIT_WINDOW, zs.size))
                if i == 0:
                    artifacts.write_series_csv(out / "series" / f"x_lambda_u{u}.csv", ts_u, zs,
                                               {"u": u, "lambda": config.lam, "replicate": 0})
        ys = martingale_lab.track_y(trajectory, Colour.BLACK)
        if i == 0:
            artifacts.write_series_csv(out / "series" / "y_black.csv", ys.ts, ys.values,
                                       {"colour": Colour.BLACK.value, "replicate": 0})
        return {
            "per_vertex": per_vertex,
            "fans": fans,
            "complete": g.is_complete(),
            "edgeless": g.is_edgeless(),
            "isolated_kept": all(g.degree(u) == 0 for u in seed_isolated),
            "universal_kept": all(g.degree(u) == g.t for u in seed_universal),
            "standard_kept": all(g.classify_vertex(u) is VertexClass.STANDARD for u in standard),
            "y_final": float(ys.values[-1]),
            "y_increment_squares": martingale_lab.increment_square_sum(ys.values),
            "edge_count": g.edge_count,
            "max_degree": trajectory.max_degree[grid - (seed_t + 1)].astype(float),
        }

    outcomes = run_replicates(_task, config.replicates, config.master_seed, threads=threads, label="simulate")
    n = len(outcomes)

    if degenerate == "complete":
        summary.check("complete_seed_stays_complete", all(o["complete"] for o in outcomes), replicates=n)
    elif degenerate == "edgeless":
        summary.check("edgeless_seed_stays_edgeless", all(o["edgeless"] for o in outcomes), replicates=n)
    if seed_isolated:
        summary.check("isolated_stays_isolated", all(o["isolated_kept"] for o in outcomes), vertices=seed_isolated)
    if seed_universal and config.lam == 1.0:
        summary.check("universal_stays_universal", all(o["universal_kept"] for o in outcomes),
                      vertices=seed_universal)
    if standard:
        summary.check("standard_stays_standard", all(o["standard_kept"] for o in outcomes), vertices=standard)

    vertex_report = {}
    for u in standard:
        rows = [o["per_vertex"][u] for o in outcomes]
        bound = martingale_lab.l2_bound(rows[0]["t_start"], config.horizon)
        worst = max(r["x_increment_squares"] for r in rows)
        summary.check(f"x_l2_within_bound[u={u}]", worst <= bound, worst=worst, bound=bound)
        vertex_report[str(u)] = {
            "mean_x_final": float(np.mean([r["x_final"] for r in rows])),
            "mean_x_fluctuation": float(np.mean([r["x_fluctuation"] for r in rows])),
            "min_black_degree": min(r["black_degree"] for r in rows),
            "min_white_degree": min(r["white_degree"] for r in rows),
            "mean_x_increment_squares": float(np.mean([r["x_increment_squares"] for r in rows])),
            "l2_bound": bound,
        }
        if u in normalized:
            vertex_report[str(u)]["mean_lambda_normalized_final"] = float(np.mean([r["z_final"] for r in rows]))
    t_y = np.arange(max(seed_t, 1), config.horizon, dtype=float)
    mean_max = np.mean([o["max_degree"] for o in outcomes], axis=0)
    summary.results.update({
        "seed": process_engine.describe_seed(config.seed_graph),
        "tracked_standard": standard,
        "lambda_normalized": normalized,
        "vertices": vertex_report,
        "mean_final_edge_count": float(np.mean([o["edge_count"] for o in outcomes])),
        "mean_y_final": float(np.mean([o["y_final"] for o in outcomes])),
        "mean_y_increment_squares": float(np.mean([o["y_increment_squares"] for o in outcomes])),
        "y_l2_bound": float(np.sum(1.0 / t_y ** 3)),
        "max_degree_slope": _slope_or_none(grid, mean_max, grid[0]),
    })
    summary.plot_data["x_fans"] = [row for o in outcomes for row in o["fans"]]
    summary.plot_data[f"loglog_degree_lambda_{config.lam}"] = _loglog_rows(config.lam, grid, mean_max)


# ---------------------------------------------------------------- urn

def _run_urn(config: ExperimentConfig, summary: ExperimentSummary, out: Path, threads: Optional[int]) -> None:
    opts = config.urn
    starts_report = []
    for k, (a, b) in enumerate(opts.starts):
        start = urn_model.UrnState(black=a, white=b)
        t0 = start.t
        droughts = sorted(h for h in set(opts.drought_horizons) if t0 < h <= opts.horizon)
        stops = sorted(set(droughts) | {opts.horizon})

        def _task(i: int, rng: np.random.Generator, start=start, stops=stops, droughts=droughts):
            state = start
            flags = []
            for h in stops:
                state = urn_model.urn_run(state, h, rng)
                if h in droughts:
                    flags.append((state.black == start.black, state.white == start.white))
            return state.fraction, flags

        results = run_replicates(_task, opts.replicates, config.master_seed, threads=threads,
                                 label=f"urn ({a},{b})", stream=k)
        fractions = [r[0] for r in results]
        params = urn_model.BetaParams(a=a, b=b)
        d, p = stats.ks_test(fractions, params.cdf())
        summary.check(f"beta_limit[{a},{b}]", p >= config.significance, ks_d=d, p_value=p)
        summary.check(f"fraction_martingale[{a},{b}]",
                      urn_model.expected_next_fraction(start) == Fraction(a, a + b))

        drought_rows = []
        for j, h in enumerate(droughts):
            for colour, d_start, idx in (("black", a, 0), ("white", b, 1)):
                exact = float(urn_model.no_new_ball_probability(d_start, t0, h))
                empirical = sum(1 for r in results if r[1][j][idx]) / len(results)
                slack = stats.binomial_margin(exact, len(results)) + 1.0 / len(results)
                ok = abs(empirical - exact) <= slack
                drought_rows.append({"horizon": h, "colour": colour, "exact": exact,
                                     "empirical": empirical, "margin": slack, "passed": ok})
        summary.check(f"no_new_ball[{a},{b}]", all(r["passed"] for r in drought_rows), horizons=droughts)
        starts_report.append({
            "start": [a, b], "ks_d": d, "p_value": p, "mean_fraction": float(np.mean(fractions)),
            "beta_mean": params.mean, "droughts": drought_rows,
        })
    summary.results["starts"] = starts_report

    if opts.equivalence:
        _urn_equivalence(config, summary, threads, stream=len(opts.starts))


def _urn_equivalence(config: ExperimentConfig, summary: ExperimentSummary, threads: Optional[int],
                     stream: int) -> None:
    """完整过程中 d_v(T) 的分布与从同一起点出发的坛子比较 (两样本 KS)"""
    opts = config.urn
    v = opts.equivalence_vertex
    seed = process_engine.build_seed(config.seed_graph, track_adjacency=False)
    start = urn_model.urn_from_vertex(seed, v)
    run_config = _plain_run_config(config, horizon=opts.equivalence_horizon, tracked_vertices=[v])

    def _graph_task(i: int, rng: np.random.Generator) -> int:
        trajectory = process_engine.run(run_config, rng, seed_graph=seed.copy())
        return int(trajectory.tracked_degrees[-1, 0])

    def _urn_task(i: int, rng: np.random.Generator) -> int:
        return urn_model.urn_run(start, opts.equivalence_horizon, rng).black

    graph_degrees = run_replicates(_graph_task, opts.equivalence_replicates, config.master_seed,
                                   threads=threads, label="equivalence: graph", stream=stream)
    urn_degrees = run_replicates(_urn_task, opts.equivalence_replicates, config.master_seed,
                                 threads=threads, label="equivalence: urn", stream=stream + 1)
    d, p = stats.ks_two_sample(graph_degrees, urn_degrees)
    summary.check("urn_graph_equivalence", p >= opts.equivalence_significance, ks_d=d, p_value=p,
                  vertex=v, start=[start.black, start.white])
    summary.results["equivalence"] = {
        "vertex": v, "horizon": opts.equivalence_horizon, "ks_d": d, "p_value": p,
        "mean_graph_degree": float(np.mean(graph_degrees)), "mean_urn_black": float(np.mean(urn_degrees)),
    }


# ---------------------------------------------------------------- oracle-check

def _small_graph_family(max_n: int) -> List[Tuple[str, GrowingGraph]]:
    """所有 n <= max_n 个顶点、既不完全也不空的图"""
    family = []
    for n in range(3, max_n + 1):
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        for mask in range(1, (1 << len(pairs)) - 1):
            edges = [pairs[j] for j in range(len(pairs)) if mask >> j & 1]
            family.append((f"n={n},mask={mask}", new_seed(edges, n, track_adjacency=False)))
    return family


def _random_graph_family(count: int, max_t: int, rng: np.random.Generator) -> List[Tuple[str, GrowingGraph]]:
    family = []
    while len(family) < count:
        t = int(rng.integers(3, max_t + 1))
        pairs = [(u, v) for u in range(t + 1) for v in range(u + 1, t + 1)]
        density = rng.uniform(0.2, 0.8)
        keep = rng.random(len(pairs)) < density
        edges = [pairs[j] for j in np.flatnonzero(keep)]
        g = new_seed(edges, t + 1, track_adjacency=False)
        if g.is_complete() or g.is_edgeless():
            continue
        family.append((f"random[{len(family)}]:t={t},E={len(edges)}", g))
    return family


def _identity_family(name: str) -> str:
    return name.split("[")[0]


def _run_oracle_check(config: ExperimentConfig, summary: ExperimentSummary, out: Path,
                      threads: Optional[int]) -> None:
    opts = config.oracle
    if opts.max_t > settings.ORACLE_MAX_T:
        raise ConfigError(f"oracle.max_t={opts.max_t} 超过 ORACLE_MAX_T={settings.ORACLE_MAX_T}")
    normalized_lam = process_engine.as_fraction(opts.normalized_lambda)

    seed = process_engine.build_seed(config.seed_graph, track_adjacency=False)
    seeds: List[Tuple[str, GrowingGraph]] = []
    if seed.t <= settings.ORACLE_MAX_T:
        seeds.append((process_engine.describe_seed(config.seed_graph), seed))
    else:
        logger.warning(f"配置的种子图 t={seed.t} 超过 ORACLE_MAX_T, 跳过精确检查")
    seeds += _small_graph_family(opts.exhaustive_n)
    seeds += _random_graph_family(opts.random_family, opts.max_t, make_rng(config.master_seed, 0, stream=1))

    failures: Dict[str, List[str]] = {}
    checked: Dict[str, int] = {}
    seed_report = []
    for name, g in seeds:
        with run_ctx.scoped(stage=name):
            identities = martingale_lab.oracle_identities(g, 1)
            normalized = martingale_lab.oracle_identities(g, normalized_lam)
        merged = {}
        for suffix, results in (("", identities), (f"@lambda={normalized_lam}", normalized)):
            for key, ok in results.items():
                family = _identity_family(key) + suffix
                merged[key + suffix] = ok
                checked[family] = checked.get(family, 0) + 1
                if not ok:
                    failures.setdefault(family, []).append(f"{name}: {key}")
        if g is seed:
            seed_report.append({"seed": name, "identities": merged})

    for family in sorted(checked):
        bad = failures.get(family, [])
        summary.check(f"exact:{family}", not bad, checked=checked[family], failures=bad[:20])

    summary.results.update({
        "seeds_checked": len(seeds),
        "identity_counts": checked,
        "configured_seed": seed_report,
    })

    if seed.t <= settings.ORACLE_MAX_T and seed.t + 1 <= 20:
        _sampling_consistency(config, seed, summary)


def _sampling_consistency(config: ExperimentConfig, seed: GrowingGraph, summary: ExperimentSummary,
                          n_samples: int = 100_000) -> None:
    """抽样得到的邻居集合频数与精确分布做卡方拟合优度检验"""
    dist = process_engine.exact_step_distribution(seed, Fraction(config.lam))
    codes = process_engine.sample_step_codes(seed, make_rng(config.master_seed, 0, stream=2), config.lam, n_samples)
    support = {process_engine.subset_code(s): float(p) for s, p in dist.outcomes}
    values, counts = np.unique(codes, return_counts=True)
    observed_map = dict(zip(values.tolist(), counts.tolist()))
    outside = sum(c for code, c in observed_map.items() if code not in support)
    keys = sorted(support)
    observed = [observed_map.get(code, 0) for code in keys]
    expected = [n_samples * support[code] for code in keys]
    if len(keys) < 2:
        summary.check("sampling_matches_exact", outside == 0, outcomes=len(keys), outside_support=outside)
        return
    stat, dof, p = stats.chi2_goodness_of_fit(observed, expected)
    summary.check("sampling_matches_exact", outside == 0 and p >= config.significance,
                  chi2=stat, dof=dof, p_value=p, outside_support=outside)
    mean_float = process_engine.expected_new_degree(seed, config.lam)
    var_float = process_engine.new_degree_variance(seed, config.lam)
    summary.check("moments_match_exact",
                  abs(mean_float - float(dist.new_degree_mean())) < 1e-12
                  and abs(var_float - float(dist.new_degree_variance())) < 1e-12,
                  mean=mean_float, variance=var_float)


# ---------------------------------------------------------------- tails

def _run_tails(config: ExperimentConfig, summary: ExperimentSummary, out: Path, threads: Optional[int]) -> None:
    opts = config.tails
    seed = preset_seed("star", track_adjacency=False, t0=opts.t0, degree=opts.degree)
    start = urn_model.urn_from_vertex(seed, 0)
    if min(start.black, start.white) < 16:
        logger.warning(f"顶点 0 在 t0={opts.t0} 的黑/白度数 ({start.black}, {start.white}) 小于 16, 尾部界不适用")
    x_params = martingale_lab.x_bound_params(t1=opts.t0)
    y_params = martingale_lab.y_bound_params(alpha=16.0, t1=opts.t0)
    ts = np.arange(start.t, opts.horizon + 1, dtype=np.int64)

    def _task(i: int, rng: np.random.Generator) -> Dict[str, Any]:
        path = np.empty(opts.horizon - start.t, dtype=np.int64)
        final = urn_model.urn_run(start, opts.horizon, rng, path=path)
        xs = np.concatenate([[start.black], path]) / ts
        return {
            "estimate": final.fraction,
            "halvings": len(martingale_lab.halving_times(xs)) - 1,
            "increment_squares": martingale_lab.increment_square_sum(xs),
            "fan": _fan_rows(i, 0, Colour.BLACK.value, ts, xs) if i < FAN_REPLICATES else [],
        }

    outcomes = run_replicates(_task, opts.replicates, config.master_seed, threads=threads, label="tails")
    estimates = [o["estimate"] for o in outcomes]
    report = stats.tail_check(estimates, opts.t0, opts.i_max)
    summary.check("tail_bound", report.passed, rows=[r.model_dump() for r in report.rows])

    profile = martingale_lab.halving_profile([o["halvings"] for o in outcomes], x_params.beta, opts.halving_i_max)
    summary.check("halving_profile", all(r.passed for r in profile), rows=[r.model_dump() for r in profile])

    bound = martingale_lab.l2_bound(opts.t0, opts.horizon)
    worst = max(o["increment_squares"] for o in outcomes)
    summary.check("x_l2_within_bound", worst <= bound, worst=worst, bound=bound)

    summary.results.update({
        "start": [start.black, start.white],
        "beta_mean": urn_model.BetaParams.from_urn(start).mean,
        "mean_estimate": float(np.mean(estimates)),
        "x_bound_params": x_params.model_dump(),
        "y_bound_params": y_params.model_dump(),
        "halving_counts": dict(sorted(
            (str(k), int(v)) for k, v in zip(*np.unique([o["halvings"] for o in outcomes], return_counts=True))
        )),
        "mean_increment_squares": float(np.mean([o["increment_squares"] for o in outcomes])),
    })
    summary.plot_data["x_fans"] = [row for o in outcomes for row in o["fan"]]


# ---------------------------------------------------------------- rado

def _rado_checkpoints(config: ExperimentConfig) -> List[int]:
    if config.checkpoints:
        points = [t for t in config.checkpoints if t >= config.rado.request_time]
    else:
        points = [t for t in _RADO_CHECKPOINTS if config.rado.request_time <= t < config.horizon]
    return sorted(set(points) | {config.horizon})


def _rado_templates(config: ExperimentConfig) -> List[rado_checker.WitnessRequest]:
    rado = config.rado
    templates = rado_checker.enumerate_requests(range(rado.pool_size), rado.max_size, rado.max_size)
    if rado.request_count is not None:
        rng = make_rng(config.master_seed, 0, stream=9)
        replace = rado.request_count > len(templates)
        idx = rng.choice(len(templates), size=rado.request_count, replace=replace)
        templates = [templates[int(i)] for i in sorted(set(idx.tolist()))]
    return templates


def _separation_checks(summary: ExperimentSummary, lam: float, size: int, curves, n_replicates: int,
                       threshold: float, burn_in: int) -> Dict[str, Any]:
    """|U| = size 的请求: 终点满足比例上限, 以及 burn_in 之后满足比例与见证密度不增"""
    rows = rado_checker.aggregate_satisfaction(curves)
    final = rows[-1]
    later = [r for r in rows if r.t >= burn_in]
    fraction_flat = all(
        nxt.satisfied_fraction <= prev.satisfied_fraction + stats.binomial_margin(prev.satisfied_fraction, n_replicates)
        for prev, nxt in zip(later, later[1:])
    )
    density = [r.mean_witness_count / r.t for r in later]
    density_down = all(b <= a for a, b in zip(density, density[1:]))
    summary.check(f"separation_fraction[lambda={lam},|U|={size}]", final.satisfied_fraction <= threshold,
                  satisfied_fraction=final.satisfied_fraction, threshold=threshold)
    summary.check(f"separation_non_increasing[lambda={lam},|U|={size}]", fraction_flat and density_down,
                  fractions=[r.satisfied_fraction for r in later], witness_density=density)
    return {"lambda": lam, "size": size, "satisfied_fraction": final.satisfied_fraction,
            "ci": [final.ci_low, final.ci_high], "witness_density": density}


def _run_rado(config: ExperimentConfig, summary: ExperimentSummary, out: Path, threads: Optional[int]) -> None:
    rado = config.rado
    checkpoints = _rado_checkpoints(config)
    templates = _rado_templates(config)
    sweep_templates = []
    if config.lam < 1.0:
        sweep_templates = [rado_checker.WitnessRequest(U=frozenset(range(s))) for s in rado.sweep_sizes]
    all_templates = templates + [r for r in sweep_templates if r not in templates]

    outcomes = rado_checker.run_satisfaction(config, all_templates, checkpoints, threads=threads,
                                             independence_pair=(0, 1))
    curves = [c for o in outcomes for c in o.curves]
    rows = rado_checker.aggregate_satisfaction(curves)
    artifacts.write_json(out / "satisfaction.json", [r.model_dump() for r in rows])
    summary.plot_data["satisfaction_curves"] = [
        {k: getattr(r, k) for k in FIGURE_HEADERS["satisfaction_curves"]} for r in rows
    ]

    horizon = checkpoints[-1]
    template_ids = {t.request_id for t in templates}
    main = [c for c in curves if c.request_id in template_ids]
    final_counts = [c.samples[-1][1] for c in main]
    satisfied = sum(1 for n in final_counts if n > 0) / max(1, len(final_counts))
    persistence = all(
        all(count > 0 for t, count in c.samples if t >= c.first_satisfied_t)
        for c in curves if c.first_satisfied_t is not None
    )
    summary.check("witness_persistence", persistence)

    singles = [c for c in main if len(c.request.members) == 1 and c.predicted_proportion]
    relative_errors = [abs(c.samples[-1][1] / horizon - c.predicted_proportion) / c.predicted_proportion
                       for c in singles]
    within = [err <= rado.singleton_tolerance for err in relative_errors]
    singleton_fraction = sum(within) / len(within) if within else None

    p_values = [o.independence_p for o in outcomes if o.independence_p is not None]
    rejections = sum(1 for p in p_values if p < rado.independence_significance)
    rejection_limit = (len(p_values) * rado.independence_significance
                       + 3.0 * np.sqrt(len(p_values) * rado.independence_significance
                                       * (1 - rado.independence_significance)))

    if config.lam == 1.0:
        summary.check("extension_satisfied", satisfied >= rado.satisfied_threshold,
                      satisfied_fraction=satisfied, pairs=len(final_counts), threshold=rado.satisfied_threshold)
        if within:
            summary.check("singleton_proportion", singleton_fraction >= rado.satisfied_threshold,
                          within_fraction=singleton_fraction, runs_outside=len(within) - sum(within),
                          tolerance=rado.singleton_tolerance)
        if p_values:
            summary.check("adjacency_independence", rejections <= rejection_limit,
                          rejections=rejections, limit=float(rejection_limit), replicates=len(p_values))

    separation = []
    for request in sweep_templates:
        size = len(request.U)
        chosen = [c for c in curves if c.request_id == request.request_id]
        separation.append(_separation_checks(summary, config.lam, size, chosen, config.replicates,
                                             rado.sweep_threshold, rado.burn_in))

    summary.results.update({
        "checkpoints": checkpoints,
        "requests": len(templates),
        "pool_size": rado.pool_size,
        "request_time": rado.request_time,
        "satisfied_fraction_at_horizon": satisfied,
        "singleton_within_tolerance": singleton_fraction,
        "singleton_runs_outside": len(within) - sum(within),
        "singleton_worst_relative_error": max(relative_errors, default=None),
        "independence": {"tests": len(p_values), "rejections": rejections, "limit": float(rejection_limit)},
        "separation": separation,
        "final_rows": [r.model_dump() for r in rows if r.t == horizon and r.request_id in template_ids][:200],
    })


# ---------------------------------------------------------------- lambda-sweep

def _run_lambda_sweep(config: ExperimentConfig, summary: ExperimentSummary, out: Path,
                      threads: Optional[int]) -> None:
    sweep = config.sweep
    seed = process_engine.build_seed(config.seed_graph, track_adjacency=False)
    seed_t = seed.t
    grid = stats.geometric_grid(max(sweep.slope_t_min, seed_t + 1), config.horizon, FAN_POINTS)
    ranges = {float(k): v for k, v in sweep.slope_ranges.items()}
    separation_lams = {float(x) for x in sweep.separation_lambdas}
    lambda_rows = []

    for k, lam in enumerate(sweep.lambdas):
        run_config = _plain_run_config(config, lam=lam)

        def _task(i: int, rng: np.random.Generator, run_config=run_config) -> np.ndarray:
            trajectory = process_engine.run(run_config, rng, seed_graph=seed.copy())
            return trajectory.max_degree[grid - (seed_t + 1)].astype(float)

        with run_ctx.scoped(stage=f"lambda={lam}"):
            series = run_replicates(_task, config.replicates, config.master_seed, threads=threads,
                                    label=f"sweep λ={lam}", stream=10 + k)
            mean_max = np.mean(series, axis=0)
            slope = _slope_or_none(grid, mean_max, sweep.slope_t_min)
            summary.plot_data[f"loglog_degree_lambda_{lam}"] = _loglog_rows(lam, grid, mean_max)
            if lam in ranges and slope is not None:
                low, high = ranges[lam]
                summary.check(f"max_degree_slope[lambda={lam}]",
                              low - SLOPE_TOLERANCE <= slope <= high + SLOPE_TOLERANCE,
                              slope=slope, range=[low, high])

            requests = [rado_checker.WitnessRequest(U=frozenset(range(s))) for s in sweep.sizes]
            sat_config = config.model_copy(update={"lam": lam})
            checkpoints = _rado_checkpoints(sat_config)
            outcomes = rado_checker.run_satisfaction(sat_config, requests, checkpoints, threads=threads,
                                                     stream=20 + k)
            curves = [c for o in outcomes for c in o.curves]
            sizes = []
            for request in requests:
                size = len(request.U)
                chosen = [c for c in curves if c.request_id == request.request_id]
                critical = lam < 1.0 and size > 1.0 / (1.0 - lam)
                if critical and lam in separation_lams:
                    row = _separation_checks(summary, lam, size, chosen, config.replicates,
                                             config.rado.sweep_threshold, config.rado.burn_in)
                else:
                    final = rado_checker.aggregate_satisfaction(chosen)[-1]
                    row = {"lambda": lam, "size": size, "satisfied_fraction": final.satisfied_fraction,
                           "ci": [final.ci_low, final.ci_high]}
                row["beyond_critical"] = critical
                sizes.append(row)
        lambda_rows.append({"lambda": lam, "max_degree_slope": slope, "sizes": sizes})

    summary.results["lambdas"] = lambda_rows


# ---------------------------------------------------------------- symmetry

def _run_symmetry(config: ExperimentConfig, summary: ExperimentSummary, out: Path, threads: Optional[int]) -> None:
    if config.lam != 1.0:
        raise ConfigError(f"symmetry 实验要求 λ = 1, 实际 λ = {config.lam}")
    seed = process_engine.build_seed(config.seed_graph, track_adjacency=True)
    white = complement(seed)
    t0 = seed.t
    summary.check("complement_involution", np.array_equal(complement(white).edges(), seed.edges()))
    summary.check("complement_degrees",
                  all(seed.degree(u) + white.degree(u) == t0 for u in range(t0 + 1)))

    if config.checkpoints:
        checkpoints = [t for t in config.checkpoints if t > t0]
    else:
        checkpoints = [int(t) for t in stats.geometric_grid(max(t0 + 1, 10), config.horizon, 5)]
    idx = np.asarray(checkpoints, dtype=np.int64) - t0
    run_config = _plain_run_config(config)
    black_seed, white_seed = _degree_only(seed), _degree_only(white)

    def _black_task(i: int, rng: np.random.Generator) -> np.ndarray:
        _, es = process_engine.run(run_config, rng, seed_graph=black_seed.copy()).edge_series()
        return es[idx]

    def _white_task(i: int, rng: np.random.Generator) -> np.ndarray:
        ts, es = process_engine.run(run_config, rng, seed_graph=white_seed.copy()).edge_series()
        return ts[idx] * (ts[idx] + 1) // 2 - es[idx]

    black = np.asarray(run_replicates(_black_task, config.replicates, config.master_seed, threads=threads,
                                      label="symmetry: black", stream=0))
    reconstructed = np.asarray(run_replicates(_white_task, config.replicates, config.master_seed,
                                              threads=threads, label="symmetry: white", stream=1))
    # 多个 checkpoint 共用一个显著性水平 (Bonferroni)
    level = config.significance / len(checkpoints)
    rows = []
    for j, t in enumerate(checkpoints):
        d, p = stats.ks_two_sample(black[:, j], reconstructed[:, j])
        rows.append({"t": t, "ks_d": d, "p_value": p, "mean_black": float(black[:, j].mean()),
                     "mean_reconstructed": float(reconstructed[:, j].mean())})
    summary.check("complement_symmetry", all(r["p_value"] >= level for r in rows), level=level)
    summary.results.update({"seed": process_engine.describe_seed(config.seed_graph), "checkpoints": rows})


# ---------------------------------------------------------------- census

def _run_census(config: ExperimentConfig, summary: ExperimentSummary, out: Path, threads: Optional[int]) -> None:
    opts = config.census
    seed = process_engine.build_seed(config.seed_graph, track_adjacency=False)
    has_isolated = seed.count_class(VertexClass.ISOLATED) > 0
    has_universal = bool(seed.universal_vertices)
    run_config = _plain_run_config(config)
    half = config.horizon / 2

    def _task(i: int, rng: np.random.Generator) -> Tuple[CensusRow, List[int], List[int]]:
        trajectory = process_engine.run(run_config, rng, seed_graph=seed.copy())
        iso_t = trajectory.t_new[trajectory.new_degree == 0]
        uni_t = trajectory.t_new[trajectory.new_degree == trajectory.t_new]
        row = CensusRow(
            replicate=i,
            isolated_births=int(iso_t.size),
            universal_births=int(uni_t.size),
            last_isolated_t=int(iso_t[-1]) if iso_t.size else None,
            last_universal_t=int(uni_t[-1]) if uni_t.size else None,
            second_half_birth=bool(np.any(iso_t > half) or np.any(uni_t > half)),
        )
        return row, iso_t.tolist(), uni_t.tolist()

    with run_ctx.scoped(stage="census"):
        outcomes = run_replicates(_task, config.replicates, config.master_seed, threads=threads, label="census")
    report = CensusReport(horizon=config.horizon, rows=[o[0] for o in outcomes])
    births = [(o[0].replicate, kind, t) for o in outcomes
              for kind, times in (("isolated", o[1]), ("universal", o[2])) for t in times]
    artifacts.write_rows_csv(out / "census_births.csv", ["replicate", "kind", "t"], births,
                             comments={"horizon": config.horizon, "lambda": config.lam})

    summary.check("second_half_births", report.second_half_fraction <= opts.second_half_threshold,
                  fraction=report.second_half_fraction, threshold=opts.second_half_threshold)
    if config.lam == 1.0:
        if has_universal:
            ok = all(r.isolated_births == 0 for r in report.rows)
        elif has_isolated:
            ok = all(r.universal_births == 0 for r in report.rows)
        else:
            ok = report.both_kinds == 0
        summary.check("non_standard_exclusion", ok, seed_universal=has_universal, seed_isolated=has_isolated)

    hoeffding_config = _plain_run_config(config, horizon=opts.hoeffding_horizon)

    def _hoeffding_task(i: int, rng: np.random.Generator):
        trajectory = process_engine.run(hoeffding_config, rng, seed_graph=seed.copy())
        return stats.hoeffding_check(trajectory.t_new, trajectory.new_degree, trajectory.edge_count, opts.xi)

    with run_ctx.scoped(stage="hoeffding"):
        reports = run_replicates(_hoeffding_task, opts.hoeffding_replicates, config.master_seed,
                                 threads=threads, label="hoeffding", stream=1)
    total, limit, passed = stats.hoeffding_aggregate(reports)
    summary.check("hoeffding_zero_births", passed, violations=total, limit=limit)

    summary.results.update({
        "second_half_fraction": report.second_half_fraction,
        "both_kinds": report.both_kinds,
        "total_isolated_births": sum(r.isolated_births for r in report.rows),
        "total_universal_births": sum(r.universal_births for r in report.rows),
        "rows": [r.model_dump() for r in report.rows],
        "hoeffding": {
            "xi": opts.xi, "horizon": opts.hoeffding_horizon, "replicates": opts.hoeffding_replicates,
            "eligible_steps": sum(r.eligible_steps for r in reports), "violations": total,
            "bound_sum": sum(r.bound_sum for r in reports), "limit": limit,
        },
    })


# ---------------------------------------------------------------- 入口

_RUNNERS: Dict[ExperimentType, Runner] = {
    ExperimentType.SIMULATE: _run_simulate,
    ExperimentType.URN: _run_urn,
    ExperimentType.ORACLE_CHECK: _run_oracle_check,
    ExperimentType.TAILS: _run_tails,
    ExperimentType.RADO: _run_rado,
    ExperimentType.LAMBDA_SWEEP: _run_lambda_sweep,
    ExperimentType.SYMMETRY: _run_symmetry,
    ExperimentType.CENSUS: _run_census,
}


@log_method(method_type="experiment", level="info")
def run_experiment(config: ExperimentConfig, threads: Optional[int] = None,
                   out_dir: Optional[Path] = None) -> ExperimentSummary:
    """
    运行一个实验并写出 summary.json、summary.meta.json 与绘图 CSV

    Returns:
        实验摘要, summary.exit_code 为 0 (全部通过) 或 2 (有统计断言失败)
    """
    out = Path(out_dir if out_dir is not None else config.output_dir)
    summary = ExperimentSummary(
        experiment=config.experiment,
        master_seed=config.master_seed,
        lam=config.lam,
        horizon=config.horizon,
        replicates=config.replicates,
    )
    start_time = time.time()
    with run_ctx.scoped(experiment=config.experiment.value):
        try:
            out.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            raise ArtifactIOError(str(out), str(e)) from e
        _RUNNERS[config.experiment](config, summary, out, threads)
        duration = time.time() - start_time
        artifacts.write_summary(summary, out, {
            "threads": resolve_threads(threads),
            "duration_seconds": round(duration, 3),
            "version": settings.VERSION,
        })
        emit_plot_data(summary, out)

    failed = [a.name for a in summary.assertions if not a.passed]
    if failed:
        logger.warning(f"{len(failed)} 个断言失败: {failed}")
    else:
        logger.info(f"全部 {len(summary.assertions)} 个断言通过")
    return summary


def emit_plot_data(summary: ExperimentSummary, output_dir: Path) -> List[Path]:
    """
    每个图一个 CSV, 写在 output_dir/plots 下

    没有数据的图写只有表头的文件; lambda-sweep 的度数增长每个 λ 一个文件。
    """
    plots = Path(output_dir) / "plots"
    paths = []
    for figure, header in FIGURE_HEADERS.items():
        keys = sorted(k for k in summary.plot_data if k == figure or k.startswith(figure + "_"))
        for key in keys or [figure]:
            paths.append(artifacts.write_dict_rows_csv(plots / f"{key}.csv", header, summary.plot_data.get(key, [])))
    logger.debug(f"绘图数据已写入 {plots}: {len(paths)} 个文件")
    return paths
