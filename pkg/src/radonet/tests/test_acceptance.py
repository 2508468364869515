"""
完整规模的验收实验 (pytest -m slow)

每个配置文件对应一个子命令, 使用 scripts/configs 下固定的主种子。
"""
from pathlib import Path

import pytest

from radonet.app.services.experiment_service import parse_config, run_experiment
from radonet.app.tasks.replicates import set_progress

CONFIG_DIR = Path(__file__).parent.parent / "scripts" / "configs"


@pytest.fixture(autouse=True)
def _no_seed_override(monkeypatch):
    monkeypatch.delenv("RADONET_SEED", raising=False)
    set_progress(False)


def _run(name, out_dir):
    config = parse_config(CONFIG_DIR / f"{name}.json")
    return run_experiment(config, out_dir=out_dir)


def _assert_all_passed(summary):
    failed = [(a.name, a.detail) for a in summary.assertions if not a.passed]
    assert not failed, failed


@pytest.mark.slow
@pytest.mark.parametrize("name", [
    "oracle_check", "simulate_complete", "simulate_edgeless", "simulate_p3",
    "urn", "tails", "census", "rado", "lambda_sweep", "symmetry",
])
def test_acceptance_config_passes(name, tmp_path):
    summary = _run(name, tmp_path)
    _assert_all_passed(summary)
    assert (tmp_path / "summary.json").exists()


@pytest.mark.slow
def test_oracle_covers_every_small_seed(tmp_path):
    summary = _run("oracle_check", tmp_path)
    names = {a.name for a in summary.assertions}
    for family in ("x_martingale", "x_second_moment", "y_martingale", "y_second_moment",
                   "lambda_x_martingale@lambda=1/2"):
        assert f"exact:{family}" in names
    # 3 个顶点 6 个图, 4 个顶点 62 个图, 加上配置的种子与 24 个随机图
    assert summary.results["seeds_checked"] == 1 + 6 + 62 + 24


@pytest.mark.slow
def test_lambda_sweep_separates_slopes(tmp_path):
    summary = _run("lambda_sweep", tmp_path)
    slopes = {row["lambda"]: row["max_degree_slope"] for row in summary.results["lambdas"]}
    assert 0.4 <= slopes[0.5] <= 0.6
    assert slopes[1.0] == pytest.approx(1.0)
    assert slopes[0.5] < slopes[0.7] < slopes[0.9]


@pytest.mark.slow
@pytest.mark.parametrize("name", ["oracle_check", "tails", "symmetry"])
def test_rerun_is_byte_identical(name, tmp_path):
    _run(name, tmp_path / "first")
    _run(name, tmp_path / "second")
    assert (tmp_path / "first" / "summary.json").read_bytes() == (tmp_path / "second" / "summary.json").read_bytes()
