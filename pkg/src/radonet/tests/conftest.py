import json
import sys
from pathlib import Path

import pytest

# 添加源码路径
ROOT_DIR = Path(__file__).parent.parent.parent
sys.path.insert(0, str(ROOT_DIR))

from radonet.app.models.growing_graph import new_seed, preset_seed  # noqa: E402
from radonet.app.utils.rng import make_rng, seeded_rng  # noqa: E402


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: 完整规模的验收实验, 默认跳过 (用 -m slow 运行)")


def pytest_collection_modifyitems(config, items):
    if config.getoption("-m"):
        return
    skip_slow = pytest.mark.skip(reason="完整规模实验, 用 -m slow 运行")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def p3():
    return preset_seed("P3")


@pytest.fixture
def k3():
    return preset_seed("K3")


@pytest.fixture
def e3():
    return preset_seed("E3")


@pytest.fixture
def c4():
    return preset_seed("C4")


@pytest.fixture
def small_graph():
    """6 个顶点: N(0)={1,2,4,5}, N(1)={0,3,4}, N(2)={0,5}, N(3)={1}, N(4)={0,1}, N(5)={0,2}"""
    edges = [(0, 1), (0, 2), (1, 3), (0, 4), (1, 4), (2, 5), (0, 5)]
    return new_seed(edges, 6)


@pytest.fixture
def rng():
    return seeded_rng(20240611)


@pytest.fixture
def replicate_rng():
    return lambda i, stream=0: make_rng(4242, i, stream)


@pytest.fixture
def write_config(tmp_path):
    """把配置 dict 写成 JSON 文件, 返回路径"""
    def _write(data, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path
    return _write
