# src/radonet/app/cli/main.py

"""
命令行入口

radonet <simulate|urn|oracle-check|tails|rado|lambda-sweep|symmetry|census>
        --config PATH [--threads N] [--out DIR] [--log-level LEVEL] [--quiet]

退出码: 0 全部通过, 1 配置错误, 2 统计断言失败, 3 读写失败。
"""
import sys
from pathlib import Path
from typing import Optional

import click

from radonet import __version__
from radonet.app.constants.graph_types import ExperimentType
from radonet.app.core.config import settings
from radonet.app.core.exceptions import ArtifactIOError, ConfigError, RadonetError
from radonet.app.core.logger import add_file_sink, logger, set_level
from radonet.app.core.schemas import ExitCode
from radonet.app.services.experiment_service import parse_config, run_experiment
from radonet.app.tasks.replicates import set_progress


def _execute(experiment: ExperimentType, config_path: str, threads: Optional[int], out: Optional[str],
             log_level: Optional[str], quiet: bool) -> int:
    if quiet:
        set_level("WARNING")
        set_progress(False)
    elif log_level:
        set_level(log_level.upper())
    try:
        config = parse_config(Path(config_path), experiment=experiment)
        out_dir = Path(out) if out else Path(config.output_dir)
        if settings.LOG_TO_FILE:
            add_file_sink(Path(settings.LOG_FILE_PATH) if settings.LOG_FILE_PATH else out_dir / "logs")
        summary = run_experiment(config, threads=threads, out_dir=out_dir)
    except ConfigError as e:
        logger.error(f"配置错误: {e.message}")
        return ExitCode.CONFIG_ERROR
    except ArtifactIOError as e:
        logger.error(f"读写失败: {e.message}")
        return ExitCode.IO_ERROR
    except OSError as e:
        logger.error(f"读写失败: {e}")
        return ExitCode.IO_ERROR
    except RadonetError as e:
        logger.error(f"{e.code}: {e.message}", extra={"details": e.details})
        return e.exit_code

    for assertion in summary.assertions:
        mark = "PASS" if assertion.passed else "FAIL"
        click.echo(f"[{mark}] {assertion.name}")
    click.echo(f"summary: {out_dir / 'summary.json'}")
    return summary.exit_code


def _experiment_command(experiment: ExperimentType, help_text: str) -> click.Command:
    @click.command(name=experiment.value, help=help_text)
    @click.option("--config", "config_path", required=True, type=click.Path(dir_okay=False),
                  help="实验配置 JSON 文件")
    @click.option("--threads", type=click.IntRange(min=1), default=None, help="副本并行线程数")
    @click.option("--out", type=click.Path(file_okay=False), default=None, help="输出目录, 覆盖配置中的 output_dir")
    @click.option("--log-level", type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False),
                  default=None, help="日志级别")
    @click.option("--quiet", is_flag=True, default=False, help="只输出警告与错误, 不显示进度条")
    def command(config_path: str, threads: Optional[int], out: Optional[str],
                log_level: Optional[str], quiet: bool) -> None:
        sys.exit(int(_execute(experiment, config_path, threads, out, log_level, quiet)))

    return command


_HELP = {
    ExperimentType.SIMULATE: "运行增长过程, 输出轨迹、X 收敛扇形图与退化种子检查",
    ExperimentType.URN: "Pólya 坛子的 Beta 极限、无新球概率与图/坛子等价性检验",
    ExperimentType.ORACLE_CHECK: "在小种子图上用精确有理数验证鞅恒等式与二阶矩界",
    ExperimentType.TAILS: "度数比例极限的尾部界与减半次数分布",
    ExperimentType.RADO: "扩展性质: 见证顶点的满足比例曲线",
    ExperimentType.LAMBDA_SWEEP: "λ 网格上的最大度数增长斜率与满足比例",
    ExperimentType.SYMMETRY: "黑图与补图种子白图的边数分布对称性",
    ExperimentType.CENSUS: "孤立/全连接新顶点的出生普查与 Hoeffding 检查",
}


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name=settings.PROJECT_NAME)
def cli() -> None:
    """radonet: 线性偏好依附随机图的模拟与检验"""


for _experiment in ExperimentType:
    cli.add_command(_experiment_command(_experiment, _HELP[_experiment]))


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
