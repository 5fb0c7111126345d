#!/usr/bin/env python3
"""
应用配置加载器
配置文件提供默认值，命令行参数优先于配置文件，环境变量 ORDLTL_MAX_STATES 覆盖状态数上限。
"""

import argparse
import copy
import json
import logging
import os
import sys
from typing import Any, Dict, Optional

from errors import ConfigError

logger = logging.getLogger(__name__)

MAX_STATES_ENV = "ORDLTL_MAX_STATES"

DEFAULT_CONFIG: Dict[str, Any] = {
    "solver": {"max_level": 3, "max_level_limit": 4, "max_states": 4194304},
    "word": {"max_level": 3},
    "check": {
        "seed": 42,
        "case_count": 500,
        "max_size": 12,
        "prop_count": 3,
        "max_word_level": 2,
        "solve_level": 3,
        "lasso_draws": 1000,
        "exhaustive_length": 6,
        "naive_draws": 20,
        "workers": 1,
    },
    "logging": {"level": "WARNING"},
}


def _project_root() -> str:
    return os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


class AppConfig:
    def __init__(self, config_path: str = None, args: argparse.Namespace = None):
        self.args = args or argparse.Namespace()
        if config_path is None:
            config_path = getattr(self.args, "config", None)
        if config_path is None:
            config_path = os.path.join(_project_root(), "config", "config.json")
        self.config_path = config_path
        self.config = self._load_config()

    def _load_config(self) -> Dict[str, Any]:
        """加载配置文件，缺失的键使用内置默认值"""
        try:
            with open(self.config_path, "r", encoding="utf-8") as f:
                return _merge(DEFAULT_CONFIG, json.load(f))
        except FileNotFoundError:
            logger.warning(f"配置文件 {self.config_path} 未找到，使用默认配置")
        except json.JSONDecodeError as e:
            logger.warning(f"配置文件格式错误: {e}，使用默认配置")
        return copy.deepcopy(DEFAULT_CONFIG)

    def _section(self, name: str) -> Dict[str, Any]:
        return self.config.get(name, {})

    def _arg(self, name: str):
        return getattr(self.args, name, None)

    def get_max_level_limit(self) -> int:
        return int(self._section("solver")["max_level_limit"])

    def get_max_level(self) -> Optional[int]:
        """命令行指定的层数；未指定时返回 None，由调用方取 min(配置值, 公式大小)"""
        level = self._arg("max_level")
        if level is None:
            return None
        if not 0 <= level <= self.get_max_level_limit():
            raise ConfigError(
                f"--max-level 必须在 0..{self.get_max_level_limit()} 之间，收到 {level}"
            )
        return level

    def get_default_max_level(self) -> int:
        return int(self._section("solver")["max_level"])

    def get_max_states(self) -> int:
        # 环境变量优先于配置文件
        raw = os.environ.get(MAX_STATES_ENV)
        if raw is not None:
            try:
                value = int(raw)
            except ValueError:
                raise ConfigError(f"{MAX_STATES_ENV} 必须是正整数，收到 '{raw}'")
            if value < 1:
                raise ConfigError(f"{MAX_STATES_ENV} 必须是正整数，收到 {value}")
            return value
        return int(self._section("solver")["max_states"])

    def get_word_max_level(self) -> int:
        return int(self._section("word")["max_level"])

    def get_output_format(self) -> str:
        return self._arg("format") or "text"

    def get_witness_out(self) -> Optional[str]:
        return self._arg("witness_out")

    def is_timing_enabled(self) -> bool:
        return bool(self._arg("timing"))

    def get_check_settings(self) -> Dict[str, Any]:
        """差分测试参数，命令行的 --seed/--cases/--max-size/--workers 覆盖配置"""
        settings = dict(self._section("check"))
        overrides = {
            "seed": self._arg("seed"),
            "case_count": self._arg("cases"),
            "max_size": self._arg("max_size"),
            "workers": self._arg("workers"),
        }
        for key, value in overrides.items():
            if value is not None:
                settings[key] = value
        if self._arg("max_level") is not None:
            settings["solve_level"] = self.get_max_level()
        return settings

    def get_regression_corpus_path(self) -> str:
        return os.path.join(os.path.dirname(self.config_path), "regression_corpus.json")

    def load_regression_corpus(self) -> list:
        path = self.get_regression_corpus_path()
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError:
            logger.warning(f"回归用例文件 {path} 未找到，跳过")
            return []
        except json.JSONDecodeError as e:
            raise ConfigError(f"回归用例文件格式错误: {e}")
        formulas = data.get("formulas", []) if isinstance(data, dict) else data
        if not all(isinstance(f, str) for f in formulas):
            raise ConfigError("回归用例必须是公式字符串列表")
        return formulas

    def get_log_level(self) -> int:
        # 检查 quiet / verbose 参数
        if self._arg("quiet"):
            return logging.ERROR
        verbose = self._arg("verbose") or 0
        if verbose >= 2:
            return logging.DEBUG
        if verbose == 1:
            return logging.INFO
        name = str(self._section("logging").get("level", "WARNING")).upper()
        level = logging.getLevelName(name)
        if not isinstance(level, int):
            raise ConfigError(f"未知的日志级别: {name}")
        return level

    @staticmethod
    def create_argument_parser() -> argparse.ArgumentParser:
        """创建命令行参数解析器"""
        parser = argparse.ArgumentParser(
            prog="OrdLtlTool",
            description="序数长度单词上的线性时态逻辑求解器",
            formatter_class=argparse.RawDescriptionHelpFormatter,
            epilog="""
示例用法:
  %(prog)s sat "G X T" --format json        # 可满足性判定，输出JSON
  %(prog)s sat "p U q" --witness-out w.json  # 保存见证单词
  %(prog)s eval "F p" word.json              # 在给定单词上求值
  %(prog)s dot "p U q" > automaton.dot       # 导出后继图
  %(prog)s valid "F p -> F p"                # 有效性判定
  %(prog)s equiv "X p" "p"                   # 等价性判定
  %(prog)s check --cases 50 --seed 7         # 差分测试
            """,
        )
        parser.add_argument("--config", metavar="PATH", help="配置文件路径")

        # 显示控制
        verbose_group = parser.add_mutually_exclusive_group()
        verbose_group.add_argument(
            "--verbose", "-v", action="count", default=0, help="详细输出 (-vv 输出调试信息)"
        )
        verbose_group.add_argument(
            "--quiet", "-q", action="store_true", help="安静模式 (只输出错误)"
        )

        common = argparse.ArgumentParser(add_help=False)
        common.add_argument(
            "--max-level", type=int, metavar="K", help="单词长度上界 ω^(K+1) 中的 K"
        )
        common.add_argument(
            "--format", choices=["text", "json"], default="text", help="输出格式"
        )
        common.add_argument("--timing", action="store_true", help="JSON输出中包含耗时")

        subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")
        subparsers.required = True

        sat = subparsers.add_parser("sat", parents=[common], help="可满足性判定")
        sat.add_argument("formula", help="公式文本")
        sat.add_argument("--witness-out", metavar="PATH", help="见证单词输出文件")

        evaluate = subparsers.add_parser("eval", help="在单词上求值")
        evaluate.add_argument("formula", help="公式文本")
        evaluate.add_argument("word", help="JSON单词文件")

        dot = subparsers.add_parser("dot", help="导出后继图 (DOT)")
        dot.add_argument("formula", help="公式文本")

        valid = subparsers.add_parser("valid", parents=[common], help="有效性判定")
        valid.add_argument("formula", help="公式文本")

        equiv = subparsers.add_parser("equiv", parents=[common], help="等价性判定")
        equiv.add_argument("left", help="左侧公式")
        equiv.add_argument("right", help="右侧公式")

        check = subparsers.add_parser("check", help="差分测试 (JSON lines 报告)")
        check.add_argument("--seed", type=int, help="随机种子")
        check.add_argument("--cases", type=int, metavar="N", help="生成用例数")
        check.add_argument("--max-size", type=int, metavar="N", help="公式大小上限")
        check.add_argument("--workers", type=int, metavar="N", help="并行进程数")
        check.add_argument("--max-level", type=int, metavar="K", help="求解层数")

        return parser


def setup_logging(config: AppConfig):
    """日志输出到 stderr，只在入口处调用一次"""
    logging.basicConfig(
        level=config.get_log_level(),
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )
