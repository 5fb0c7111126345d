#!/usr/bin/env python3
"""
序数时态逻辑求解工具 - 统一入口

退出码:
    0  正常得出结论
    1  差分测试存在失败用例
    2  公式、单词文件或配置错误
    3  状态数超过限制
    4  内部校验失败（见证单词未通过求值、求值器不一致、骨架错误）
"""

import json
import logging
import os
import sys

sys.path.append(os.path.join(os.path.dirname(os.path.abspath(__file__)), "src"))
from app_config import AppConfig, setup_logging
from errors import (
    ConfigError,
    FormulaSyntaxError,
    OracleInconsistencyError,
    OrdinalError,
    SkeletonError,
    StateExplosionError,
    WitnessValidationError,
    WordError,
)
from eval_oracle import evaluate
from formula import Formula, iff, parse
from ordinal import format_ordinal
from ordinal_automaton import build, to_dot
from ordinal_word import dumps, load_word, to_json
from solver_api import Verdict, counterexample, default_level, satisfiable
from testkit import GenConfig, differential_run

logger = logging.getLogger("OrdLtlTool")

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT_ERROR = 2
EXIT_RESOURCE = 3
EXIT_INTERNAL = 4


def _solver_options(config: AppConfig) -> dict:
    return {
        "max_states": config.get_max_states(),
        "max_level_limit": config.get_max_level_limit(),
    }


def _level_for(formula: Formula, config: AppConfig) -> int:
    level = config.get_max_level()
    if level is None:
        level = default_level(formula, config.get_default_max_level())
    return level


def _print_counterexample_result(verdict: Verdict, key: str, holds: bool, config: AppConfig):
    if config.get_output_format() == "json":
        result = {
            "schemaVersion": 1,
            key: holds,
            "bound": format_ordinal(verdict.bound),
            "level": verdict.level,
            "counterexample": to_json(verdict.witness) if verdict.witness is not None else None,
        }
        print(json.dumps(result, ensure_ascii=False))
        return
    print(f"{key}: {'true' if holds else 'false'} (bound {format_ordinal(verdict.bound)})")
    if verdict.witness is not None:
        print(f"counterexample: {dumps(verdict.witness)}")


def cmd_sat(formula_text: str, config: AppConfig) -> int:
    formula = parse(formula_text)
    verdict = satisfiable(formula, _level_for(formula, config), **_solver_options(config))

    witness_out = config.get_witness_out()
    if witness_out and verdict.witness is not None:
        try:
            with open(witness_out, "w", encoding="utf-8") as f:
                json.dump(to_json(verdict.witness), f, ensure_ascii=False)
                f.write("\n")
        except OSError as e:
            raise ConfigError(f"无法写入见证单词文件 {witness_out}: {e.strerror}")
        logger.info(f"见证单词已保存到 {witness_out}")

    if config.get_output_format() == "json":
        print(verdict.dumps(timing=config.is_timing_enabled()))
    else:
        print(verdict.describe())
    return EXIT_OK


def cmd_eval(formula_text: str, word_path: str, config: AppConfig) -> int:
    formula = parse(formula_text)
    word = load_word(word_path, max_level=config.get_word_max_level())
    print("true" if evaluate(formula, word) else "false")
    return EXIT_OK


def cmd_dot(formula_text: str, config: AppConfig) -> int:
    automaton = build(parse(formula_text), config.get_max_states())
    sys.stdout.write(to_dot(automaton))
    return EXIT_OK


def cmd_valid(formula_text: str, config: AppConfig) -> int:
    formula = parse(formula_text)
    verdict = counterexample(formula, _level_for(formula, config), **_solver_options(config))
    _print_counterexample_result(verdict, "valid", not verdict.is_sat, config)
    return EXIT_OK


def cmd_equiv(left_text: str, right_text: str, config: AppConfig) -> int:
    formula = iff(parse(left_text), parse(right_text))
    verdict = counterexample(formula, _level_for(formula, config), **_solver_options(config))
    _print_counterexample_result(verdict, "equivalent", not verdict.is_sat, config)
    return EXIT_OK


def cmd_check(config: AppConfig) -> int:
    settings = config.get_check_settings()
    cfg = GenConfig(
        seed=settings["seed"],
        max_size=settings["max_size"],
        prop_count=settings["prop_count"],
        max_level=settings["max_word_level"],
        case_count=settings["case_count"],
        solve_level=settings["solve_level"],
        lasso_draws=settings["lasso_draws"],
        exhaustive_length=settings["exhaustive_length"],
        naive_draws=settings["naive_draws"],
        workers=settings["workers"],
        max_states=config.get_max_states(),
    )
    report = differential_run(cfg, config.load_regression_corpus())
    sys.stdout.write(report.to_jsonl())
    logger.info(f"差分测试汇总: {json.dumps(report.summary(), ensure_ascii=False)}")
    return EXIT_OK if not report.failures else EXIT_CHECK_FAILED


def _dispatch(args, config: AppConfig) -> int:
    if args.command == "sat":
        return cmd_sat(args.formula, config)
    if args.command == "eval":
        return cmd_eval(args.formula, args.word, config)
    if args.command == "dot":
        return cmd_dot(args.formula, config)
    if args.command == "valid":
        return cmd_valid(args.formula, config)
    if args.command == "equiv":
        return cmd_equiv(args.left, args.right, config)
    return cmd_check(config)


def main(argv=None) -> int:
    """主函数，返回退出码"""
    parser = AppConfig.create_argument_parser()
    args = parser.parse_args(argv)

    try:
        config = AppConfig(args=args)
        setup_logging(config)
        return _dispatch(args, config)
    except (FormulaSyntaxError, WordError, OrdinalError, ConfigError) as e:
        print(f"错误: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except StateExplosionError as e:
        print(f"拒绝执行: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except (WitnessValidationError, OracleInconsistencyError, SkeletonError) as e:
        print(f"内部错误: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
