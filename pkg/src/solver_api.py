#!/usr/bin/env python3
"""
求解接口
可满足性、有效性与等价性判定。每个 SAT 结论的见证单词都先经过语义求值器校验再返回。
所有结论都相对于长度上界 ω^(K+1)，机器可读输出中以 "bound" 字段注明。
"""

import json
import logging
import time
from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

from errors import ConfigError, WitnessValidationError
from eval_oracle import evaluate
from formula import Formula, iff, neg, render, size
from ordinal import Ordinal, format_ordinal
from ordinal_automaton import (
    DEFAULT_MAX_STATES,
    EmptinessSearch,
    build,
    extract_witness,
)
from ordinal_word import Word, dumps, to_json

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_MAX_LEVEL = 3
MAX_LEVEL_LIMIT = 4


class Status(Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"


@dataclass(frozen=True)
class SolverStats:
    state_count: int
    fact_count: int
    elapsed_millis: int


@dataclass(frozen=True)
class Verdict:
    status: Status
    witness: Optional[Word]
    level: Optional[int]
    stats: SolverStats
    max_level: int

    def __post_init__(self):
        sat = self.status is Status.SAT
        if sat != (self.witness is not None) or sat != (self.level is not None):
            raise ValueError("SAT 结论必须同时带有见证单词与层数")

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT

    @property
    def bound(self) -> Ordinal:
        """结论所针对的长度上界 ω^(K+1)"""
        return Ordinal.omega_power(self.max_level + 1)

    def to_json(self, timing: bool = False) -> Dict[str, Any]:
        stats: Dict[str, Any] = {
            "stateCount": self.stats.state_count,
            "factCount": self.stats.fact_count,
        }
        if timing:
            stats["elapsedMillis"] = self.stats.elapsed_millis
        return {
            "schemaVersion": SCHEMA_VERSION,
            "status": self.status.value,
            "bound": format_ordinal(self.bound),
            "level": self.level,
            "witness": to_json(self.witness) if self.witness is not None else None,
            "stats": stats,
        }

    def dumps(self, timing: bool = False) -> str:
        return json.dumps(self.to_json(timing), ensure_ascii=False)

    def describe(self) -> str:
        """文本格式的结论"""
        lines = [f"{self.status.value} (bound {format_ordinal(self.bound)})"]
        if self.witness is not None:
            lines.append(f"level: {self.level}")
            lines.append(f"witness: {dumps(self.witness)}")
        lines.append(
            f"states: {self.stats.state_count}, facts: {self.stats.fact_count}"
        )
        return "\n".join(lines)


def default_level(formula: Formula, configured: int = DEFAULT_MAX_LEVEL) -> int:
    """未指定层数时取 min(配置值, 公式大小)"""
    return min(configured, size(formula))


def _check_level(max_level: int, max_level_limit: int):
    if max_level < 0:
        raise ConfigError(f"层数不能为负: {max_level}")
    if max_level > max_level_limit:
        raise ConfigError(f"层数 {max_level} 超过上限 {max_level_limit}")


def satisfiable(
    formula: Formula,
    max_level: int = DEFAULT_MAX_LEVEL,
    max_states: int = DEFAULT_MAX_STATES,
    max_level_limit: int = MAX_LEVEL_LIMIT,
) -> Verdict:
    """判定是否存在长度小于 ω^(max_level+1) 的模型"""
    _check_level(max_level, max_level_limit)
    started = time.perf_counter()
    automaton = build(formula, max_states)
    search = EmptinessSearch(automaton)
    result = search.run(max_level)

    witness = None
    level = None
    if result is not None:
        skeleton, level = result
        witness = extract_witness(skeleton)
        if not evaluate(formula, witness):
            raise WitnessValidationError(
                f"见证单词 {dumps(witness)} 不满足公式 {render(formula)}"
            )

    elapsed = int((time.perf_counter() - started) * 1000)
    verdict = Verdict(
        status=Status.SAT if witness is not None else Status.UNSAT,
        witness=witness,
        level=level,
        stats=SolverStats(len(automaton.states), search.fact_count, elapsed),
        max_level=max_level,
    )
    logger.info(f"{render(formula)}: {verdict.status.value}, 层数 {level}, 用时 {elapsed}ms")
    return verdict


def counterexample(formula: Formula, max_level: int = DEFAULT_MAX_LEVEL, **options) -> Verdict:
    """对 ¬formula 求解；SAT 时见证单词就是反例"""
    return satisfiable(neg(formula), max_level, **options)


def valid(formula: Formula, max_level: int = DEFAULT_MAX_LEVEL, **options) -> bool:
    """有效性：¬formula 在长度上界内不可满足"""
    return not counterexample(formula, max_level, **options).is_sat


def equivalent(
    left: Formula, right: Formula, max_level: int = DEFAULT_MAX_LEVEL, **options
) -> bool:
    verdict = counterexample(iff(left, right), max_level, **options)
    if verdict.is_sat:
        logger.info(
            f"{render(left)} 与 {render(right)} 不等价，区分单词: {dumps(verdict.witness)}"
        )
    return not verdict.is_sat


def check_duality(formula: Formula, max_level: int = DEFAULT_MAX_LEVEL, **options) -> bool:
    """φ 与 ¬φ 不应同时不可满足；同时出现时记录警告并返回 False"""
    positive = satisfiable(formula, max_level, **options)
    negative = satisfiable(neg(formula), max_level, **options)
    if positive.is_sat or negative.is_sat:
        return True
    logger.warning(
        f"{render(formula)} 与其否定在 bound {format_ordinal(positive.bound)} 内都不可满足"
    )
    return False
