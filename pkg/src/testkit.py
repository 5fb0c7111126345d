#!/usr/bin/env python3
"""
随机生成与差分测试
公式与单词生成器按 (种子, 用例编号, 流编号) 派生独立的 Philox 随机流，
因此每个用例都可以单独复现，也可以并行执行。

差分测试对每个公式:
    SAT   -> 见证单词必须通过语义求值（求解器内部已强制校验）
    UNSAT -> 穷举长度不超过 exhaustive_length 的有限单词，并随机抽取 lasso_draws 个套索单词，
             都不能满足公式
    此外在若干有限单词上比较 evaluate 与 eval_naive_finite。
UNSAT 的佐证基于抽样，不是证明。
"""

import itertools
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from errors import (
    OracleInconsistencyError,
    OrdLtlError,
    SkeletonError,
    StateExplosionError,
    WitnessValidationError,
)
from eval_oracle import ClosureAssignment, OracleEvaluator, eval_naive_finite, evaluate
from formula import (
    TOP,
    Atom,
    Formula,
    Next,
    Until,
    And,
    closure,
    neg,
    normalize,
    parse,
    propositions,
    render,
)
from ordinal_automaton import DEFAULT_MAX_STATES
from ordinal_word import OmegaPow, Single, Word, cat, dumps, letter_count
from solver_api import satisfiable

logger = logging.getLogger(__name__)

PROPOSITIONS = ("p", "q", "r")

# 随机流编号
_FORMULA_STREAM = 0
_LASSO_STREAM = 1
_FINITE_STREAM = 2

UNSAT_NOTE = "UNSAT 结论的佐证来自穷举有限单词与随机套索单词抽样，不是证明"


@dataclass(frozen=True)
class GenConfig:
    seed: int = 42
    max_size: int = 12
    prop_count: int = 3
    max_level: int = 2
    case_count: int = 500
    solve_level: int = 3
    lasso_draws: int = 1000
    exhaustive_length: int = 6
    naive_draws: int = 20
    workers: int = 1
    max_states: int = DEFAULT_MAX_STATES

    def __post_init__(self):
        if self.max_size < 1 or self.case_count < 0:
            raise ValueError("max_size 必须为正，case_count 不能为负")
        if not 1 <= self.prop_count <= len(PROPOSITIONS):
            raise ValueError(f"prop_count 必须在 1..{len(PROPOSITIONS)} 之间")
        if self.max_level < 0:
            raise ValueError("max_level 不能为负")

    @property
    def propositions(self) -> Tuple[str, ...]:
        return PROPOSITIONS[: self.prop_count]


def _rng(cfg: GenConfig, i: int, *stream: int) -> np.random.Generator:
    return np.random.Generator(
        np.random.Philox(np.random.SeedSequence([cfg.seed, i, *stream]))
    )


# ---------------------------------------------------------------------------
# 公式生成
# ---------------------------------------------------------------------------


def _gen_formula(rng: np.random.Generator, props: Sequence[str], budget: int) -> Formula:
    """生成大小不超过 budget 的公式"""
    if budget == 1 or (budget < 4 and rng.random() < 0.3):
        if rng.random() < 0.2:
            return TOP
        return Atom(props[int(rng.integers(len(props)))])
    kinds = ["not", "next"] if budget == 2 else ["not", "next", "and", "until"]
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "not":
        return neg(_gen_formula(rng, props, budget - 1))
    if kind == "next":
        return Next(_gen_formula(rng, props, budget - 1))
    left_budget = int(rng.integers(1, budget - 1))
    left = _gen_formula(rng, props, left_budget)
    right = _gen_formula(rng, props, budget - 1 - left_budget)
    return And(left, right) if kind == "and" else Until(left, right)


def gen_formula(cfg: GenConfig, i: int) -> Formula:
    """第 i 个用例的公式，大小不超过 cfg.max_size"""
    rng = _rng(cfg, i, _FORMULA_STREAM)
    budget = int(rng.integers(1, cfg.max_size + 1))
    return _gen_formula(rng, cfg.propositions, budget)


# ---------------------------------------------------------------------------
# 单词生成
# ---------------------------------------------------------------------------


def _random_letter(rng: np.random.Generator, props: Sequence[str]) -> Single:
    return Single(frozenset(p for p in props if rng.random() < 0.5))


def _gen_word(
    rng: np.random.Generator, props: Sequence[str], level_left: int, budget: int
) -> Word:
    """生成 OmegaPow 嵌套不超过 level_left、字母数不超过 budget 的单词"""
    pieces: List[Word] = []
    remaining = budget
    for _ in range(int(rng.integers(1, 4))):
        if remaining == 0:
            break
        if level_left > 0 and rng.random() < 0.45:
            inner_budget = int(rng.integers(1, remaining + 1))
            piece: Word = OmegaPow(_gen_word(rng, props, level_left - 1, inner_budget))
        else:
            piece = _random_letter(rng, props)
        remaining -= letter_count(piece)
        pieces.append(piece)
    return cat(*pieces)


def gen_word(cfg: GenConfig, i: int, draw: int = 0, stream: int = _LASSO_STREAM) -> Word:
    """第 i 个用例的第 draw 个单词，嵌套层级不超过 cfg.max_level"""
    rng = _rng(cfg, i, stream, draw)
    return _gen_word(rng, cfg.propositions, cfg.max_level, cfg.max_size)


# ---------------------------------------------------------------------------
# 有限模型穷举
# ---------------------------------------------------------------------------


def _alphabet(props: Iterable[str]) -> List[frozenset]:
    names = sorted(props)
    return [
        frozenset(combo)
        for n in range(len(names) + 1)
        for combo in itertools.combinations(names, n)
    ]


def finite_model_exists(formula: Formula, max_length: int) -> Optional[Word]:
    """
    在公式命题上的所有长度不超过 max_length 的有限单词中找模型。
    按长度逐层做向后传递，相同的位置0赋值只扩展一次；找不到时返回 None。
    """
    formula = normalize(formula)
    c = closure(formula).with_top()
    evaluator = OracleEvaluator(c)
    target = c.index(formula)
    alphabet = _alphabet(propositions(formula))

    end = ClosureAssignment.end(c)
    frontier: List[Tuple[ClosureAssignment, Optional[Word]]] = [(end, None)]
    seen = set()
    for _ in range(max_length):
        next_frontier = []
        for after, suffix in frontier:
            for letter in alphabet:
                assignment = evaluator.transfer(Single(letter), after)
                if assignment in seen:
                    continue
                seen.add(assignment)
                word = Single(letter) if suffix is None else cat(Single(letter), suffix)
                if assignment.values[target].to_bool():
                    return word
                next_frontier.append((assignment, word))
        frontier = next_frontier
        if not frontier:
            break
    return None


# ---------------------------------------------------------------------------
# 差分测试
# ---------------------------------------------------------------------------


def _record(
    cfg: GenConfig, i: int, formula: Formula, status: str, ok: bool, detail: str, level=None
) -> Dict[str, Any]:
    # 每条记录带上 seed，单独一行即可用 check --seed 复现
    return {
        "seed": cfg.seed,
        "i": i,
        "formula": render(formula),
        "status": status,
        "ok": ok,
        "detail": detail,
        "level": level,
    }


def _corroborate_unsat(cfg: GenConfig, i: int, formula: Formula) -> Optional[str]:
    model = finite_model_exists(formula, cfg.exhaustive_length)
    if model is not None:
        return f"有限模型: {dumps(model)}"
    lasso_cfg = replace(cfg, max_level=min(cfg.max_level, 2))
    for draw in range(cfg.lasso_draws):
        word = gen_word(lasso_cfg, i, draw)
        if evaluate(formula, word):
            return f"套索模型: {dumps(word)}"
    return None


def _compare_oracles(cfg: GenConfig, i: int, formula: Formula) -> Optional[str]:
    finite_cfg = replace(cfg, max_level=0)
    for draw in range(cfg.naive_draws):
        word = gen_word(finite_cfg, i, draw, stream=_FINITE_STREAM)
        expected = eval_naive_finite(formula, word, 0)
        if evaluate(formula, word) != expected:
            return f"evaluate 与 eval_naive_finite 不一致: {dumps(word)}"
    return None


def run_case(cfg: GenConfig, i: int, formula: Formula) -> Dict[str, Any]:
    """执行单个差分用例，失败作为数据返回"""
    try:
        verdict = satisfiable(formula, cfg.solve_level, max_states=cfg.max_states)
    except StateExplosionError as e:
        return _record(cfg, i, formula, "SKIPPED", True, str(e))
    except (WitnessValidationError, OracleInconsistencyError, SkeletonError) as e:
        return _record(cfg, i, formula, "ERROR", False, f"{type(e).__name__}: {e}")

    try:
        if verdict.is_sat:
            detail = dumps(verdict.witness)
            problem = None
        else:
            detail = UNSAT_NOTE
            problem = _corroborate_unsat(cfg, i, formula)
        problem = problem or _compare_oracles(cfg, i, formula)
    except OrdLtlError as e:
        problem = f"{type(e).__name__}: {e}"

    if problem is not None:
        return _record(cfg, i, formula, verdict.status.value, False, problem, verdict.level)
    return _record(cfg, i, formula, verdict.status.value, True, detail, verdict.level)


def _run_case_item(item: Tuple[GenConfig, int, str]) -> Dict[str, Any]:
    cfg, i, text = item
    return run_case(cfg, i, parse(text))


@dataclass
class Report:
    records: List[Dict[str, Any]] = field(default_factory=list)
    shrunk: Optional[Dict[str, Any]] = None
    seed: Optional[int] = None

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [r for r in self.records if not r["ok"]]

    @property
    def level_histogram(self) -> Dict[int, int]:
        """SAT 用例按见证层数统计"""
        histogram: Dict[int, int] = {}
        for record in self.records:
            if record["status"] == "SAT":
                histogram[record["level"]] = histogram.get(record["level"], 0) + 1
        return dict(sorted(histogram.items()))

    @property
    def max_sat_level(self) -> Optional[int]:
        levels = list(self.level_histogram)
        return max(levels) if levels else None

    def to_jsonl(self) -> str:
        """每个用例一行，最后一行是 {"summary": ...}"""
        lines = [json.dumps(r, ensure_ascii=False) for r in self.records]
        lines.append(json.dumps({"summary": self.summary()}, ensure_ascii=False))
        return "".join(line + "\n" for line in lines)

    def summary(self) -> Dict[str, Any]:
        return {
            "seed": self.seed,
            "cases": len(self.records),
            "failures": len(self.failures),
            "maxSatLevel": self.max_sat_level,
            "levelHistogram": {str(k): v for k, v in self.level_histogram.items()},
            "shrunk": self.shrunk,
            "note": UNSAT_NOTE,
        }


def _cases(cfg: GenConfig, corpus: Sequence[str]) -> List[Tuple[GenConfig, int, str]]:
    items = [(cfg, i, render(gen_formula(cfg, i))) for i in range(cfg.case_count)]
    for k, text in enumerate(corpus):
        items.append((cfg, cfg.case_count + k, text))
    return items


def _execute(cfg: GenConfig, items: List[Tuple[GenConfig, int, str]]) -> List[Dict[str, Any]]:
    if cfg.workers > 1:
        # map 保持提交顺序，报告与并行度无关
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            return list(pool.map(_run_case_item, items))
    return [_run_case_item(item) for item in items]


def shrink(cfg: GenConfig) -> Optional[Dict[str, Any]]:
    """逐步减小 max_size 重新生成，返回最小规模下的第一个失败用例"""
    smallest = None
    for max_size in range(cfg.max_size - 1, 0, -1):
        smaller = replace(cfg, max_size=max_size, workers=1)
        found = None
        for item in _cases(smaller, ()):
            record = _run_case_item(item)
            if not record["ok"]:
                found = dict(record, max_size=max_size)
                break
        if found is None:
            break
        smallest = found
    return smallest


def differential_run(cfg: GenConfig, corpus: Sequence[str] = (), shrink_failures: bool = True) -> Report:
    """按用例编号顺序执行全部用例；corpus 中的公式编号接在生成用例之后"""
    records = _execute(cfg, _cases(cfg, corpus))
    report = Report(records, seed=cfg.seed)
    for failure in report.failures:
        logger.warning(f"差分失败 #{failure['i']}: {failure['formula']} -> {failure['detail']}")
    if shrink_failures and any(not r["ok"] for r in records[: cfg.case_count]):
        report.shrunk = shrink(cfg)
        if report.shrunk is not None:
            logger.warning(
                f"最小失败用例 (max_size={report.shrunk['max_size']}): {report.shrunk['formula']}"
            )
    return report
