#!/usr/bin/env python3
"""
语义求值器
独立于自动机的真值判定：给定单词与公式，判断公式在位置0是否成立。
用作求解器差分验证的基准。

语义（严格 Until）:
    X ψ 在 γ 成立 ⇔ γ+1 < |w| 且 ψ 在 γ+1 成立
    ψ1 U ψ2 在 γ 成立 ⇔ 存在 γ < β < |w|，ψ2 在 β 成立，且 ψ1 在所有 γ < γ' < β 成立

实现方式是沿单词结构向后传递闭包赋值（transfer）。OmegaPow(v) 的各块起点后缀相同，
共享同一赋值，用三值不动点迭代求出（fix_loop），迭代后仍未知的 Until 由极限判定规则决定。
"""

import functools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Tuple

from errors import OracleInconsistencyError
from formula import (
    And,
    Atom,
    Closure,
    Formula,
    Next,
    Not,
    Top,
    Until,
    closure,
    normalize,
)
from ordinal_word import Cat, Letter, Single, Word, finite_letters

logger = logging.getLogger(__name__)


class TruthValue3(Enum):
    FALSE = 0
    TRUE = 1
    UNKNOWN = 2

    @staticmethod
    def from_bool(value: bool) -> "TruthValue3":
        return TruthValue3.TRUE if value else TruthValue3.FALSE

    def is_known(self) -> bool:
        return self is not TruthValue3.UNKNOWN

    def to_bool(self) -> bool:
        if self is TruthValue3.UNKNOWN:
            raise OracleInconsistencyError("UNKNOWN 不能转换为布尔值")
        return self is TruthValue3.TRUE

    def __invert__(self) -> "TruthValue3":
        if self is TruthValue3.TRUE:
            return TruthValue3.FALSE
        if self is TruthValue3.FALSE:
            return TruthValue3.TRUE
        return self

    def __and__(self, other: "TruthValue3") -> "TruthValue3":
        # 强 Kleene 合取：FALSE 优先
        if self is TruthValue3.FALSE or other is TruthValue3.FALSE:
            return TruthValue3.FALSE
        if self is TruthValue3.UNKNOWN or other is TruthValue3.UNKNOWN:
            return TruthValue3.UNKNOWN
        return TruthValue3.TRUE

    def __or__(self, other: "TruthValue3") -> "TruthValue3":
        if self is TruthValue3.TRUE or other is TruthValue3.TRUE:
            return TruthValue3.TRUE
        if self is TruthValue3.UNKNOWN or other is TruthValue3.UNKNOWN:
            return TruthValue3.UNKNOWN
        return TruthValue3.FALSE

    def __str__(self) -> str:
        return self.name


TRUE = TruthValue3.TRUE
FALSE = TruthValue3.FALSE
UNKNOWN = TruthValue3.UNKNOWN

Values = Tuple[TruthValue3, ...]


@dataclass(frozen=True)
class ClosureAssignment:
    """
    闭包成员到三值真值的映射。terminal 为真表示"没有后继位置"：
    此时所有 Next 与 Until 成员均为假。
    """

    closure: Closure
    values: Values
    terminal: bool = False

    @classmethod
    def unknown(cls, c: Closure) -> "ClosureAssignment":
        return cls(c, (UNKNOWN,) * len(c))

    @classmethod
    def end(cls, c: Closure) -> "ClosureAssignment":
        values = []
        for formula in c.members:
            if isinstance(formula, Top):
                values.append(TRUE)
            elif isinstance(formula, Not) and isinstance(formula.operand, Top):
                values.append(FALSE)
            elif isinstance(formula, (Next, Until)):
                values.append(FALSE)
            elif isinstance(formula, Not) and isinstance(formula.operand, (Next, Until)):
                values.append(TRUE)
            else:
                values.append(UNKNOWN)
        return cls(c, tuple(values), terminal=True)

    def __getitem__(self, formula: Formula) -> TruthValue3:
        return self.values[self.closure.index(formula)]

    def is_complete(self) -> bool:
        return self.terminal or UNKNOWN not in self.values


@dataclass(frozen=True)
class _Summary:
    """一段单词的求值摘要：起点赋值，以及每个成员在所有位置上的合取与析取"""

    start: Values
    all_true: Values
    any_true: Values


_TOP, _ATOM, _NOT, _AND, _NEXT, _UNTIL = range(6)


def _conjoin(left: Values, right: Values) -> Values:
    return tuple(a & b for a, b in zip(left, right))


def _disjoin(left: Values, right: Values) -> Values:
    return tuple(a | b for a, b in zip(left, right))


class OracleEvaluator:
    """
    针对固定闭包的求值器，带按 (单词, 后继赋值) 的记忆表。
    记忆表只属于单个实例，不跨调用共享。
    """

    def __init__(self, c: Closure):
        self.closure = c
        self.max_loop_iterations = 0
        self._memo: Dict[Tuple[Word, Values, bool], _Summary] = {}
        self._ops: List[Tuple[int, object, int, int]] = []
        for formula in c.members:
            index = c.index
            if isinstance(formula, Top):
                self._ops.append((_TOP, None, -1, -1))
            elif isinstance(formula, Atom):
                self._ops.append((_ATOM, formula.name, -1, -1))
            elif isinstance(formula, Not):
                self._ops.append((_NOT, None, index(formula.operand), -1))
            elif isinstance(formula, And):
                self._ops.append((_AND, None, index(formula.left), index(formula.right)))
            elif isinstance(formula, Next):
                self._ops.append((_NEXT, None, index(formula.operand), -1))
            else:
                self._ops.append((_UNTIL, None, index(formula.left), index(formula.right)))
        self._untils = [i for i, op in enumerate(self._ops) if op[0] == _UNTIL]

    def _assignment(self, values: Values) -> ClosureAssignment:
        return ClosureAssignment(self.closure, values)

    def _step(self, letter: Letter, after: ClosureAssignment) -> Values:
        """单个位置的向后一步"""
        nxt = after.values
        values: List[TruthValue3] = []
        for i, (kind, name, a, b) in enumerate(self._ops):
            if kind == _TOP:
                value = TRUE
            elif kind == _ATOM:
                value = TruthValue3.from_bool(name in letter)
            elif kind == _NOT:
                value = ~values[a]
            elif kind == _AND:
                value = values[a] & values[b]
            elif after.terminal:
                value = FALSE
            elif kind == _NEXT:
                value = nxt[a]
            else:
                value = nxt[b] | (nxt[a] & nxt[i])
            values.append(value)
        return tuple(values)

    def summarize(self, segment: Word, after: ClosureAssignment) -> _Summary:
        key = (segment, after.values, after.terminal)
        cached = self._memo.get(key)
        if cached is not None:
            return cached
        if isinstance(segment, Single):
            start = self._step(segment.letter, after)
            summary = _Summary(start, start, start)
        elif isinstance(segment, Cat):
            summary = None
            current = after
            for part in reversed(segment.parts):
                part_summary = self.summarize(part, current)
                if summary is None:
                    summary = part_summary
                else:
                    summary = _Summary(
                        part_summary.start,
                        _conjoin(part_summary.all_true, summary.all_true),
                        _disjoin(part_summary.any_true, summary.any_true),
                    )
                current = self._assignment(part_summary.start)
        else:
            loop_start, traversal = self._fix_loop(segment.body, after)
            # 所有块完全相同，整段的合取/析取等于一次遍历的结果
            summary = _Summary(loop_start, traversal.all_true, traversal.any_true)
        self._memo[key] = summary
        return summary

    def transfer(self, segment: Word, after: ClosureAssignment) -> ClosureAssignment:
        return self._assignment(self.summarize(segment, after).start)

    def _limit_value(self, until_index: int, traversal: _Summary, after_limit: ClosureAssignment) -> TruthValue3:
        """极限判定规则：ψ1 在一次遍历中处处为真，且在极限位置 ψ2 成立或 ψ1 与 u 同时成立"""
        _, _, a, b = self._ops[until_index]
        if after_limit.terminal:
            continues = FALSE
        else:
            at_limit = after_limit.values
            continues = at_limit[b] | (at_limit[a] & at_limit[until_index])
        return traversal.all_true[a] & continues

    def _fix_loop(self, body: Word, after_limit: ClosureAssignment) -> Tuple[Values, _Summary]:
        n = len(self.closure)
        current: Values = (UNKNOWN,) * n
        pins: Dict[int, TruthValue3] = {}
        changes = 0
        while True:
            # 三值迭代直到不动点，信息只增不减
            while True:
                traversal = self.summarize(body, self._assignment(current))
                updated = list(traversal.start)
                for index, value in pins.items():
                    if updated[index].is_known() and updated[index] is not value:
                        raise OracleInconsistencyError(
                            f"{self.closure.members[index]} 的固定值被推翻"
                        )
                    updated[index] = value
                updated = tuple(updated)
                for old, new in zip(current, updated):
                    if old.is_known() and old is not new:
                        raise OracleInconsistencyError("三值迭代出现真值翻转")
                if updated == current:
                    break
                changes += 1
                if changes > n:
                    raise OracleInconsistencyError(f"不动点迭代超过 {n} 轮仍未收敛")
                current = updated
            # 从小到大处理剩余未知的 Until：ψ2 在整个循环中都不成立时由极限规则决定
            resolved: Dict[int, TruthValue3] = {}
            for index in self._untils:
                if current[index].is_known():
                    continue
                _, _, a, b = self._ops[index]
                if traversal.any_true[b] is not FALSE or not traversal.all_true[a].is_known():
                    continue
                value = self._limit_value(index, traversal, after_limit)
                if value.is_known():
                    resolved[index] = value
            if not resolved:
                break
            pins.update(resolved)
            current = tuple(pins.get(i, v) for i, v in enumerate(current))
        self.max_loop_iterations = max(self.max_loop_iterations, changes)
        logger.debug(f"循环不动点: {changes} 轮迭代, {len(pins)} 个极限判定")

        if after_limit.is_complete() and UNKNOWN in current:
            unresolved = [
                str(self.closure.members[i]) for i, v in enumerate(current) if v is UNKNOWN
            ]
            raise OracleInconsistencyError(f"循环起点仍有未决成员: {unresolved}")
        # 校验：去掉固定值后再传递一次必须回到同一赋值
        check = self.summarize(body, self._assignment(current))
        if check.start != current:
            raise OracleInconsistencyError("极限判定结果不是 transfer 的不动点")
        return current, check

    def fix_loop(self, body: Word, after_limit: ClosureAssignment) -> ClosureAssignment:
        return self._assignment(self._fix_loop(body, after_limit)[0])


def transfer(segment: Word, after: ClosureAssignment) -> ClosureAssignment:
    """由紧随 segment 之后位置的赋值求出 segment 第一个位置的赋值"""
    return OracleEvaluator(after.closure).transfer(segment, after)


def fix_loop(body: Word, after_limit: ClosureAssignment) -> ClosureAssignment:
    """OmegaPow(body) 各块起点共享的赋值"""
    return OracleEvaluator(after_limit.closure).fix_loop(body, after_limit)


def evaluate(formula: Formula, word: Word) -> bool:
    """判断 word 是否属于 Mod(formula)，即公式在位置0成立"""
    c = closure(formula).with_top()
    evaluator = OracleEvaluator(c)
    result = evaluator.transfer(word, ClosureAssignment.end(c))
    value = result[normalize(formula)]
    if not value.is_known():
        raise OracleInconsistencyError(f"{formula} 在位置0的真值未决")
    return value.to_bool()


def eval_naive_finite(formula: Formula, word: Word, pos: int = 0) -> bool:
    """
    有限单词上按定义直接枚举位置求值，不与 evaluate 共享代码。
    代价是指数级的，只用于交叉验证。
    """
    letters = finite_letters(word)
    if not 0 <= pos < len(letters):
        raise IndexError(f"位置 {pos} 超出有限单词长度 {len(letters)}")

    @functools.lru_cache(maxsize=None)
    def holds(f: Formula, i: int) -> bool:
        if isinstance(f, Top):
            return True
        if isinstance(f, Atom):
            return f.name in letters[i]
        if isinstance(f, Not):
            return not holds(f.operand, i)
        if isinstance(f, And):
            return holds(f.left, i) and holds(f.right, i)
        if isinstance(f, Next):
            return i + 1 < len(letters) and holds(f.operand, i + 1)
        if isinstance(f, Until):
            for j in range(i + 1, len(letters)):
                if holds(f.right, j) and all(holds(f.left, k) for k in range(i + 1, j)):
                    return True
            return False
        raise TypeError(f"不是核心公式: {f!r}")

    return holds(formula, pos)

