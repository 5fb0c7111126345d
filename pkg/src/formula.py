#!/usr/bin/env python3
"""
公式核心模块
未来时线性时态逻辑的语法树、解析与打印、子公式与闭包计算、极大一致集枚举。

核心语法树只包含六种构造子: Top, Atom, Not, And, Next, Until。
False, Or, Implies, Iff, F, G, R, WX 在解析时展开:

    False  ≡ ¬⊤
    α ∨ β  ≡ ¬(¬α ∧ ¬β)
    α → β  ≡ ¬(α ∧ ¬β)
    α ↔ β  ≡ (α → β) ∧ (β → α)
    F α    ≡ α ∨ (⊤ U α)        （自反）
    G α    ≡ ¬F¬α
    α R β  ≡ ¬(¬α U ¬β)
    WX α   ≡ ¬X⊤ ∨ X α

Until 是严格的：满足位置必须严格在求值位置之后。
取反时消去双重否定，因此核心语法树中不会出现 ¬¬χ。

表面语法（优先级由高到低）: 一元运算 > U/R（右结合）> & > | > ->（右结合）> <->（左结合）。
``F`` 后面紧跟可以开始一元公式的记号时是"最终"算子，否则是常量假。
"""

import contextlib
import functools
import itertools
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Set, Tuple

from errors import FormulaSyntaxError

PROPOSITION_PATTERN = re.compile(r"^[a-z][a-z0-9_]*$")

# 解析时括号、一元算子与右结合算子的嵌套上限
MAX_NESTING = 64
# 展开后语法树的深度上限；打印与闭包计算按深度递归
MAX_DEPTH = 256
SIZE_CACHE_LIMIT = 4096


class Formula:
    """公式语法树基类"""

    __slots__ = ()

    def __str__(self) -> str:
        return render(self)


@dataclass(frozen=True)
class Top(Formula):
    pass


@dataclass(frozen=True)
class Atom(Formula):
    name: str

    def __post_init__(self):
        if not PROPOSITION_PATTERN.match(self.name):
            raise ValueError(f"非法命题名: '{self.name}'")


@dataclass(frozen=True)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True)
class Until(Formula):
    left: Formula
    right: Formula


TOP = Top()
FALSE = Not(TOP)


# ---------------------------------------------------------------------------
# 派生算子
# ---------------------------------------------------------------------------


def neg(formula: Formula) -> Formula:
    """取反，消去双重否定"""
    if isinstance(formula, Not):
        return formula.operand
    return Not(formula)


def disj(left: Formula, right: Formula) -> Formula:
    return neg(And(neg(left), neg(right)))


def implies(left: Formula, right: Formula) -> Formula:
    return neg(And(left, neg(right)))


def iff(left: Formula, right: Formula) -> Formula:
    return And(implies(left, right), implies(right, left))


def eventually(formula: Formula) -> Formula:
    return disj(formula, Until(TOP, formula))


def always(formula: Formula) -> Formula:
    return neg(eventually(neg(formula)))


def release(left: Formula, right: Formula) -> Formula:
    return neg(Until(neg(left), neg(right)))


def weak_next(formula: Formula) -> Formula:
    # 有限单词上 ¬X¬α 不成立，这里显式允许"没有下一位置"
    return disj(neg(Next(TOP)), Next(formula))


def normalize(formula: Formula) -> Formula:
    """重建语法树并消去所有双重否定"""
    if isinstance(formula, Not):
        return neg(normalize(formula.operand))
    if isinstance(formula, And):
        return And(normalize(formula.left), normalize(formula.right))
    if isinstance(formula, Next):
        return Next(normalize(formula.operand))
    if isinstance(formula, Until):
        return Until(normalize(formula.left), normalize(formula.right))
    return formula


def children(formula: Formula) -> Tuple[Formula, ...]:
    if isinstance(formula, (Not, Next)):
        return (formula.operand,)
    if isinstance(formula, (And, Until)):
        return (formula.left, formula.right)
    return ()


@functools.lru_cache(maxsize=SIZE_CACHE_LIMIT)
def size(formula: Formula) -> int:
    """公式大小 = 展开后语法树的节点数"""
    return 1 + sum(size(child) for child in children(formula))


def propositions(formula: Formula) -> FrozenSet[str]:
    if isinstance(formula, Atom):
        return frozenset((formula.name,))
    names: Set[str] = set()
    for child in children(formula):
        names |= propositions(child)
    return frozenset(names)


def depth(formula: Formula) -> int:
    """语法树深度；迭代后序遍历，共享子树按对象只计算一次"""
    memo: Dict[int, int] = {}
    stack = [formula]
    while stack:
        current = stack[-1]
        if id(current) in memo:
            stack.pop()
            continue
        pending = [child for child in children(current) if id(child) not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        memo[id(current)] = 1 + max((memo[id(c)] for c in children(current)), default=0)
    return memo[id(formula)]


# ---------------------------------------------------------------------------
# 解析
# ---------------------------------------------------------------------------

_TOKEN_PATTERN = re.compile(
    r"(?P<space>\s+)|(?P<op><->|->|WX|[TFXGUR!&|()])|(?P<ident>[a-z][a-z0-9_]*)"
)
_UNARY_START = {"!", "X", "WX", "F", "G", "T", "("}


@dataclass(frozen=True)
class _Token:
    kind: str  # "op" | "ident" | "end"
    text: str
    position: int  # 从1开始

    def starts_unary(self) -> bool:
        return self.kind == "ident" or (self.kind == "op" and self.text in _UNARY_START)


def _tokenize(text: str) -> List[_Token]:
    tokens = []
    index = 0
    while index < len(text):
        match = _TOKEN_PATTERN.match(text, index)
        if match is None:
            raise FormulaSyntaxError(f"unknown operator '{text[index]}'", index + 1)
        if match.lastgroup != "space":
            tokens.append(_Token(match.lastgroup, match.group(), index + 1))
        index = match.end()
    tokens.append(_Token("end", "", len(text) + 1))
    return tokens


class _Parser:
    """递归下降解析器，每个方法对应文法中的一条规则"""

    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0
        self.nesting = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.index]

    def _peek(self, offset: int = 1) -> _Token:
        return self.tokens[min(self.index + offset, len(self.tokens) - 1)]

    def _accept(self, text: str) -> bool:
        if self.current.kind == "op" and self.current.text == text:
            self.index += 1
            return True
        return False

    @contextlib.contextmanager
    def _nested(self, token: _Token):
        if self.nesting >= MAX_NESTING:
            raise FormulaSyntaxError(
                f"nesting deeper than {MAX_NESTING} levels", token.position
            )
        self.nesting += 1
        try:
            yield
        finally:
            self.nesting -= 1

    def _unexpected(self) -> FormulaSyntaxError:
        token = self.current
        if token.kind == "end":
            return FormulaSyntaxError("unexpected end of input", token.position)
        if token.text == ")":
            return FormulaSyntaxError(
                "unbalanced parentheses: unexpected ')'", token.position
            )
        return FormulaSyntaxError(f"unexpected token '{token.text}'", token.position)

    def parse(self) -> Formula:
        formula = self.parse_iff()
        if self.current.kind != "end":
            raise self._unexpected()
        return formula

    def parse_iff(self) -> Formula:
        formula = self.parse_impl()
        while self._accept("<->"):
            formula = iff(formula, self.parse_impl())
        return formula

    def parse_impl(self) -> Formula:
        formula = self.parse_or()
        token = self.current
        if self._accept("->"):
            with self._nested(token):
                return implies(formula, self.parse_impl())
        return formula

    def parse_or(self) -> Formula:
        formula = self.parse_and()
        while self._accept("|"):
            formula = disj(formula, self.parse_and())
        return formula

    def parse_and(self) -> Formula:
        formula = self.parse_until()
        while self._accept("&"):
            formula = And(formula, self.parse_until())
        return formula

    def parse_until(self) -> Formula:
        formula = self.parse_unary()
        token = self.current
        if self._accept("U"):
            with self._nested(token):
                return Until(formula, self.parse_until())
        if self._accept("R"):
            with self._nested(token):
                return release(formula, self.parse_until())
        return formula

    def parse_unary(self) -> Formula:
        token = self.current
        if token.kind == "op":
            if token.text == "F" and not self._peek().starts_unary():
                self.index += 1
                return FALSE
            handlers = {
                "!": neg,
                "X": Next,
                "WX": weak_next,
                "F": eventually,
                "G": always,
            }
            if token.text in handlers:
                self.index += 1
                with self._nested(token):
                    return handlers[token.text](self.parse_unary())
        return self.parse_atom()

    def parse_atom(self) -> Formula:
        token = self.current
        if token.kind == "ident":
            self.index += 1
            return Atom(token.text)
        if self._accept("T"):
            return TOP
        if self._accept("F"):
            return FALSE
        if self._accept("("):
            with self._nested(token):
                formula = self.parse_iff()
            if not self._accept(")"):
                if self.current.kind == "end":
                    raise FormulaSyntaxError(
                        f"unbalanced parentheses: '(' at position {token.position} "
                        "is never closed",
                        self.current.position,
                    )
                raise self._unexpected()
            return formula
        raise self._unexpected()


def parse(text: str) -> Formula:
    """把表面语法解析为完全展开的核心语法树"""
    formula = _Parser(text).parse()
    if depth(formula) > MAX_DEPTH:
        raise FormulaSyntaxError(f"formula nested deeper than {MAX_DEPTH} levels", 1)
    return formula


# ---------------------------------------------------------------------------
# 打印
# ---------------------------------------------------------------------------


def _wrap(formula: Formula) -> str:
    if isinstance(formula, (And, Until)):
        return f"({render(formula)})"
    return render(formula)


def render(formula: Formula) -> str:
    """输出可解析的字符串，parse(render(φ)) 与 φ 结构相等"""
    if isinstance(formula, Top):
        return "T"
    if isinstance(formula, Atom):
        return formula.name
    if isinstance(formula, Not):
        return "!" + _wrap(formula.operand)
    if isinstance(formula, Next):
        return "X " + _wrap(formula.operand)
    if isinstance(formula, And):
        return f"{_wrap(formula.left)} & {_wrap(formula.right)}"
    if isinstance(formula, Until):
        return f"{_wrap(formula.left)} U {_wrap(formula.right)}"
    raise TypeError(f"不是核心公式: {formula!r}")


# ---------------------------------------------------------------------------
# 子公式、闭包、极大一致集
# ---------------------------------------------------------------------------


def subformulas(formula: Formula) -> Set[Formula]:
    result: Set[Formula] = set()
    stack = [formula]
    while stack:
        current = stack.pop()
        if current in result:
            continue
        result.add(current)
        stack.extend(children(current))
    return result


def complement(formula: Formula) -> Formula:
    return neg(formula)


def _order_key(formula: Formula) -> Tuple[int, str]:
    return size(formula), render(formula)


class Closure:
    """
    闭包 cl(φ)：子公式及其补，双重否定等同。
    成员按 (大小, 文本) 排序，因此子公式总在前面。
    """

    def __init__(self, formulas: Iterable[Formula]):
        members: Set[Formula] = set()
        for formula in formulas:
            for sub in subformulas(normalize(formula)):
                members.add(sub)
                members.add(complement(sub))
        self.members: Tuple[Formula, ...] = tuple(sorted(members, key=_order_key))
        self._index: Dict[Formula, int] = {f: i for i, f in enumerate(self.members)}

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, formula: Formula) -> bool:
        return formula in self._index

    def __eq__(self, other) -> bool:
        return isinstance(other, Closure) and self.members == other.members

    def __hash__(self) -> int:
        return hash(self.members)

    def __repr__(self) -> str:
        return "Closure({" + ", ".join(render(f) for f in self.members) + "})"

    def index(self, formula: Formula) -> int:
        return self._index[formula]

    def complement(self, formula: Formula) -> Formula:
        result = complement(formula)
        if result not in self._index:
            raise KeyError(f"{render(formula)} 不在闭包中")
        return result

    @property
    def pairs(self) -> int:
        """互补对的数量"""
        return len(self.members) // 2

    def free_members(self) -> Tuple[Formula, ...]:
        """取值不由布尔结构决定的成员：原子、Next、Until"""
        return tuple(f for f in self.members if isinstance(f, (Atom, Next, Until)))

    def untils(self) -> Tuple[Until, ...]:
        return tuple(f for f in self.members if isinstance(f, Until))

    def nexts(self) -> Tuple[Next, ...]:
        return tuple(f for f in self.members if isinstance(f, Next))

    def with_top(self) -> "Closure":
        if TOP in self._index:
            return self
        return Closure(self.members + (TOP,))

    def issubset(self, other: "Closure") -> bool:
        return all(f in other for f in self.members)


def closure(formula: Formula) -> Closure:
    return Closure((formula,))


@dataclass(frozen=True)
class MaxConsSet:
    """闭包的极大一致子集，同时作为自动机状态"""

    members: FrozenSet[Formula]
    closure: Closure = field(compare=False, hash=False, repr=False)

    def __contains__(self, formula: Formula) -> bool:
        return formula in self.members

    def ordered_members(self) -> List[Formula]:
        return [f for f in self.closure.members if f in self.members]

    def label(self) -> str:
        return ", ".join(render(f) for f in self.ordered_members())


def is_maximal_consistent(c: Closure, members: Iterable[Formula]) -> bool:
    """检查一个子集是否满足极大一致集的全部不变量"""
    chosen = set(members)
    if not chosen.issubset(c.members):
        return False
    for formula in c.members:
        if (formula in chosen) == (c.complement(formula) in chosen):
            return False
        if isinstance(formula, Top) and formula not in chosen:
            return False
        if isinstance(formula, And):
            both = formula.left in chosen and formula.right in chosen
            if (formula in chosen) != both:
                return False
    return True


def enumerate_maxcons(c: Closure) -> Tuple[MaxConsSet, ...]:
    """
    枚举全部极大一致集。
    自由成员（原子、Next、Until）任意取值，其余成员由布尔结构决定；
    严格未来算子在同一位置没有局部约束。
    """
    free = c.free_members()
    result = []
    for choice in itertools.product((True, False), repeat=len(free)):
        value: Dict[Formula, bool] = dict(zip(free, choice))
        for formula in c.members:
            if formula in value:
                continue
            if isinstance(formula, Top):
                value[formula] = True
            elif isinstance(formula, Not):
                value[formula] = not value[formula.operand]
            elif isinstance(formula, And):
                value[formula] = value[formula.left] and value[formula.right]
        members = frozenset(f for f in c.members if value[f])
        result.append(MaxConsSet(members, c))
    return tuple(result)


def letter_of(state: MaxConsSet) -> FrozenSet[str]:
    """状态对应的字母：成员中出现的原子命题集合"""
    return frozenset(f.name for f in state.members if isinstance(f, Atom))
