#!/usr/bin/env python3
"""
小于 ω^ω 的序数运算
以康托范式表示：(指数, 系数) 序列，指数严格递减，系数至少为1，空序列表示0。

文本格式（命令行与JSON使用）:
    ordinal := "0" | term ("+" term)*
    term    := "w" ["^" digits] ["*" digits] | digits
例如 ``0``、``5``、``w``、``w^2``、``w^2*3+w*2+7``。系数为1时 ``*`` 部分可省略。
"""

import functools
import re
from dataclasses import dataclass
from enum import Enum
from typing import Tuple

from errors import OrdinalError, OrdinalOverflowError

# 指数与系数都是有界的机器自然数，溢出时报错而不是回绕
MAX_NATURAL = 2**63 - 1

Term = Tuple[int, int]


class Ordering(Enum):
    LT = -1
    EQ = 0
    GT = 1


def _checked(value: int) -> int:
    if value > MAX_NATURAL:
        raise OrdinalOverflowError(f"自然数 {value} 超出上限 {MAX_NATURAL}")
    return value


@functools.total_ordering
@dataclass(frozen=True)
class Ordinal:
    """康托范式序数，规范形式唯一，因此结构相等即序数相等"""

    terms: Tuple[Term, ...] = ()

    def __post_init__(self):
        terms = tuple((int(e), int(c)) for e, c in self.terms)
        object.__setattr__(self, "terms", terms)
        previous = None
        for exponent, coefficient in terms:
            if exponent < 0 or coefficient < 1:
                raise OrdinalError(f"非法项 ({exponent}, {coefficient})")
            _checked(exponent)
            _checked(coefficient)
            if previous is not None and exponent >= previous:
                raise OrdinalError(f"指数必须严格递减: {terms}")
            previous = exponent

    @classmethod
    def from_int(cls, n: int) -> "Ordinal":
        if n < 0:
            raise OrdinalError(f"负数不是序数: {n}")
        return cls(((0, n),)) if n else cls()

    @classmethod
    def omega_power(cls, exponent: int, coefficient: int = 1) -> "Ordinal":
        return cls(((exponent, coefficient),))

    @property
    def leading_exponent(self) -> int:
        if not self.terms:
            raise OrdinalError("0 没有首项")
        return self.terms[0][0]

    def __lt__(self, other: "Ordinal") -> bool:
        return compare(self, other) is Ordering.LT

    def __add__(self, other: "Ordinal") -> "Ordinal":
        return add(self, other)

    def __str__(self) -> str:
        return format_ordinal(self)


ZERO = Ordinal()
ONE = Ordinal.from_int(1)
OMEGA = Ordinal.omega_power(1)


def compare(alpha: Ordinal, beta: Ordinal) -> Ordering:
    """按项序列字典序比较（先指数后系数），与序数序一致"""
    for (ea, ca), (eb, cb) in zip(alpha.terms, beta.terms):
        if ea != eb:
            return Ordering.GT if ea > eb else Ordering.LT
        if ca != cb:
            return Ordering.GT if ca > cb else Ordering.LT
    if len(alpha.terms) == len(beta.terms):
        return Ordering.EQ
    return Ordering.GT if len(alpha.terms) > len(beta.terms) else Ordering.LT


def add(alpha: Ordinal, beta: Ordinal) -> Ordinal:
    """康托范式加法：丢弃 alpha 中指数小于 beta 首指数的项，同指数时合并系数"""
    if not beta.terms:
        return alpha
    lead_exponent, lead_coefficient = beta.terms[0]
    kept = [term for term in alpha.terms if term[0] > lead_exponent]
    same = [c for e, c in alpha.terms if e == lead_exponent]
    if same:
        merged = (lead_exponent, _checked(same[0] + lead_coefficient))
        return Ordinal(tuple(kept) + (merged,) + beta.terms[1:])
    return Ordinal(tuple(kept) + beta.terms)


def left_subtract(alpha: Ordinal, gamma: Ordinal) -> Ordinal:
    """返回唯一的 beta 使得 alpha + beta = gamma；要求 alpha <= gamma"""
    if compare(alpha, gamma) is Ordering.GT:
        raise OrdinalError(f"左减法越界: {alpha} > {gamma}")
    i = 0
    while i < len(alpha.terms) and alpha.terms[i] == gamma.terms[i]:
        i += 1
    if i == len(alpha.terms):
        return Ordinal(gamma.terms[i:])
    (ea, ca), (eg, cg) = alpha.terms[i], gamma.terms[i]
    if eg > ea:
        return Ordinal(gamma.terms[i:])
    # 同指数，gamma 的系数更大
    return Ordinal(((eg, cg - ca),) + gamma.terms[i + 1:])


def succ(alpha: Ordinal) -> Ordinal:
    return add(alpha, ONE)


def is_zero(alpha: Ordinal) -> bool:
    return not alpha.terms


def is_limit(alpha: Ordinal) -> bool:
    return bool(alpha.terms) and alpha.terms[-1][0] > 0


def times_omega(beta: Ordinal) -> Ordinal:
    """beta·ω = ω^(e+1)，e 为 beta 的首指数"""
    if is_zero(beta):
        raise OrdinalError("times_omega 要求 beta > 0")
    return Ordinal.omega_power(_checked(beta.leading_exponent + 1))


def times_natural(beta: Ordinal, n: int) -> Ordinal:
    """beta·n（n 为自然数）：首项系数乘 n，其余项不变"""
    if n == 0 or is_zero(beta):
        return ZERO
    (exponent, coefficient), rest = beta.terms[0], beta.terms[1:]
    return Ordinal(((exponent, _checked(coefficient * n)),) + rest)


def divide(pi: Ordinal, beta: Ordinal) -> Tuple[int, Ordinal]:
    """求 pi = beta·n + rho，其中 rho < beta；要求 pi < beta·ω"""
    if compare(pi, times_omega(beta)) is not Ordering.LT:
        raise OrdinalError(f"{pi} 不小于 ({beta})·ω")
    if is_zero(pi) or pi.leading_exponent < beta.leading_exponent:
        return 0, pi
    # 首指数相同时按首项系数整除，必要时回退一格
    n = pi.terms[0][1] // beta.terms[0][1]
    if compare(times_natural(beta, n), pi) is Ordering.GT:
        n -= 1
    return n, left_subtract(times_natural(beta, n), pi)


_TERM_PATTERN = re.compile(r"^(?:w(?:\^(\d+))?(?:\*(\d+))?|(\d+))$")


def parse_ordinal(text: str) -> Ordinal:
    """解析文本格式的序数"""
    compact = "".join(text.split())
    if not compact:
        raise OrdinalError("空的序数文本")
    terms = []
    for chunk in compact.split("+"):
        match = _TERM_PATTERN.match(chunk)
        if match is None:
            raise OrdinalError(f"无法解析序数项 '{chunk}'")
        exponent_text, coefficient_text, finite_text = match.groups()
        if finite_text is not None:
            value = int(finite_text)
            if value == 0:
                if len(compact.split("+")) > 1:
                    raise OrdinalError("0 不能出现在和式中")
                return ZERO
            terms.append((0, value))
        else:
            exponent = int(exponent_text) if exponent_text is not None else 1
            coefficient = int(coefficient_text) if coefficient_text is not None else 1
            if exponent == 0:
                raise OrdinalError(f"w^0 请直接写成自然数: '{chunk}'")
            terms.append((exponent, coefficient))
    return Ordinal(tuple(terms))


def format_ordinal(alpha: Ordinal) -> str:
    if not alpha.terms:
        return "0"
    parts = []
    for exponent, coefficient in alpha.terms:
        if exponent == 0:
            parts.append(str(coefficient))
            continue
        base = "w" if exponent == 1 else f"w^{exponent}"
        parts.append(base if coefficient == 1 else f"{base}*{coefficient}")
    return "+".join(parts)
