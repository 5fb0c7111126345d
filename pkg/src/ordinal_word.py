#!/usr/bin/env python3
"""
超限单词
有限表示的嵌套套索单词：Single(字母) | Cat(单词序列) | OmegaPow(单词)。
OmegaPow 的嵌套深度称为单词的层级，层级为 k 的单词长度小于 ω^(k+1)。

JSON 格式:
    {"letter": ["p", "q"]} | {"cat": [word, ...]} | {"omega": word}
"""

import functools
import json
from dataclasses import dataclass
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple

from errors import WordError, WordFormatError, WordIndexError
from formula import PROPOSITION_PATTERN
from ordinal import (
    ONE,
    ZERO,
    Ordering,
    Ordinal,
    add,
    compare,
    divide,
    left_subtract,
    times_omega,
)

Letter = FrozenSet[str]

# JSON 中 cat/omega 的嵌套上限
MAX_NESTING = 64


class Word:
    """超限单词基类"""

    __slots__ = ()


@dataclass(frozen=True)
class Single(Word):
    letter: Letter

    def __post_init__(self):
        letter = frozenset(self.letter)
        for name in letter:
            if not PROPOSITION_PATTERN.match(name):
                raise WordFormatError(f"非法命题名: '{name}'")
        object.__setattr__(self, "letter", letter)


@dataclass(frozen=True)
class Cat(Word):
    parts: Tuple[Word, ...]

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise WordFormatError("Cat 至少需要一个分量")
        object.__setattr__(self, "parts", parts)


@dataclass(frozen=True)
class OmegaPow(Word):
    body: Word


def single(*props: str) -> Single:
    return Single(frozenset(props))


def cat(*words: Word) -> Word:
    """规范化拼接：展平嵌套的 Cat，单元素 Cat 直接折叠"""
    parts: List[Word] = []
    for word in words:
        if isinstance(word, Cat):
            parts.extend(word.parts)
        else:
            parts.append(word)
    if not parts:
        raise WordFormatError("空单词不存在")
    return parts[0] if len(parts) == 1 else Cat(tuple(parts))


def omega(word: Word) -> OmegaPow:
    return OmegaPow(word)


def normalize(word: Word) -> Word:
    if isinstance(word, Cat):
        return cat(*(normalize(part) for part in word.parts))
    if isinstance(word, OmegaPow):
        return OmegaPow(normalize(word.body))
    return word


@functools.lru_cache(maxsize=4096)
def length(word: Word) -> Ordinal:
    if isinstance(word, Single):
        return ONE
    if isinstance(word, Cat):
        total = ZERO
        for part in word.parts:
            total = add(total, length(part))
        return total
    return times_omega(length(word.body))


def level(word: Word) -> int:
    if isinstance(word, Single):
        return 0
    if isinstance(word, Cat):
        return max(level(part) for part in word.parts)
    return 1 + level(word.body)


def letter_count(word: Word) -> int:
    """表示中出现的字母个数"""
    if isinstance(word, Single):
        return 1
    if isinstance(word, Cat):
        return sum(letter_count(part) for part in word.parts)
    return letter_count(word.body)


def _check_position(word: Word, position: Ordinal):
    if compare(position, length(word)) is not Ordering.LT:
        raise WordIndexError(f"位置 {position} 超出单词长度 {length(word)}")


def letter_at(word: Word, position: Ordinal) -> Letter:
    _check_position(word, position)
    while True:
        if isinstance(word, Single):
            return word.letter
        if isinstance(word, Cat):
            for part in word.parts:
                part_length = length(part)
                if compare(position, part_length) is Ordering.LT:
                    word = part
                    break
                position = left_subtract(part_length, position)
            continue
        _, position = divide(position, length(word.body))
        word = word.body


def suffix_from(word: Word, position: Ordinal) -> Word:
    """
    返回从 position 开始的后缀。
    在 OmegaPow(v) 内部，任何块边界 |v|·n 处的后缀就是 OmegaPow(v) 本身。
    """
    _check_position(word, position)
    if isinstance(word, Single):
        return word
    if isinstance(word, Cat):
        for i, part in enumerate(word.parts):
            part_length = length(part)
            if compare(position, part_length) is Ordering.LT:
                return cat(suffix_from(part, position), *word.parts[i + 1:])
            position = left_subtract(part_length, position)
        raise WordIndexError("位置越界")  # _check_position 已排除
    _, rest = divide(position, length(word.body))
    if rest == ZERO:
        return word
    return cat(suffix_from(word.body, rest), word)


def finite_letters(word: Word) -> List[Letter]:
    """把有限单词展开为字母列表"""
    if isinstance(word, Single):
        return [word.letter]
    if isinstance(word, Cat):
        letters: List[Letter] = []
        for part in word.parts:
            letters.extend(finite_letters(part))
        return letters
    raise WordError("finite_letters 只接受有限单词")


def positions(word: Word, limit: int) -> Iterable[Ordinal]:
    """
    按遍历顺序枚举位置；每个 OmegaPow 只展开前 limit 个块。
    用作比较运算的枚举预言。
    """
    yield from _positions(word, ZERO, limit)


def _positions(word: Word, offset: Ordinal, limit: int) -> Iterable[Ordinal]:
    if isinstance(word, Single):
        yield offset
        return
    if isinstance(word, Cat):
        for part in word.parts:
            yield from _positions(part, offset, limit)
            offset = add(offset, length(part))
        return
    body_length = length(word.body)
    for _ in range(limit):
        yield from _positions(word.body, offset, limit)
        offset = add(offset, body_length)


# ---------------------------------------------------------------------------
# JSON
# ---------------------------------------------------------------------------


def to_json(word: Word) -> Dict[str, Any]:
    if isinstance(word, Single):
        return {"letter": sorted(word.letter)}
    if isinstance(word, Cat):
        return {"cat": [to_json(part) for part in word.parts]}
    return {"omega": to_json(word.body)}


def from_json(data: Any, max_level: Optional[int] = None) -> Word:
    word = _from_json(data, "$", 0)
    if max_level is not None and level(word) > max_level:
        raise WordFormatError(f"单词层级 {level(word)} 超过配置上限 {max_level}")
    return normalize(word)


def _from_json(data: Any, path: str, nesting: int) -> Word:
    if nesting >= MAX_NESTING:
        raise WordFormatError(f"{path}: 嵌套超过 {MAX_NESTING} 层")
    if not isinstance(data, dict) or len(data) != 1:
        raise WordFormatError(f"{path}: 单词必须是只有一个键的对象")
    key, value = next(iter(data.items()))
    if key == "letter":
        if not isinstance(value, list) or not all(isinstance(v, str) for v in value):
            raise WordFormatError(f"{path}.letter: 必须是字符串列表")
        return Single(frozenset(value))
    if key == "cat":
        if not isinstance(value, list) or not value:
            raise WordFormatError(f"{path}.cat: 必须是非空列表")
        return Cat(
            tuple(
                _from_json(v, f"{path}.cat[{i}]", nesting + 1)
                for i, v in enumerate(value)
            )
        )
    if key == "omega":
        return OmegaPow(_from_json(value, f"{path}.omega", nesting + 1))
    raise WordFormatError(f"{path}: 未知的键 '{key}'")


def dumps(word: Word) -> str:
    return json.dumps(to_json(word), separators=(",", ":"))


def load_word(path: str, max_level: Optional[int] = None) -> Word:
    """从文件读取JSON单词"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise WordFormatError(f"单词文件未找到: {path}")
    except json.JSONDecodeError as e:
        raise WordFormatError(f"单词文件JSON格式错误: {e}")
    except UnicodeDecodeError as e:
        raise WordFormatError(f"单词文件不是UTF-8文本: {path} ({e.reason})")
    except RecursionError:
        raise WordFormatError(f"单词文件嵌套过深: {path}")
    except OSError as e:
        raise WordFormatError(f"无法读取单词文件 {path}: {e.strerror}")
    return from_json(data, max_level=max_level)

