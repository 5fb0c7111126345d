"""
超限单词测试
测试长度、按位置取字母、后缀与JSON格式
"""

import json
import os
import sys

import pytest

# 添加src目录到Python路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from errors import WordError, WordFormatError, WordIndexError
from ordinal import OMEGA, ONE, Ordinal, add, parse_ordinal, times_natural
from ordinal_word import (
    MAX_NESTING,
    Cat,
    OmegaPow,
    Single,
    cat,
    dumps,
    finite_letters,
    from_json,
    length,
    letter_at,
    letter_count,
    level,
    load_word,
    omega,
    positions,
    single,
    suffix_from,
    to_json,
)
from testkit import GenConfig, gen_word

NESTED = omega(cat(single("p"), omega(single("q"))))


class TestWordStructure:
    """单词构造与长度测试类"""

    def test_cat_normalizes(self):
        assert cat(single("p")) == single("p")
        nested = cat(cat(single("p"), single("q")), single("r"))
        assert nested == Cat((single("p"), single("q"), single("r")))
        with pytest.raises(WordFormatError):
            cat()

    def test_lengths(self):
        assert length(cat(single("p"), single("q"))) == Ordinal.from_int(2)
        assert length(omega(single("q"))) == OMEGA
        assert length(NESTED) == parse_ordinal("w^2")

    def test_level_and_letter_count(self):
        assert level(single("p")) == 0
        assert level(NESTED) == 2
        assert level(omega(omega(single()))) == 2
        assert letter_count(NESTED) == 2

    def test_invalid_proposition(self):
        with pytest.raises(WordFormatError):
            Single(frozenset({"P"}))

    def test_finite_letters(self):
        word = cat(single("p"), single(), single("p", "q"))
        assert finite_letters(word) == [
            frozenset({"p"}),
            frozenset(),
            frozenset({"p", "q"}),
        ]
        with pytest.raises(WordError):
            finite_letters(omega(single()))


class TestLetterAt:
    """按位置取字母测试类"""

    def test_finite(self):
        assert letter_at(cat(single("p"), single("q")), ONE) == frozenset({"q"})

    def test_second_inner_block(self):
        """位置 ω 是第二个内层块的起点"""
        assert letter_at(NESTED, OMEGA) == frozenset({"p"})
        assert letter_at(NESTED, parse_ordinal("w+1")) == frozenset({"q"})

    def test_out_of_range(self):
        with pytest.raises(WordIndexError):
            letter_at(cat(single("p"), single("q")), Ordinal.from_int(2))
        with pytest.raises(WordIndexError):
            letter_at(NESTED, parse_ordinal("w^2"))

    def test_tail_invariance(self):
        body = cat(single("p"), single("q"), omega(single("r")))
        word = omega(body)
        beta = length(body)
        for rho in positions(body, 3):
            expected = letter_at(word, rho)
            for n in range(1, 4):
                shifted = add(times_natural(beta, n), rho)
                assert letter_at(word, shifted) == expected

    def test_total_on_random_words(self):
        cfg = GenConfig(seed=8, max_size=8, max_level=2, case_count=200)
        for i in range(cfg.case_count):
            word = gen_word(cfg, i)
            first = letter_at(word, Ordinal())
            for position in positions(word, 3):
                letter_at(word, position)
            with pytest.raises(WordIndexError):
                letter_at(word, length(word))
            assert first == letter_at(word, next(iter(positions(word, 1))))


class TestSuffix:
    """后缀测试类"""

    def test_finite_suffix(self):
        assert suffix_from(cat(single("p"), single("q")), ONE) == single("q")

    def test_block_boundary_is_identity(self):
        body = cat(single("p"), single("q"))
        word = omega(body)
        for n in range(5):
            assert suffix_from(word, times_natural(length(body), n)) == word

    def test_interior_suffix(self):
        word = omega(cat(single("p"), single("q")))
        assert suffix_from(word, Ordinal.from_int(3)) == cat(single("q"), word)

    def test_length_law_on_random_words(self):
        """π + |suffix_from(w, π)| = |w|"""
        cfg = GenConfig(seed=9, max_size=8, max_level=2, case_count=150)
        for i in range(cfg.case_count):
            word = gen_word(cfg, i)
            for position in positions(word, 2):
                suffix = suffix_from(word, position)
                assert add(position, length(suffix)) == length(word)
                assert letter_at(suffix, Ordinal()) == letter_at(word, position)


class TestWordJson:
    """JSON格式测试类"""

    def test_example_document(self):
        data = {"omega": {"cat": [{"letter": ["p"]}, {"omega": {"letter": ["q"]}}]}}
        assert from_json(data) == NESTED
        assert to_json(NESTED) == data

    def test_letters_sorted(self):
        assert dumps(single("q", "p")) == '{"letter":["p","q"]}'

    @pytest.mark.parametrize(
        "data",
        [
            [],
            {"letter": "p"},
            {"cat": []},
            {"omega": {"bogus": 1}},
            {"letter": ["p"], "cat": []},
            {"letter": ["P"]},
        ],
    )
    def test_malformed(self, data):
        with pytest.raises(WordFormatError):
            from_json(data)

    def test_max_level(self):
        data = to_json(NESTED)
        assert from_json(data, max_level=2) == NESTED
        with pytest.raises(WordFormatError):
            from_json(data, max_level=1)

    def test_load_word(self, tmp_path):
        path = tmp_path / "word.json"
        path.write_text(json.dumps({"cat": [{"letter": []}, {"letter": ["p"]}]}))
        assert load_word(str(path)) == cat(single(), single("p"))

        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        with pytest.raises(WordFormatError):
            load_word(str(broken))
        with pytest.raises(WordFormatError):
            load_word(str(tmp_path / "missing.json"))

    def test_nesting_limit(self):
        data = {"letter": []}
        for _ in range(MAX_NESTING - 1):
            data = {"cat": [{"letter": ["p"]}, data]}
        assert letter_count(from_json(data)) == MAX_NESTING
        with pytest.raises(WordFormatError, match="嵌套"):
            from_json({"omega": data})

    def test_load_word_unreadable(self, tmp_path):
        binary = tmp_path / "binary.json"
        binary.write_bytes(b"\xff\xfe{}")
        with pytest.raises(WordFormatError, match="UTF-8"):
            load_word(str(binary))
        with pytest.raises(WordFormatError):
            load_word(str(tmp_path))
        deep = tmp_path / "deep.json"
        deep.write_text('{"omega":' * 1200 + '{"letter":[]}' + "}" * 1200)
        with pytest.raises(WordFormatError, match="嵌套"):
            load_word(str(deep))

    def test_omega_pow_of_omega_pow(self):
        word = from_json({"omega": {"omega": {"letter": []}}})
        assert word == OmegaPow(OmegaPow(single()))
        assert length(word) == parse_ordinal("w^2")
