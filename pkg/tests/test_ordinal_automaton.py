"""
序数自动机测试
测试自动机构造、后继与极限转移规则、分层空性判定、见证还原与DOT导出
"""

import os
import sys

import numpy as np
import pytest

# 添加src目录到Python路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import ordinal_automaton
from errors import SkeletonError, StateExplosionError
from eval_oracle import evaluate
from formula import Atom, Not, Until, closure, enumerate_maxcons, letter_of, parse
from ordinal import OMEGA, ONE
from ordinal_automaton import (
    EmptinessSearch,
    Finite,
    LimitStep,
    build,
    emptiness,
    end_consistent,
    extract_witness,
    limit_allowed,
    limit_end_accepting,
    skeleton_level,
    succ_allowed,
    to_dot,
)
from ordinal_word import cat, length, level, omega, single
from testkit import GenConfig, gen_formula

GOLDEN_DIR = os.path.join(os.path.dirname(__file__), "golden")

p, q = Atom("p"), Atom("q")
P_UNTIL_Q = Until(p, q)


def states_of(text):
    return enumerate_maxcons(closure(parse(text)).with_top())


def pick(states, *required, excluded=()):
    """按成员挑选状态"""
    return [
        s
        for s in states
        if all(f in s for f in required) and not any(f in s for f in excluded)
    ]


class TestBuild:
    """自动机构造测试类"""

    def test_atom(self):
        automaton = build(parse("p"))
        assert len(automaton.states) == 2
        assert len(automaton.initial) == 1
        assert p in automaton.states[automaton.initial[0]]

    def test_inconsistent(self):
        assert build(parse("p & !p")).initial == ()

    def test_until(self):
        automaton = build(parse("p U q"))
        assert len(automaton.states) == 8
        assert len(automaton.initial) == 4
        assert all(P_UNTIL_Q in automaton.states[i] for i in automaton.initial)

    def test_state_explosion_guard(self):
        with pytest.raises(StateExplosionError):
            build(parse("p U q"), max_states=4)
        assert len(build(parse("p U q"), max_states=16).states) == 8

    def test_state_count_bound_random(self):
        cfg = GenConfig(seed=41, max_size=10, case_count=60)
        for i in range(cfg.case_count):
            automaton = build(gen_formula(cfg, i))
            assert len(automaton.states) <= 2 ** (len(automaton.closure) // 2)

    def test_successor_edges_match_rule(self):
        automaton = build(parse("p U X q"))
        for i, s in enumerate(automaton.states):
            for j, t in enumerate(automaton.states):
                assert (j in automaton.successors[i]) == succ_allowed(s, t)
                assert automaton.graph.has_edge(i, j) == succ_allowed(s, t)


class TestTransitionRules:
    """转移规则测试类"""

    def test_succ_until_fulfilled(self):
        states = states_of("p U q")
        for s in pick(states, P_UNTIL_Q):
            for t in pick(states, q):
                assert succ_allowed(s, t)

    def test_succ_until_forbidden(self):
        states = states_of("p U q")
        for s in pick(states, P_UNTIL_Q):
            for t in pick(states, Not(q), Not(p)):
                assert not succ_allowed(s, t)

    def test_always_self_loop(self):
        formula = parse("G p")
        for s in pick(states_of("G p"), formula):
            assert succ_allowed(s, s)

    def test_limit_without_untils(self):
        states = states_of("p & X p")
        for t in states:
            assert limit_allowed(states, t)
            assert limit_allowed(states[:1], t)

    def test_limit_pending_until(self):
        """未兑现的 p U q 必须延续到极限位置"""
        states = states_of("p U q")
        (pending,) = pick(states, p, Not(q), P_UNTIL_Q)
        for t in pick(states, Not(q), Not(P_UNTIL_Q)):
            assert not limit_allowed([pending], t)
        for t in pick(states, q):
            assert limit_allowed([pending], t)

    def test_limit_falsity_needs_reason(self):
        states = states_of("p U q")
        (blocked,) = pick(states, p, Not(q), Not(P_UNTIL_Q))
        for t in pick(states, q):
            assert not limit_allowed([blocked], t)
        for t in pick(states, Not(q), Not(P_UNTIL_Q)):
            assert limit_allowed([blocked], t)

    def test_end_consistent(self):
        for s in states_of("X T"):
            assert end_consistent(s) == (parse("X T") not in s)
        for s in pick(states_of("p U q"), P_UNTIL_Q):
            assert not end_consistent(s)

    def test_limit_end_accepting(self):
        states = states_of("p U q")
        (pending,) = pick(states, p, Not(q), P_UNTIL_Q)
        (fulfilling,) = pick(states, Not(p), q, Not(P_UNTIL_Q))
        assert not limit_end_accepting([pending])
        assert limit_end_accepting([pending, fulfilling])
        assert limit_end_accepting(states_of("p"))

    @pytest.mark.parametrize("text", ["p U q", "F p", "X p", "G p", "!p U X q"])
    def test_limit_rule_agrees_with_oracle(self, text):
        """
        单个自环状态 s 重复 ω 次，再在极限处接一个可以结尾的状态 t：
        允许的极限转移必须使求值结果与状态成员一致
        """
        states = states_of(text)
        for s in states:
            if not succ_allowed(s, s):
                continue
            for t in states:
                if not end_consistent(t) or not limit_allowed([s], t):
                    continue
                word = cat(omega(single(*letter_of(s))), single(*letter_of(t)))
                for formula in s.closure.members:
                    assert evaluate(formula, word) == (formula in s), (
                        f"{formula} 在 {s.label()} -> {t.label()} 上不一致"
                    )


class TestEmptiness:
    """空性判定测试类"""

    def test_inconsistent_is_empty(self):
        assert emptiness(build(parse("p & !p")), 3) is None

    def test_atom_single_position(self):
        automaton = build(parse("p"))
        skeleton, found = emptiness(automaton, 3)
        assert found == 0
        assert isinstance(skeleton, Finite) and len(skeleton.states) == 1
        assert extract_witness(skeleton) == single("p")

    def test_always_next_needs_limit(self):
        automaton = build(parse("G X T"))
        assert emptiness(automaton, 0) is None
        skeleton, found = emptiness(automaton, 3)
        assert found == 1 and skeleton_level(skeleton) == 1
        witness = extract_witness(skeleton)
        assert witness == omega(single())
        assert length(witness) == OMEGA

    def test_until_fulfilled_after_limit(self):
        formula = parse("p U q & !F X q")
        automaton = build(formula)
        assert emptiness(automaton, 0) is None
        skeleton, found = emptiness(automaton, 2)
        witness = extract_witness(skeleton)
        assert found == 1 and level(witness) == 1
        assert evaluate(formula, witness)

    def test_monotone_in_level(self):
        automaton = build(parse("G X T & G F p"))
        low = emptiness(automaton, 1)
        high = emptiness(automaton, 3)
        assert low is not None
        assert extract_witness(low[0]) == extract_witness(high[0])
        assert low[1] == high[1]

    def test_witnesses_satisfy_random_formulas(self):
        cfg = GenConfig(seed=43, max_size=8, prop_count=2, case_count=40)
        for i in range(cfg.case_count):
            formula = gen_formula(cfg, i)
            result = emptiness(build(formula), 2)
            if result is not None:
                witness = extract_witness(result[0])
                assert level(witness) == result[1]
                assert evaluate(formula, witness), f"{formula} 的见证单词不成立"

    def test_step_relation_invariants(self):
        search = EmptinessSearch(build(parse("p U q & G F q")))
        for fact in search.step_relation(0).facts:
            assert fact.visited == {fact.source, fact.target}
        for fact in search.step_relation(1).facts:
            assert fact.source in fact.visited and fact.target in fact.visited
            assert fact.cycle[0].source == fact.source
            assert fact.cycle[-1].target == fact.source
        assert search.fact_count > 0

    def test_mutated_pending_rule_changes_verdict(self, monkeypatch):
        """条件(a)取反后，不可满足的公式会得到错误的接受运行"""
        formula = parse("p U q & G !q")
        assert emptiness(build(formula), 2) is None

        def flipped(any_u, any_b, all_u, all_a, cont):
            return np.logical_or(
                not (any_u and not any_b),
                np.logical_not(np.logical_and(all_u and all_a, cont)),
            )

        monkeypatch.setattr(ordinal_automaton, "_pending_passes_limit", flipped)
        result = emptiness(build(formula), 2)
        assert result is not None
        assert not evaluate(formula, extract_witness(result[0]))


class TestWitness:
    """骨架还原测试类"""

    def test_malformed_skeletons(self):
        with pytest.raises(SkeletonError):
            extract_witness(Finite(()))
        with pytest.raises(SkeletonError):
            extract_witness(LimitStep(None, (), None))
        with pytest.raises(SkeletonError):
            extract_witness("not a skeleton")

    def test_limit_step_with_prefix(self):
        states = states_of("p")
        with_p = pick(states, p)[0]
        without_p = pick(states, Not(p))[0]
        skeleton = LimitStep(Finite((with_p,)), (Finite((without_p, with_p)),), None)
        assert extract_witness(skeleton) == cat(
            single("p"), omega(cat(single(), single("p")))
        )
        assert length(extract_witness(Finite((with_p,)))) == ONE


class TestDot:
    """DOT导出测试类"""

    def test_golden_atom(self):
        with open(os.path.join(GOLDEN_DIR, "dot_p.dot"), "r", encoding="utf-8") as f:
            expected = f.read()
        assert to_dot(build(parse("p"))) == expected

    def test_empty_initial_flagged(self):
        text = to_dot(build(parse("p & !p")))
        assert 'label="initial states: 0";' in text
        assert "doublecircle" not in text

    def test_deterministic(self):
        assert to_dot(build(parse("p U X q"))) == to_dot(build(parse("p U X q")))

    def test_edge_count_matches_dot(self):
        automaton = build(parse("p U X q"))
        edges = [line for line in to_dot(automaton).splitlines() if " -> " in line]
        assert automaton.edge_count == len(edges)
        assert automaton.edge_count == sum(len(row) for row in automaton.successors)
