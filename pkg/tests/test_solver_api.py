"""
求解接口测试
测试可满足性结论、见证校验、有效性与等价性判定以及机器可读输出
"""

import json
import logging
import os
import sys

import pytest

# 添加src目录到Python路径
sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

import solver_api
from errors import ConfigError, StateExplosionError, WitnessValidationError
from eval_oracle import evaluate
from formula import neg, parse
from ordinal import OMEGA
from ordinal_word import length, level, omega, single
from solver_api import (
    SolverStats,
    Status,
    Verdict,
    check_duality,
    counterexample,
    default_level,
    equivalent,
    satisfiable,
    valid,
)
from testkit import GenConfig, gen_formula


class TestSatisfiable:
    """可满足性测试类"""

    def test_contradiction(self):
        verdict = satisfiable(parse("p & !p"), 3)
        assert verdict.status is Status.UNSAT
        assert verdict.witness is None and verdict.level is None

    def test_atom(self):
        verdict = satisfiable(parse("p"), 3)
        assert verdict.is_sat
        assert verdict.witness == single("p")
        assert verdict.level == 0
        assert verdict.stats.state_count == 2

    def test_always_next_top(self):
        verdict = satisfiable(parse("G X T"), 3)
        assert verdict.level == 1
        assert verdict.witness == omega(single())

    def test_alternating_recurrence(self):
        formula = parse("G X T & G F p & G F !p")
        verdict = satisfiable(formula, 3)
        assert verdict.is_sat and verdict.level == 1
        assert length(verdict.witness) == OMEGA
        assert evaluate(formula, verdict.witness)
        assert satisfiable(formula, 0).status is Status.UNSAT

    def test_monotone_in_level(self):
        formula = parse("G X T & G F p")
        low = satisfiable(formula, 1)
        for k in (2, 3):
            high = satisfiable(formula, k)
            assert high.witness == low.witness and high.level == low.level

    def test_level_limits(self):
        with pytest.raises(ConfigError):
            satisfiable(parse("p"), 5)
        with pytest.raises(ConfigError):
            satisfiable(parse("p"), -1)
        assert satisfiable(parse("p"), 5, max_level_limit=5).is_sat

    def test_state_explosion_propagates(self):
        with pytest.raises(StateExplosionError):
            satisfiable(parse("p U q"), 1, max_states=4)

    def test_witness_validation_enforced(self, monkeypatch):
        monkeypatch.setattr(solver_api, "evaluate", lambda formula, word: False)
        with pytest.raises(WitnessValidationError):
            satisfiable(parse("p"), 1)

    def test_random_witnesses_have_reported_level(self):
        cfg = GenConfig(seed=51, max_size=8, prop_count=2, case_count=30)
        for i in range(cfg.case_count):
            verdict = satisfiable(gen_formula(cfg, i), 2)
            if verdict.is_sat:
                assert level(verdict.witness) == verdict.level

    def test_default_level(self):
        assert default_level(parse("p")) == 1
        assert default_level(parse("G X T")) == 3
        assert default_level(parse("G X T"), configured=2) == 2


class TestVerdict:
    """结论对象与输出格式测试类"""

    def test_status_requires_witness(self):
        stats = SolverStats(1, 0, 0)
        with pytest.raises(ValueError):
            Verdict(Status.SAT, None, None, stats, 3)
        with pytest.raises(ValueError):
            Verdict(Status.UNSAT, single("p"), 0, stats, 3)

    def test_json_schema(self):
        data = satisfiable(parse("G X T"), 3).to_json()
        assert data["schemaVersion"] == 1
        assert data["status"] == "SAT"
        assert data["bound"] == "w^4"
        assert data["level"] == 1
        assert data["witness"] == {"omega": {"letter": []}}
        assert set(data["stats"]) == {"stateCount", "factCount"}

    def test_unsat_json(self):
        data = json.loads(satisfiable(parse("p & !p"), 1).dumps())
        assert data["status"] == "UNSAT"
        assert data["bound"] == "w^2"
        assert data["witness"] is None and data["level"] is None

    def test_timing_only_on_request(self):
        verdict = satisfiable(parse("p"), 1)
        assert "elapsedMillis" in verdict.to_json(timing=True)["stats"]
        assert "elapsedMillis" not in verdict.to_json()["stats"]

    def test_output_deterministic(self):
        formula = parse("p U q & G F q")
        outputs = {satisfiable(formula, 2).dumps() for _ in range(3)}
        assert len(outputs) == 1

    def test_describe(self):
        text = satisfiable(parse("p"), 3).describe()
        assert text.splitlines()[0] == "SAT (bound w^4)"
        assert 'witness: {"letter":["p"]}' in text


class TestValidity:
    """有效性与等价性测试类"""

    def test_excluded_middle(self):
        assert valid(parse("p | !p"))

    def test_eventually_implies_itself(self):
        assert valid(parse("F p -> F p"))

    def test_atom_not_valid(self):
        assert not valid(parse("p"))
        verdict = counterexample(parse("X T"), 1)
        assert verdict.is_sat
        assert evaluate(neg(parse("X T")), verdict.witness)

    @pytest.mark.parametrize("k", [0, 1, 2])
    def test_recurrence_implies_eventually(self, k):
        assert valid(parse("G F p -> F p"), k)

    @pytest.mark.slow
    @pytest.mark.parametrize("k", [3, 4])
    def test_recurrence_implies_eventually_high_levels(self, k):
        assert valid(parse("G F p -> F p"), k)

    def test_eventually_idempotent(self):
        assert equivalent(parse("F F p"), parse("F p"))

    def test_next_differs_from_now(self, caplog):
        with caplog.at_level(logging.INFO, logger="solver_api"):
            assert not equivalent(parse("X p"), parse("p"), 2)
        assert "不等价" in caplog.text

    def test_reflexive_random(self):
        cfg = GenConfig(seed=52, max_size=6, prop_count=2, case_count=20)
        for i in range(cfg.case_count):
            formula = gen_formula(cfg, i)
            assert equivalent(formula, formula, 1)


class TestDuality:
    """对偶性检查测试类"""

    def test_random_formulas(self):
        cfg = GenConfig(seed=53, max_size=8, prop_count=2, case_count=30)
        for i in range(cfg.case_count):
            assert check_duality(gen_formula(cfg, i), 2)

    def test_both_unsat_logged(self, monkeypatch, caplog):
        unsat = Verdict(Status.UNSAT, None, None, SolverStats(0, 0, 0), 1)
        monkeypatch.setattr(solver_api, "satisfiable", lambda *args, **kwargs: unsat)
        with caplog.at_level(logging.WARNING, logger="solver_api"):
            assert not check_duality(parse("p"), 1)
        assert "都不可满足" in caplog.text
