#!/usr/bin/env python3
"""
序数自动机
由公式构造自动机：状态是闭包的极大一致集，后继转移由严格 X/U 的单步规则给出，
极限转移由"极限之下共尾出现的状态集合"决定。

空性判定按层进行：第 j 层的步进事实描述长度为 ω^j 的一段运行。
第 0 层事实就是后继边；第 j+1 层事实由第 j 层以内的闭合回路加一次极限转移得到。
找到接受运行后生成运行骨架，再由骨架还原见证单词。
"""

import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple, Union

import networkx as nx
import numpy as np

from errors import SkeletonError, StateExplosionError
from formula import (
    Closure,
    Formula,
    MaxConsSet,
    Next,
    Until,
    closure,
    enumerate_maxcons,
    letter_of,
    normalize,
)
from ordinal_word import OmegaPow, Single, Word, cat

logger = logging.getLogger(__name__)

# 2^22 个状态，对应 22 个互补对
DEFAULT_MAX_STATES = 2**22

# (任意位置为真的成员, 所有位置都为真的成员)，各为闭包下标的位掩码
Profile = Tuple[int, int]


# ---------------------------------------------------------------------------
# 极限转移规则
# 参数均为布尔值；cont 表示"在极限位置 t 处 ψ2 成立，或 ψ1 与 u 同时成立"，
# 可以是标量，也可以是按状态排列的 numpy 布尔数组。
# ---------------------------------------------------------------------------


def _pending_passes_limit(any_u, any_b, all_u, all_a, cont):
    """共尾未兑现的 u 必须处处成立，并延续到极限位置"""
    return np.logical_or(
        not (any_u and not any_b), np.logical_and(all_u and all_a, cont)
    )


def _forced_from_below(any_u, any_b, all_u, all_a, cont):
    """ψ1 处处成立且 ψ2 共尾出现或在极限处可延续时，u 必须处处成立"""
    return np.logical_or(
        all_u, np.logical_not(np.logical_and(all_a, np.logical_or(any_b, cont)))
    )


def _falsity_justified(any_u, any_b, all_u, all_a, cont):
    """u 在某处为假且 ψ2 从不出现时，假值必须有理由"""
    return np.logical_or(
        not (not all_u and not any_b), np.logical_not(np.logical_and(all_a, cont))
    )


def _continues(members: FrozenSet[Formula], until: Until) -> bool:
    return until.right in members or (until.left in members and until in members)


def _profile_bits(profile: Profile, u: int, a: int, b: int) -> Tuple[bool, bool, bool, bool]:
    any_mask, all_mask = profile
    return (
        bool(any_mask >> u & 1),
        bool(any_mask >> b & 1),
        bool(all_mask >> u & 1),
        bool(all_mask >> a & 1),
    )


def _join(left: Profile, right: Profile) -> Profile:
    return left[0] | right[0], left[1] & right[1]


def _state_mask(state: MaxConsSet) -> int:
    mask = 0
    for formula in state.members:
        mask |= 1 << state.closure.index(formula)
    return mask


def _profile_of(states: Iterable[MaxConsSet]) -> Tuple[Closure, Profile]:
    states = list(states)
    if not states:
        raise ValueError("状态集合不能为空")
    c = states[0].closure
    masks = [_state_mask(s) for s in states]
    any_mask, all_mask = 0, masks[0]
    for mask in masks:
        any_mask |= mask
        all_mask &= mask
    return c, (any_mask, all_mask)


def _until_indices(c: Closure) -> List[Tuple[int, int, int]]:
    return [(c.index(u), c.index(u.left), c.index(u.right)) for u in c.untils()]


# ---------------------------------------------------------------------------
# 转移判定（直接作用于极大一致集）
# ---------------------------------------------------------------------------


def succ_allowed(s: MaxConsSet, t: MaxConsSet) -> bool:
    """后继转移：X 与 U 成员在相邻位置之间的一步约束"""
    for formula in s.closure.nexts():
        if (formula in s) != (formula.operand in t):
            return False
    for until in s.closure.untils():
        if (until in s) != _continues(t.members, until):
            return False
    return True


def limit_allowed(states: Iterable[MaxConsSet], t: MaxConsSet) -> bool:
    """极限转移：共尾状态集合为 states 时，极限位置的状态能否是 t"""
    c, profile = _profile_of(states)
    for until, (u, a, b) in zip(c.untils(), _until_indices(c)):
        bits = _profile_bits(profile, u, a, b)
        cont = _continues(t.members, until)
        for rule in (_pending_passes_limit, _forced_from_below, _falsity_justified):
            if not rule(*bits, cont):
                return False
    return True


def end_consistent(s: MaxConsSet) -> bool:
    """s 可以作为最后一个位置：没有 X 成员，也没有 Until 成员"""
    return not any(isinstance(f, (Next, Until)) for f in s.members)


def limit_end_accepting(states: Iterable[MaxConsSet]) -> bool:
    """极限长度的结尾：共尾未兑现的 Until 必须共尾兑现"""
    c, profile = _profile_of(states)
    return _profile_accepts_end(profile, _until_indices(c))


def _profile_accepts_end(profile: Profile, untils: List[Tuple[int, int, int]]) -> bool:
    any_mask = profile[0]
    return all(not (any_mask >> u & 1) or bool(any_mask >> b & 1) for u, _, b in untils)


# ---------------------------------------------------------------------------
# 自动机
# ---------------------------------------------------------------------------


class OrdinalAutomaton:
    """显式状态的序数自动机，构造后不再修改"""

    def __init__(self, formula: Formula, c: Closure, states: Tuple[MaxConsSet, ...]):
        self.formula = formula
        self.closure = c
        self.states = states
        self.membership = np.array(
            [[f in s for f in c.members] for s in states], dtype=bool
        ).reshape(len(states), len(c))
        self.initial: Tuple[int, ...] = tuple(
            i for i, s in enumerate(states) if formula in s
        )
        self.masks: Tuple[int, ...] = tuple(_state_mask(s) for s in states)
        self.untils = _until_indices(c)

        relevant = 0
        for u, a, b in self.untils:
            relevant |= (1 << u) | (1 << a) | (1 << b)
        self._relevant = relevant

        m = self.membership
        # 每个 Until 在各状态上的"可延续"向量，后继规则与极限规则共用
        self._continuation = {
            u: m[:, b] | (m[:, a] & m[:, u]) for u, a, b in self.untils
        }
        self.successors: Tuple[Tuple[int, ...], ...] = tuple(
            self._successor_row(i) for i in range(len(states))
        )
        self.end_states = frozenset(
            i for i, s in enumerate(states) if end_consistent(s)
        )

        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(range(len(states)))
        for i, row in enumerate(self.successors):
            self.graph.add_edges_from((i, j) for j in row)

    def _successor_row(self, row: int) -> Tuple[int, ...]:
        c, m = self.closure, self.membership
        allowed = np.ones(len(self.states), dtype=bool)
        for formula in c.nexts():
            x, o = c.index(formula), c.index(formula.operand)
            allowed &= m[:, o] == m[row, x]
        for u, _, _ in self.untils:
            allowed &= self._continuation[u] == m[row, u]
        return tuple(int(j) for j in np.flatnonzero(allowed))

    @property
    def edge_count(self) -> int:
        return self.graph.number_of_edges()

    def state_profile(self, index: int) -> Profile:
        mask = self.masks[index] & self._relevant
        return mask, mask

    def limit_targets(self, profile: Profile) -> np.ndarray:
        """给定共尾轮廓，返回所有允许作为极限位置状态的布尔向量"""
        allowed = np.ones(len(self.states), dtype=bool)
        for u, a, b in self.untils:
            bits = _profile_bits(profile, u, a, b)
            cont = self._continuation[u]
            allowed &= _pending_passes_limit(*bits, cont)
            allowed &= _forced_from_below(*bits, cont)
            allowed &= _falsity_justified(*bits, cont)
        return allowed

    def accepts_limit_end(self, profile: Profile) -> bool:
        return _profile_accepts_end(profile, self.untils)


def build(formula: Formula, max_states: int = DEFAULT_MAX_STATES) -> OrdinalAutomaton:
    """构造公式的序数自动机，状态数上界超过 max_states 时拒绝"""
    formula = normalize(formula)
    c = closure(formula).with_top()
    if 2**c.pairs > max_states:
        raise StateExplosionError(
            f"闭包有 {c.pairs} 个互补对，状态数上界 2^{c.pairs} 超过限制 {max_states}"
        )
    states = enumerate_maxcons(c)
    assert len(states) <= 2 ** (len(c) // 2), "极大一致集数量超过 2^(|cl|/2)"
    automaton = OrdinalAutomaton(formula, c, states)
    logger.info(
        f"自动机: {len(states)} 个状态, {automaton.edge_count} 条后继边, "
        f"{len(automaton.initial)} 个初始状态, 闭包大小 {len(c)}"
    )
    return automaton


# ---------------------------------------------------------------------------
# 运行骨架
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Finite:
    """有限段：依次经过的状态"""

    states: Tuple[MaxConsSet, ...]


@dataclass(frozen=True)
class LimitStep:
    """prefix 之后接 cycle 的 ω 次重复；target 是极限位置的状态，结尾处为 None"""

    prefix: Optional["RunSkeleton"]
    cycle: Tuple["RunSkeleton", ...]
    target: Optional[MaxConsSet]


@dataclass(frozen=True)
class Chain:
    parts: Tuple["RunSkeleton", ...]


RunSkeleton = Union[Finite, LimitStep, Chain]


def skeleton_level(skeleton: RunSkeleton) -> int:
    if isinstance(skeleton, Finite):
        return 0
    if isinstance(skeleton, Chain):
        return max(skeleton_level(part) for part in skeleton.parts)
    inner = 1 + max(skeleton_level(part) for part in skeleton.cycle)
    if skeleton.prefix is None:
        return inner
    return max(inner, skeleton_level(skeleton.prefix))


def extract_witness(skeleton: RunSkeleton) -> Word:
    """沿骨架把每个状态替换为它的字母，还原见证单词"""
    if isinstance(skeleton, Finite):
        if not skeleton.states:
            raise SkeletonError("有限段不能为空")
        return cat(*(Single(letter_of(s)) for s in skeleton.states))
    if isinstance(skeleton, Chain):
        if not skeleton.parts:
            raise SkeletonError("Chain 不能为空")
        return cat(*(extract_witness(part) for part in skeleton.parts))
    if isinstance(skeleton, LimitStep):
        if not skeleton.cycle:
            raise SkeletonError("极限步的回路不能为空")
        loop = OmegaPow(cat(*(extract_witness(part) for part in skeleton.cycle)))
        if skeleton.prefix is None:
            return loop
        return cat(extract_witness(skeleton.prefix), loop)
    raise SkeletonError(f"未知的骨架节点: {skeleton!r}")


# ---------------------------------------------------------------------------
# 分层空性判定
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StepFact:
    """
    (source, visited, target)：从 source 出发的一段长度为 ω^level 的运行，
    结束后下一个位置的状态是 target；visited 包含 source 与 target。
    cycle 是极限事实所依据的闭合回路，后继事实为空。
    """

    source: int
    target: int
    level: int
    visited: FrozenSet[int]
    profile: Profile
    cycle: Tuple["StepFact", ...] = ()


@dataclass(frozen=True)
class StepRelation:
    level: int
    facts: Tuple[StepFact, ...]


Walk = Tuple[StepFact, ...]


class EmptinessSearch:
    """
    空性判定的工作区，事实按需生成并缓存。
    同一源状态下目标与轮廓都相同的事实只保留最先得到（最短）的一个。
    """

    def __init__(self, automaton: OrdinalAutomaton):
        self.automaton = automaton
        self.fact_count = 0
        self._successor_facts: Dict[int, List[StepFact]] = {}
        self._limit_facts: Dict[Tuple[int, int], List[StepFact]] = {}
        self._walks: Dict[Tuple[int, int], Dict[Profile, Walk]] = {}
        self._known: Dict[int, Set[Tuple[int, Profile]]] = {}

    def _successors(self, node: int) -> List[StepFact]:
        facts = self._successor_facts.get(node)
        if facts is None:
            a = self.automaton
            known = self._known.setdefault(node, set())
            facts = []
            for target in a.successors[node]:
                profile = _join(a.state_profile(node), a.state_profile(target))
                known.add((target, profile))
                facts.append(
                    StepFact(node, target, 0, frozenset((node, target)), profile)
                )
            self.fact_count += len(facts)
            self._successor_facts[node] = facts
        return facts

    def _limit_facts_at(self, node: int, level: int) -> List[StepFact]:
        """node 处第 level 层新增的极限事实，回路只使用更低层的事实"""
        key = (node, level)
        facts = self._limit_facts.get(key)
        if facts is not None:
            return facts
        self._successors(node)
        for lower in range(1, level):
            self._limit_facts_at(node, lower)
        a = self.automaton
        known = self._known[node]
        facts = []
        for profile, walk in self._closed_walks(node, level - 1).items():
            visited = frozenset().union(*(fact.visited for fact in walk))
            for target in np.flatnonzero(a.limit_targets(profile)):
                target = int(target)
                fact_profile = _join(profile, a.state_profile(target))
                if (target, fact_profile) in known:
                    continue
                known.add((target, fact_profile))
                facts.append(
                    StepFact(node, target, level, visited | {target}, fact_profile, walk)
                )
        self.fact_count += len(facts)
        self._limit_facts[key] = facts
        return facts

    def edges(self, node: int, level: int) -> List[StepFact]:
        """从 node 出发、层数不超过 level 的全部事实"""
        result = list(self._successors(node))
        for current in range(1, level + 1):
            result.extend(self._limit_facts_at(node, current))
        return result

    def _closed_walks(self, head: int, level: int) -> Dict[Profile, Walk]:
        """
        从 head 出发回到 head 的闭合回路，按轮廓去重，每个轮廓保留最短的一条。
        在 (状态, 轮廓) 上做广度优先搜索；起点本身不计入已访问集合，
        这样回到 head 的路径也会被记录。
        """
        key = (head, level)
        cached = self._walks.get(key)
        if cached is not None:
            return cached
        start = self.automaton.state_profile(head)
        walks: Dict[Profile, Walk] = {}
        seen: Set[Tuple[int, Profile]] = set()
        queue = deque([(head, start, ())])
        while queue:
            node, profile, path = queue.popleft()
            for fact in self.edges(node, level):
                joined = _join(profile, fact.profile)
                extended = path + (fact,)
                if fact.target == head and joined not in walks:
                    walks[joined] = extended
                state = (fact.target, joined)
                if state in seen:
                    continue
                seen.add(state)
                queue.append((fact.target, joined, extended))
        self._walks[key] = walks
        return walks

    def _reach(self, level: int) -> Dict[int, Walk]:
        """从初始状态出发、只用不超过 level 层事实时的最短事实路径"""
        paths: Dict[int, Walk] = {}
        queue = deque()
        for node in self.automaton.initial:
            paths[node] = ()
            queue.append(node)
        while queue:
            node = queue.popleft()
            for fact in self.edges(node, level):
                if fact.target not in paths:
                    paths[fact.target] = paths[node] + (fact,)
                    queue.append(fact.target)
        return paths

    def step_relation(self, level: int) -> StepRelation:
        facts: List[StepFact] = []
        for node in range(len(self.automaton.states)):
            if level == 0:
                facts.extend(self._successors(node))
            else:
                facts.extend(self._limit_facts_at(node, level))
        return StepRelation(level, tuple(facts))

    def run(self, max_level: int) -> Optional[Tuple[RunSkeleton, int]]:
        """
        逐层查找接受运行，返回 (骨架, 层数)；层数即见证单词中 OmegaPow 的嵌套深度。
        每层先找以后继位置结尾的单词，再找以极限结尾的单词。
        """
        a = self.automaton
        if not a.initial:
            return None
        for level in range(max_level + 1):
            paths = self._reach(level)
            logger.debug(
                f"第 {level} 层: 可达 {len(paths)} 个状态, 已生成 {self.fact_count} 个事实"
            )
            for node, path in paths.items():
                if node in a.end_states:
                    return self._skeleton(path, end=node), level
            if level == 0:
                continue
            for node, path in paths.items():
                for profile, walk in self._closed_walks(node, level - 1).items():
                    if a.accepts_limit_end(profile):
                        return self._skeleton(path, final_cycle=walk), level
        return None

    def _parts(self, facts: Walk) -> List[RunSkeleton]:
        states = self.automaton.states
        parts: List[RunSkeleton] = []
        run: List[MaxConsSet] = []
        for fact in facts:
            if fact.level == 0:
                run.append(states[fact.source])
                continue
            if run:
                parts.append(Finite(tuple(run)))
                run = []
            prefix = _chain(parts)
            cycle = tuple(self._parts(fact.cycle))
            parts = [LimitStep(prefix, cycle, states[fact.target])]
        if run:
            parts.append(Finite(tuple(run)))
        return parts

    def _skeleton(
        self, path: Walk, end: Optional[int] = None, final_cycle: Optional[Walk] = None
    ) -> RunSkeleton:
        parts = self._parts(path)
        if end is not None:
            tail = Finite((self.automaton.states[end],))
            if parts and isinstance(parts[-1], Finite):
                parts[-1] = Finite(parts[-1].states + tail.states)
            else:
                parts.append(tail)
        else:
            cycle = tuple(self._parts(final_cycle))
            parts = [LimitStep(_chain(parts), cycle, None)]
        skeleton = _chain(parts)
        if skeleton is None:
            raise SkeletonError("空的接受运行")
        return skeleton


def _chain(parts: List[RunSkeleton]) -> Optional[RunSkeleton]:
    if not parts:
        return None
    if len(parts) == 1:
        return parts[0]
    return Chain(tuple(parts))


def emptiness(
    automaton: OrdinalAutomaton, max_level: int
) -> Optional[Tuple[RunSkeleton, int]]:
    """长度小于 ω^(max_level+1) 的单词中是否有被接受的；无则返回 None"""
    return EmptinessSearch(automaton).run(max_level)


# ---------------------------------------------------------------------------
# DOT 导出
# ---------------------------------------------------------------------------


def to_dot(automaton: OrdinalAutomaton) -> str:
    """
    后继图的 DOT 文本。节点标签是按闭包顺序列出的成员公式；
    初始状态用双圈，可以作为结尾的状态加粗。
    """
    initial = set(automaton.initial)
    lines = [
        "digraph ordltl {",
        "  rankdir=LR;",
        f'  label="initial states: {len(initial)}";',
    ]
    for i, state in enumerate(automaton.states):
        shape = "doublecircle" if i in initial else "circle"
        attributes = [f'label="{_escape(state.label())}"', f"shape={shape}"]
        if i in automaton.end_states:
            attributes.append("style=bold")
        lines.append(f"  s{i} [{', '.join(attributes)}];")
    for source, target in sorted(automaton.graph.edges()):
        lines.append(f"  s{source} -> s{target};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')
