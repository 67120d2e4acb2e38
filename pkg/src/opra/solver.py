"""Bounded search over answer graphs.

Emptiness and extremum queries reduce to reachability over
configurations (product state, accumulated weight vector).  The search
is breadth-first with two sound prunings:

  * dominance: a configuration is dropped when an already-seen
    configuration at the same product state has componentwise smaller or
    equal accumulated weights (after sign normalization everything is
    minimized), which preserves both reachability of satisfying
    completions and minimal values;
  * monotonicity: when every possible per-state contribution to a
    constraint component is nonnegative, configurations already above
    that component's bound can never come back and are dropped.

Extrema follow a two-bound rule: take the best value over product paths
of length at most b1; if any path with length in (b1, b2] beats it, the
extremum is unbounded (reported as the matching infinity), and if no
path of length at most b2 satisfies the constraints at all, the result
is the empty-set convention (+inf for MIN, -inf for MAX).  The default
bounds grow with a capped product-size estimate and are overridable;
completeness holds for instances whose witnesses fit under b2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from .answer_graph import AGState, AnswerGraph
from .errors import ResourceExceededError
from .extint import NEG_INF, POS_INF, ExtInt, ext_add, ext_mul, is_finite
from .graph import SINK, NodeId

DEFAULT_BUDGET = 1_000_000
_BOUND_CAP = 10 ** 7


@dataclass
class SolveConfig:
    b1: Optional[int] = None          # short-path bound (phase 1)
    b2: Optional[int] = None          # witness bound (phase 2), b1 < b2
    visited_budget: int = DEFAULT_BUDGET
    state_cap: int = 10_000           # cap on the size estimate in derived bounds


@dataclass
class SolveStats:
    expanded: int = 0
    enqueued: int = 0
    depth: int = 0


@dataclass
class EmptinessResult:
    empty: bool
    env: Optional[Dict[str, NodeId]] = None
    paths: Optional[Dict[str, Tuple[NodeId, ...]]] = None
    stats: SolveStats = field(default_factory=SolveStats)


@dataclass
class ExtremumResult:
    value: ExtInt
    env: Optional[Dict[str, NodeId]] = None
    witness: Optional[Dict[str, Tuple[NodeId, ...]]] = None
    stats: SolveStats = field(default_factory=SolveStats)


def derive_bounds(ag: AnswerGraph, cfg: SolveConfig) -> Tuple[int, int]:
    """Default search bounds, shaped like the short-witness bounds for
    fixed-dimension integer-weighted reachability: polynomial in a capped
    product-size estimate, exponential in the constraint dimension."""
    if cfg.b1 is not None and cfg.b2 is not None:
        if not 0 < cfg.b1 < cfg.b2:
            raise ValueError("bounds must satisfy 0 < b1 < b2")
        return cfg.b1, cfg.b2
    n_nodes = len(tuple(ag.source.real_nodes)) + 1
    size = n_nodes ** ag.k * (ag.N + 2)
    for nfa, _ in ag.nfas:
        size *= max(nfa.n_states, 1)
    size = min(size, cfg.state_cap)
    w = 1
    for terms in ag._arith:
        for coeff, name, _ in terms:
            w = max(w, abs(coeff) * max(1, _finite_bound(ag.source, name)))
    if ag.target is not None:
        w = max(w, max(1, _finite_bound(ag.source, ag.target[0])))
    d = ag.m + 1
    b1 = min(size * (2 * d * w * size + 1) ** d, _BOUND_CAP)
    b1 = cfg.b1 if cfg.b1 is not None else b1
    b2 = cfg.b2 if cfg.b2 is not None else 2 * b1
    if not 0 < b1 < b2:
        raise ValueError("bounds must satisfy 0 < b1 < b2")
    return b1, b2


def _finite_bound(source, name: str) -> int:
    lab = getattr(source, "labellings", {}).get(name)
    if lab is not None:
        return lab.finite_bound()
    base = getattr(source, "base", None)
    if base is not None and name in base.labellings:
        return base.labellings[name].finite_bound()
    return 1  # on-demand labelling: magnitude unknown up front


def _value_range(source, name: str) -> Tuple[ExtInt, ExtInt]:
    lab = getattr(source, "labellings", {}).get(name)
    if lab is None:
        base = getattr(source, "base", None)
        lab = base.labellings.get(name) if base is not None else None
    if lab is None:
        return NEG_INF, POS_INF
    lo = hi = lab.default
    for v in lab.entries.values():
        lo = min(lo, v)
        hi = max(hi, v)
    return lo, hi


def _monotone_components(ag: AnswerGraph) -> Tuple[bool, ...]:
    """Components whose per-state contribution is provably >= 0."""
    flags = []
    for terms in ag._arith:
        lo: ExtInt = 0
        for coeff, name, _ in terms:
            vlo, vhi = _value_range(ag.source, name)
            contrib = ext_mul(coeff, vlo if coeff >= 0 else vhi)
            # all-sink positions contribute 0, so 0 is always possible
            lo = ext_add(lo, min(0, contrib)) if is_finite(contrib) else NEG_INF
            if lo == NEG_INF:
                break
        flags.append(lo >= 0)
    return tuple(flags)


class _Dominance:
    """Per-state antichains of componentwise-minimal weight vectors."""

    def __init__(self):
        self.store: Dict[AGState, List[Tuple[ExtInt, ...]]] = {}

    def admit(self, state: AGState, acc: Tuple[ExtInt, ...]) -> bool:
        vecs = self.store.get(state)
        if vecs is None:
            self.store[state] = [acc]
            return True
        for v in vecs:
            if all(a <= b for a, b in zip(v, acc)):
                return False
        self.store[state] = [
            v for v in vecs if not all(a <= b for a, b in zip(acc, v))
        ]
        self.store[state].append(acc)
        return True


def _sat(acc: Sequence[ExtInt], bounds: Sequence[int]) -> bool:
    return all(a <= c for a, c in zip(acc, bounds))


class _Search:
    def __init__(self, ag: AnswerGraph, bounds, cfg: SolveConfig,
                 with_target: bool,
                 on_expand: Optional[Callable[[AGState, int], None]] = None,
                 negate_target: bool = False):
        self.ag = ag
        self.bounds = ag.bounds if bounds is None else tuple(bounds)
        if len(self.bounds) != ag.m:
            raise ValueError(f"expected {ag.m} constraint bounds")
        self.cfg = cfg
        self.with_target = with_target
        self.negate = negate_target
        self.on_expand = on_expand
        self.stats = SolveStats()
        self.dom = _Dominance()
        self.parent: Dict[Tuple[AGState, Tuple[ExtInt, ...]],
                          Optional[Tuple[AGState, Tuple[ExtInt, ...]]]] = {}
        self.monotone = _monotone_components(ag)

    def weight_vec(self, st: AGState) -> Tuple[ExtInt, ...]:
        w = self.ag.weight(st)
        if self.with_target:
            t = self.ag.extremum_weight(st)
            if self.negate and is_finite(t):
                t = -t
            elif self.negate:
                t = NEG_INF if t == POS_INF else POS_INF
            w = w + (t,)
        return w

    def prune_monotone(self, acc: Tuple[ExtInt, ...]) -> bool:
        for i, mono in enumerate(self.monotone):
            if mono and acc[i] > self.bounds[i]:
                return True
        return False

    def levels(self, max_depth: int):
        """Yield (depth, configs-at-depth) up to max_depth; stops early
        when the frontier dies out."""
        level = []
        for st in self.ag.start_states():
            acc = self.weight_vec(st)
            key = (st, acc)
            if key in self.parent or self.prune_monotone(acc):
                continue
            if self.dom.admit(st, acc):
                self.parent[key] = None
                self.stats.enqueued += 1
                level.append(key)
        depth = 0
        while level:
            yield depth, level
            if depth >= max_depth:
                return
            nxt = []
            for st, acc in level:
                self.stats.expanded += 1
                self._budget_check()
                if self.on_expand:
                    self.on_expand(st, depth)
                for succ in self.ag.successors(st):
                    acc2 = tuple(
                        ext_add(a, w)
                        for a, w in zip(acc, self.weight_vec(succ))
                    )
                    key = (succ, acc2)
                    if key in self.parent or self.prune_monotone(acc2):
                        continue
                    if self.dom.admit(succ, acc2):
                        self.parent[key] = (st, acc)
                        self.stats.enqueued += 1
                        nxt.append(key)
            depth += 1
            self.stats.depth = depth
            level = nxt

    def _budget_check(self):
        if self.stats.enqueued > self.cfg.visited_budget:
            raise ResourceExceededError(
                f"visited budget {self.cfg.visited_budget} exceeded",
                expanded=self.stats.expanded,
            )

    def reconstruct(self, key):
        chain = []
        while key is not None:
            chain.append(key[0])
            key = self.parent[key]
        chain.reverse()
        return self.ag.decode(chain)


def check_empty(ag: AnswerGraph, bounds: Optional[Sequence[int]] = None,
                cfg: Optional[SolveConfig] = None,
                on_expand=None) -> EmptinessResult:
    """Is there a start-to-target product path meeting every arithmetical
    bound?  Complete for instances whose minimal witness fits under b2."""
    cfg = cfg or SolveConfig()
    _, b2 = derive_bounds(ag, cfg)
    search = _Search(ag, bounds, cfg, with_target=False, on_expand=on_expand)
    for depth, level in search.levels(b2):
        for st, acc in level:
            if ag.is_target(st) and _sat(acc, search.bounds):
                env, paths = search.reconstruct((st, acc))
                return EmptinessResult(False, env, paths, search.stats)
    return EmptinessResult(True, stats=search.stats)


MIN = "min"
MAX = "max"


def extremum(ag: AnswerGraph, mode: str,
             bounds: Optional[Sequence[int]] = None,
             cfg: Optional[SolveConfig] = None,
             on_expand=None) -> ExtremumResult:
    """Minimum (or maximum) of the target aggregate over satisfying paths.

    Phase 1 takes the best value over paths of length <= b1; any strictly
    better path with length in (b1, b2] makes the result -inf (MIN) or
    +inf (MAX); no satisfying path at all gives the empty-set convention.
    """
    if ag.target is None:
        raise ValueError("answer graph was built without a target labelling")
    if mode not in (MIN, MAX):
        raise ValueError("mode must be 'min' or 'max'")
    cfg = cfg or SolveConfig()
    b1, b2 = derive_bounds(ag, cfg)
    negate = mode == MAX
    search = _Search(ag, bounds, cfg, with_target=True, negate_target=negate)

    best: Optional[ExtInt] = None
    best_key = None
    for depth, level in search.levels(b2):
        for st, acc in level:
            if not ag.is_target(st) or not _sat(acc, search.bounds):
                continue
            value = acc[-1]
            if depth <= b1:
                if best is None or value < best:
                    best, best_key = value, (st, acc)
            elif best is None or value < best:
                # a longer path beats every short one: unbounded extremum
                unbounded = NEG_INF if mode == MIN else POS_INF
                return ExtremumResult(unbounded, stats=search.stats)
    if best is None:
        return ExtremumResult(POS_INF if mode == MIN else NEG_INF,
                              stats=search.stats)
    env, paths = search.reconstruct(best_key)
    value = best if not negate else (
        -best if is_finite(best) else (NEG_INF if best == POS_INF else POS_INF)
    )
    return ExtremumResult(value, env, paths, search.stats)


def enumerate_answers(ag: AnswerGraph, max_len: int,
                      bounds: Optional[Sequence[int]] = None,
                      cfg: Optional[SolveConfig] = None,
                      track_all: bool = False):
    """All decoded answers whose product paths have at most max_len steps.

    An answer is (free-node assignment, free-path tuple); with track_all
    every path variable's component is reported instead, which is what
    the engine/oracle equivalence tests compare.  No dominance pruning
    here: enumeration must see every distinct decoded answer.
    """
    cfg = cfg or SolveConfig()
    n_free_nodes = len(ag.pra.match_nodes)
    if track_all:
        tracked = list(range(ag.k))
    else:
        tracked = [
            i for i, v in enumerate(ag.path_vars)
            if v in ag.pra.match_paths
        ]
    effective = ag.bounds if bounds is None else tuple(bounds)
    stats = SolveStats()
    answers = set()

    def prefixes_of(st: AGState, prev: Tuple[Tuple[NodeId, ...], ...]):
        out = []
        for slot, i in enumerate(tracked):
            if ag.bound[i] is not None:
                out.append(ag.bound[i])
            elif st.nodes[i] != SINK:
                out.append(prev[slot] + (st.nodes[i],))
            else:
                out.append(prev[slot])
        return tuple(out)

    empty_prefixes = tuple(() for _ in tracked)
    level = []
    seen = set()
    for st in ag.start_states():
        acc = ag.weight(st)
        cfgkey = (st, prefixes_of(st, empty_prefixes), acc)
        if cfgkey not in seen:
            seen.add(cfgkey)
            level.append(cfgkey)
            stats.enqueued += 1

    depth = 0
    while level:
        for st, prefix, acc in level:
            stats.expanded += 1
            if stats.enqueued > cfg.visited_budget:
                raise ResourceExceededError(
                    f"visited budget {cfg.visited_budget} exceeded",
                    expanded=stats.expanded,
                )
            if ag.is_target(st) and _sat(acc, effective):
                env_free = tuple(st.env[:n_free_nodes])
                answers.add((env_free, prefix))
        if depth >= max_len:
            break
        nxt = []
        for st, prefix, acc in level:
            for succ in ag.successors(st):
                acc2 = tuple(
                    ext_add(a, w) for a, w in zip(acc, ag.weight(succ))
                )
                key = (succ, prefixes_of(succ, prefix), acc2)
                if key not in seen:
                    seen.add(key)
                    stats.enqueued += 1
                    nxt.append(key)
        level = nxt
        depth += 1
        stats.depth = depth
    return answers, stats
