"""On-the-fly product graph for query evaluation.

A state couples one NFA state per regular constraint, a position index
into the bound input paths (a counter that jumps to omega past their
end, or is omega throughout when nothing is bound), one graph node per
path variable, and a fixed assignment of the tracked node variables.
States are never materialized globally; the solver asks for start
states, successors, weights and target-ness on demand.

Transitions enforce, in one place, the four consistency rules that make
product paths encode exactly the constraint-satisfying path tuples:
bound components replay their input path position by position, a
component that has terminated stays on the sink forever, a component may
terminate only when its node satisfies its path-constraint targets, and
every NFA must take an enabled transition (real letters while its own
paths are alive, the terminated letter afterwards).

Path tuples decode from product paths by truncating each component at
its first sink; with that convention a product path of length L covers
exactly the tuples whose longest component has length L.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .automata import BOTTOM, Nfa, compile_regex, eval_node_constraint
from .extint import ExtInt, ext_add, ext_mul
from .graph import SINK, NodeId, path_index
from .query import PraQuery
from .validate import query_node_vars, query_path_vars

OMEGA = -1  # position index once past the bound input paths


@dataclass(frozen=True)
class AGState:
    nfa_states: Tuple[int, ...]
    pos: int
    nodes: Tuple[NodeId, ...]
    env: Tuple[NodeId, ...]


class AnswerGraph:
    """Implicit product of a graph, constraint NFAs and a position counter.

    `source` is a Graph or an ontology-extended view; `bound_paths` binds
    free path variables to concrete input paths, `bound_nodes` binds free
    node variables (as when a nested query is evaluated under an outer
    instantiation), and `target` names a labelling aggregated over some
    path variables for extremum queries.
    """

    def __init__(
        self,
        source,
        pra: PraQuery,
        bound_paths: Optional[Mapping[str, Sequence[NodeId]]] = None,
        bound_nodes: Optional[Mapping[str, NodeId]] = None,
        target: Optional[Tuple[str, Tuple[str, ...]]] = None,
    ):
        bound_paths = dict(bound_paths or {})
        bound_nodes = dict(bound_nodes or {})
        self.source = source
        self.pra = pra

        for v in bound_paths:
            if v not in pra.match_paths:
                raise ValueError(f"cannot bind non-free path variable {v!r}")
        for v in bound_nodes:
            if v not in pra.match_nodes:
                raise ValueError(f"cannot bind non-free node variable {v!r}")

        # path variables: bound free ones first, then unbound free, then
        # existential (the component order of every state's node tuple)
        all_paths = query_path_vars(pra)
        free = [v for v in all_paths if v in pra.match_paths]
        exist = [v for v in all_paths if v not in pra.match_paths]
        ordered = [v for v in free if v in bound_paths] \
            + [v for v in free if v not in bound_paths] + exist
        self.path_vars: Tuple[str, ...] = tuple(ordered)
        self.k = len(self.path_vars)
        self.k1 = len(bound_paths)
        self.bound: List[Optional[Tuple[NodeId, ...]]] = [
            tuple(bound_paths[v]) if v in bound_paths else None
            for v in self.path_vars
        ]
        for p in self.bound:
            if p and any(n == SINK for n in p):
                raise ValueError("input paths range over real nodes only")
        self.N = max((len(p) for p in self.bound if p is not None), default=0)
        self.start_pos = 1 if self.N >= 1 else OMEGA

        # tracked node variables: free ones, then path-constraint ones
        constraint_vars = []
        for pc in pra.path_constraints:
            for ref in (pc.source, pc.target):
                if not ref.literal and ref.name not in pra.match_nodes:
                    constraint_vars.append(ref.name)
        self.env_vars: Tuple[str, ...] = tuple(pra.match_nodes) + tuple(
            sorted(set(constraint_vars))
        )
        self._env_slot = {v: i for i, v in enumerate(self.env_vars)}
        reals = tuple(source.real_nodes)
        self._domains = [
            (bound_nodes[v],) if v in bound_nodes else reals
            for v in self.env_vars
        ]

        # per-component endpoint requirements from the path constraints
        pidx = {v: i for i, v in enumerate(self.path_vars)}
        self._src_slots: List[List[int]] = [[] for _ in range(self.k)]
        self._src_lits: List[List[NodeId]] = [[] for _ in range(self.k)]
        self._tgt_slots: List[List[int]] = [[] for _ in range(self.k)]
        self._tgt_lits: List[List[NodeId]] = [[] for _ in range(self.k)]
        self._constrained = [False] * self.k
        for pc in pra.path_constraints:
            i = pidx[pc.path_var]
            self._constrained[i] = True
            if pc.source.literal:
                self._src_lits[i].append(source.node_id(pc.source.name))
            else:
                self._src_slots[i].append(self._env_slot[pc.source.name])
            if pc.target.literal:
                self._tgt_lits[i].append(source.node_id(pc.target.name))
            else:
                self._tgt_slots[i].append(self._env_slot[pc.target.name])

        # compiled regular constraints with their component selectors
        self.nfas: List[Tuple[Nfa, Tuple[int, ...]]] = [
            (compile_regex(rc.regex), tuple(pidx[v] for v in rc.path_vars))
            for rc in pra.regular_constraints
        ]

        # arithmetical constraints: (terms, bound) with component selectors
        self._arith: List[List[Tuple[int, str, Tuple[int, ...]]]] = []
        self.bounds: Tuple[int, ...] = tuple(
            ac.bound for ac in pra.arith_constraints
        )
        for ac in pra.arith_constraints:
            self._arith.append([
                (t.coeff, t.labelling, tuple(pidx[v] for v in t.path_vars))
                for t in ac.terms
            ])
        self.m = len(self._arith)

        self.target: Optional[Tuple[str, Tuple[int, ...]]] = None
        if target is not None:
            name, path_sel = target
            self.target = (name, tuple(pidx[v] for v in path_sel))

        self._reals = reals

    # -- start and target states -----------------------------------------

    def start_states(self):
        for env in itertools.product(*self._domains):
            choices: List[Tuple[NodeId, ...]] = []
            ok = True
            for i in range(self.k):
                p = self.bound[i]
                if p is not None:
                    if self._constrained[i] and not self._endpoints_ok(i, p, env):
                        ok = False
                        break
                    choices.append((path_index(p, 1) if self.N >= 1 else SINK,))
                elif self._constrained[i]:
                    starts = {env[s] for s in self._src_slots[i]}
                    starts.update(self._src_lits[i])
                    if len(starts) != 1:
                        ok = False
                        break
                    choices.append((starts.pop(),))
                else:
                    choices.append(self._reals + (SINK,))
            if not ok:
                continue
            initials = [sorted(nfa.initial) for nfa, _ in self.nfas]
            for nodes in itertools.product(*choices):
                for combo in itertools.product(*initials):
                    yield AGState(tuple(combo), self.start_pos, nodes, env)

    def _endpoints_ok(self, i: int, p: Tuple[NodeId, ...],
                      env: Tuple[NodeId, ...]) -> bool:
        if not p:
            return False  # a path constraint needs a first and last node
        if any(env[s] != p[0] for s in self._src_slots[i]):
            return False
        if any(lit != p[0] for lit in self._src_lits[i]):
            return False
        if any(env[s] != p[-1] for s in self._tgt_slots[i]):
            return False
        return all(lit == p[-1] for lit in self._tgt_lits[i])

    def _can_end(self, i: int, node: NodeId, env: Tuple[NodeId, ...]) -> bool:
        if any(env[s] != node for s in self._tgt_slots[i]):
            return False
        return all(lit == node for lit in self._tgt_lits[i])

    def is_target(self, st: AGState) -> bool:
        if st.pos != OMEGA or any(n != SINK for n in st.nodes):
            return False
        return all(
            st.nfa_states[j] in nfa.final
            for j, (nfa, _) in enumerate(self.nfas)
        )

    # -- transitions --------------------------------------------------------

    def successors(self, st: AGState) -> List[AGState]:
        if st.pos == OMEGA:
            nxt_pos = OMEGA
        else:
            nxt_pos = st.pos + 1 if st.pos < self.N else OMEGA

        choices: List[Sequence[NodeId]] = []
        for i in range(self.k):
            p = self.bound[i]
            if p is not None:
                choices.append(
                    (SINK,) if nxt_pos == OMEGA else (path_index(p, nxt_pos),)
                )
            elif st.nodes[i] == SINK:
                choices.append((SINK,))
            elif self._can_end(i, st.nodes[i], st.env):
                choices.append(self._reals + (SINK,))
            else:
                choices.append(self._reals)

        out = set()
        move_cache: List[Dict[Tuple[NodeId, ...], List[Tuple[int, ...]]]] = [
            {} for _ in self.nfas
        ]
        cur_sels = [
            tuple(st.nodes[c] for c in sel) for _, sel in self.nfas
        ]
        for nodes in itertools.product(*choices):
            per_nfa: List[List[int]] = []
            feasible = True
            for j, (nfa, sel) in enumerate(self.nfas):
                nxt_sel = tuple(nodes[c] for c in sel)
                cached = move_cache[j].get(nxt_sel)
                if cached is None:
                    cur = cur_sels[j]
                    terminated = all(c == SINK for c in cur)
                    moves = []
                    for letter, dst in nfa.by_state.get(st.nfa_states[j], ()):
                        if (letter is BOTTOM) != terminated:
                            continue
                        if terminated or eval_node_constraint(
                                self.source, letter, cur, nxt_sel):
                            moves.append(dst)
                    cached = sorted(set(moves))
                    move_cache[j][nxt_sel] = cached
                if not cached:
                    feasible = False
                    break
                per_nfa.append(cached)
            if not feasible:
                continue
            for combo in itertools.product(*per_nfa):
                out.add(AGState(tuple(combo), nxt_pos, nodes, st.env))
        return sorted(out, key=lambda s: (s.nodes, s.nfa_states, s.pos))

    # -- weights --------------------------------------------------------------

    def weight(self, st: AGState) -> Tuple[ExtInt, ...]:
        """Per-constraint contribution of this state's node tuple.

        A term whose selected components are all sink contributes 0: the
        positionwise sum it models stops at the longest selected path.
        """
        return tuple(
            self._linear_value(terms, st.nodes) for terms in self._arith
        )

    def extremum_weight(self, st: AGState) -> ExtInt:
        name, sel = self.target
        return self._term_value(1, name, sel, st.nodes)

    def _linear_value(self, terms, nodes) -> ExtInt:
        total: ExtInt = 0
        for coeff, name, sel in terms:
            total = ext_add(total, self._term_value(coeff, name, sel, nodes))
        return total

    def _term_value(self, coeff, name, sel, nodes) -> ExtInt:
        key = tuple(nodes[c] for c in sel)
        if all(n == SINK for n in key):
            return 0
        return ext_mul(coeff, self.source.label_value(name, key))

    # -- decoding ----------------------------------------------------------------

    def decode(self, states: Sequence[AGState]):
        """Truncate each component at its first sink; report the env too."""
        paths: Dict[str, Tuple[NodeId, ...]] = {}
        for i, var in enumerate(self.path_vars):
            nodes: List[NodeId] = []
            for st in states:
                if st.nodes[i] == SINK:
                    break
                nodes.append(st.nodes[i])
            paths[var] = tuple(nodes)
        env = dict(zip(self.env_vars, states[0].env)) if states else {}
        return env, paths


def build(source, pra: PraQuery, bound_paths=None, bound_nodes=None,
          target=None) -> AnswerGraph:
    """Construct the implicit answer graph for a validated query."""
    return AnswerGraph(source, pra, bound_paths, bound_nodes, target)
