"""Brute-force reference semantics.

Everything here evaluates queries by direct enumeration of path tuples
up to a length bound, checking the constraint definitions literally:
path constraints by endpoint comparison, regular constraints by NFA
simulation of the induced word (with subset statesets as a pruning
device, which only ever discards prefixes no extension can save), and
arithmetical constraints by positionwise aggregation.  Ontology
labellings evaluate by direct recursion on the term semantics, with
extrema taken over the enumerated satisfying paths.

The answer-graph and solver modules are never imported: this module is
the independent side of every differential test.

A separate membership check for regular constraints, `regex_matches`,
decides the language inductively over the regex tree (concatenation
splits, union branches, star closures) instead of via the compiled NFA,
so the two regex semantics can be tested against each other.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Dict, Iterator, List, Mapping, Optional, Sequence, Tuple

from .automata import Nfa, compile_regex, eval_node_constraint, step
from .errors import (
    ArityMismatchError,
    EnumerationCapExceededError,
    UnknownLabellingError,
)
from .extint import NEG_INF, POS_INF, ExtInt, ext_add, ext_mul
from .graph import SINK, Graph, NodeId, aggregate, path_index
from .query import (
    AggTerm, ApplyTerm, Concat, ConstTerm, Epsilon, IndicatorTerm, LabelTerm,
    Letter, MaxPathTerm, MinPathTerm, OntologyEntry, OpraQuery, PraQuery,
    Regex, Star, Term, Union_, VarEqTerm,
)
from .validate import ValidatedQuery, query_node_vars, query_path_vars


@dataclass
class OracleConfig:
    max_path_len: int = 6
    max_paths: int = 2_000_000  # cap on visited enumeration-tree nodes


# -- direct regex-language membership (independent of the NFA) -----------------

def regex_matches(source, regex: Regex, letters: Sequence[tuple]) -> bool:
    """Inductive membership of a concrete letter sequence in the regex
    language: letters match node constraints, concatenation splits the
    word, union takes either branch, star is the iterated closure."""
    memo: Dict[Tuple[int, int, int], bool] = {}

    def m(r: Regex, i: int, j: int) -> bool:
        key = (id(r), i, j)
        got = memo.get(key)
        if got is not None:
            return got
        if isinstance(r, Epsilon):
            out = i == j
        elif isinstance(r, Letter):
            out = j == i + 1 and eval_node_constraint(
                source, r.constraint, *letters[i]
            )
        elif isinstance(r, Union_):
            out = m(r.left, i, j) or m(r.right, i, j)
        elif isinstance(r, Concat):
            out = any(
                m(r.left, i, k) and m(r.right, k, j) for k in range(i, j + 1)
            )
        elif isinstance(r, Star):
            out = i == j or any(
                m(r.body, i, k) and m(r, k, j) for k in range(i + 1, j + 1)
            )
        else:
            raise TypeError(f"not a regex: {r!r}")
        memo[key] = out
        return out

    return m(regex, 0, len(letters))


def letters_of(paths: Sequence[Sequence[NodeId]]) -> List[tuple]:
    s = max((len(p) for p in paths), default=0)
    return [
        (
            tuple(path_index(p, i) for p in paths),
            tuple(path_index(p, i + 1) for p in paths),
        )
        for i in range(1, s + 1)
    ]


def match_paths_language(source, regex: Regex,
                         paths: Sequence[Sequence[NodeId]]) -> bool:
    return regex_matches(source, regex, letters_of(paths))


# -- joint enumeration of satisfying path tuples --------------------------------

class _Enumerator:
    def __init__(self, source, pra: PraQuery, cfg: OracleConfig,
                 bound_nodes: Optional[Mapping[str, NodeId]] = None,
                 bound_paths: Optional[Mapping[str, Sequence[NodeId]]] = None):
        self.source = source
        self.pra = pra
        self.cfg = cfg
        self.bound_nodes = dict(bound_nodes or {})
        self.bound_paths = {
            v: tuple(p) for v, p in (bound_paths or {}).items()
        }
        self.node_vars = query_node_vars(pra)
        self.path_vars = query_path_vars(pra)
        self.nfas: List[Tuple[Nfa, Tuple[int, ...]]] = []
        pidx = {v: i for i, v in enumerate(self.path_vars)}
        for rc in pra.regular_constraints:
            self.nfas.append(
                (compile_regex(rc.regex), tuple(pidx[v] for v in rc.path_vars))
            )
        self.src_of: List[List[object]] = [[] for _ in self.path_vars]
        self.tgt_of: List[List[object]] = [[] for _ in self.path_vars]
        for pc in pra.path_constraints:
            i = pidx[pc.path_var]
            src = self.source.node_id(pc.source.name) if pc.source.literal \
                else pc.source.name
            tgt = self.source.node_id(pc.target.name) if pc.target.literal \
                else pc.target.name
            self.src_of[i].append(src)
            self.tgt_of[i].append(tgt)
        self.reals = tuple(source.real_nodes)
        self.nodes_visited = 0

    def _resolve(self, req, env: Mapping[str, NodeId]) -> NodeId:
        return req if isinstance(req, int) else env[req]

    def run(self) -> Iterator[Tuple[Dict[str, NodeId],
                                    Dict[str, Tuple[NodeId, ...]]]]:
        domains = [
            (self.bound_nodes[v],) if v in self.bound_nodes else self.reals
            for v in self.node_vars
        ]
        for combo in itertools.product(*domains):
            env = dict(zip(self.node_vars, combo))
            yield from self._per_env(env)

    def _per_env(self, env):
        starts: List[Sequence[NodeId]] = []
        for i, v in enumerate(self.path_vars):
            if v in self.bound_paths:
                p = self.bound_paths[v]
                if self.src_of[i] or self.tgt_of[i]:
                    if not p:
                        return
                    if any(self._resolve(r, env) != p[0]
                           for r in self.src_of[i]):
                        return
                    if any(self._resolve(r, env) != p[-1]
                           for r in self.tgt_of[i]):
                        return
                starts.append((p[0] if p else SINK,))
            elif self.src_of[i] or self.tgt_of[i]:
                required = {self._resolve(r, env) for r in self.src_of[i]}
                if len(required) > 1:
                    return
                starts.append((required.pop(),) if required else self.reals)
            else:
                starts.append(self.reals + (SINK,))
        statesets = tuple(nfa.initial for nfa, _ in self.nfas)
        for cur in itertools.product(*starts):
            paths = tuple((c,) if c != SINK else () for c in cur)
            yield from self._extend(env, cur, paths, statesets, 1)

    def _can_end(self, i: int, node: NodeId, env) -> bool:
        return all(self._resolve(r, env) == node for r in self.tgt_of[i])

    def _extend(self, env, cur, paths, statesets, pos):
        self.nodes_visited += 1
        if self.nodes_visited > self.cfg.max_paths:
            raise EnumerationCapExceededError(
                f"oracle enumeration cap {self.cfg.max_paths} exceeded"
            )
        if all(c == SINK for c in cur):
            # every path has ended and the whole word has been read
            if all(ss & nfa.final for ss, (nfa, _) in
                   zip(statesets, self.nfas)) and self._arith_ok(paths):
                yield env, dict(zip(self.path_vars, paths))
            return
        choices: List[Sequence[NodeId]] = []
        for i, v in enumerate(self.path_vars):
            if cur[i] == SINK:
                choices.append((SINK,))
            elif v in self.bound_paths:
                choices.append((path_index(self.bound_paths[v], pos + 1),))
            else:
                opts: List[NodeId] = []
                if self._can_end(i, cur[i], env):
                    opts.append(SINK)
                if pos < self.cfg.max_path_len:
                    opts.extend(self.reals)
                choices.append(opts)
        for nxt in itertools.product(*choices):
            new_sets = []
            dead = False
            for ss, (nfa, sel) in zip(statesets, self.nfas):
                cur_sel = tuple(cur[c] for c in sel)
                nxt_sel = tuple(nxt[c] for c in sel)
                ss2 = step(self.source, nfa, ss, cur_sel, nxt_sel)
                if not ss2:
                    dead = True
                    break
                new_sets.append(ss2)
            if dead:
                continue
            new_paths = tuple(
                p + (n,) if n != SINK else p for p, n in zip(paths, nxt)
            )
            yield from self._extend(env, nxt, new_paths,
                                    tuple(new_sets), pos + 1)

    def _arith_ok(self, paths) -> bool:
        named = dict(zip(self.path_vars, paths))
        for ac in self.pra.arith_constraints:
            total: ExtInt = 0
            for t in ac.terms:
                value = aggregate(
                    self.source, t.labelling,
                    [named[v] for v in t.path_vars],
                )
                total = ext_add(total, ext_mul(t.coeff, value))
            if not total <= ac.bound:
                return False
        return True


def enumerate_satisfying(source, pra: PraQuery, cfg: OracleConfig,
                         bound_nodes=None, bound_paths=None):
    """Yield (env, paths) for every satisfying assignment within bounds."""
    return _Enumerator(source, pra, cfg, bound_nodes, bound_paths).run()


# -- ontology labellings by direct recursion ------------------------------------

class OracleView:
    """Label source whose ontology labellings evaluate by enumeration."""

    def __init__(self, base: Graph, entries: Sequence[OntologyEntry],
                 cfg: OracleConfig):
        self.base = base
        self.entries = tuple(entries)
        self._by_name = {e.name: e for e in self.entries}
        self.cfg = cfg
        self._memo: Dict[Tuple[str, Tuple[NodeId, ...]], ExtInt] = {}

    @property
    def real_nodes(self):
        return self.base.real_nodes

    def node_id(self, name):
        return self.base.node_id(name)

    def node_name(self, nid):
        return self.base.node_name(nid)

    def has_labelling(self, name):
        return self.base.has_labelling(name) or name in self._by_name

    def arity(self, name):
        if self.base.has_labelling(name):
            return self.base.arity(name)
        if name in self._by_name:
            return len(self._by_name[name].params)
        raise UnknownLabellingError(f"unknown labelling {name!r}")

    def label_value(self, name, key):
        if self.base.has_labelling(name):
            return self.base.label_value(name, key)
        entry = self._by_name.get(name)
        if entry is None:
            raise UnknownLabellingError(f"unknown labelling {name!r}")
        if len(key) != len(entry.params):
            raise ArityMismatchError(
                f"labelling {name!r} has arity {len(entry.params)}, "
                f"got {len(key)} nodes"
            )
        if any(n == SINK for n in key):
            return 0
        memo_key = (name, key)
        if memo_key not in self._memo:
            self._memo[memo_key] = oracle_eval_term(
                self, entry.term, dict(zip(entry.params, key))
            )
        return self._memo[memo_key]


def oracle_eval_term(view, term: Term, eta: Mapping[str, NodeId]) -> ExtInt:
    """Term semantics with nested queries answered by enumeration."""
    from .ontology import eval_fundamental  # pure arithmetic, shared

    if isinstance(term, ConstTerm):
        return term.value
    if isinstance(term, LabelTerm):
        return view.label_value(term.labelling,
                                tuple(eta[a] for a in term.args))
    if isinstance(term, VarEqTerm):
        return 1 if eta[term.left] == eta[term.right] else 0
    if isinstance(term, IndicatorTerm):
        bound = {v: eta[v] for v in term.query.match_nodes}
        cfg = view.cfg if hasattr(view, "cfg") else OracleConfig()
        for _ in enumerate_satisfying(view, term.query, cfg,
                                      bound_nodes=bound):
            return 1
        return 0
    if isinstance(term, (MinPathTerm, MaxPathTerm)):
        bound = {v: eta[v] for v in term.query.match_nodes}
        cfg = view.cfg if hasattr(view, "cfg") else OracleConfig()
        best: Optional[ExtInt] = None
        for _, paths in enumerate_satisfying(view, term.query, cfg,
                                             bound_nodes=bound):
            value = aggregate(view, term.labelling,
                              [paths[term.path_var]])
            if best is None:
                best = value
            elif isinstance(term, MinPathTerm):
                best = min(best, value)
            else:
                best = max(best, value)
        if best is None:
            return POS_INF if isinstance(term, MinPathTerm) else NEG_INF
        return best
    if isinstance(term, ApplyTerm):
        args = [oracle_eval_term(view, a, eta) for a in term.args]
        return eval_fundamental(term.func, args)
    if isinstance(term, AggTerm):
        values = []
        for v in view.real_nodes:
            scope = dict(eta)
            scope[term.collector] = v
            if oracle_eval_term(view, term.filter, scope) == 1:
                values.append(
                    oracle_eval_term(view, term.value, {term.collector: v})
                )
        return eval_fundamental(term.func, values)
    raise TypeError(f"not a term: {term!r}")


# -- public query-level entry points ---------------------------------------------

def _unwrap(q) -> OpraQuery:
    if isinstance(q, ValidatedQuery):
        return q.query
    return q


def oracle_source(g: Graph, q, cfg: OracleConfig) -> OracleView:
    return OracleView(g, _unwrap(q).ontology, cfg)


def enumerate_answers(g: Graph, q, cfg: OracleConfig,
                      bound_nodes=None, bound_paths=None):
    """All assignments to the free variables for which some assignment to
    the existential ones (paths within the length bound) satisfies every
    constraint.  Returns a set of (free-node tuple, free-path tuple)."""
    opra = _unwrap(q)
    view = oracle_source(g, q, cfg)
    pra = opra.query
    answers = set()
    for env, paths in enumerate_satisfying(view, pra, cfg,
                                           bound_nodes, bound_paths):
        nodes = tuple(env[v] for v in pra.match_nodes)
        frees = tuple(paths[v] for v in pra.match_paths)
        answers.add((nodes, frees))
    return answers


def brute_extremum(g: Graph, q, target: Tuple[str, Tuple[str, ...]],
                   mode: str, cfg: OracleConfig,
                   bound_nodes=None) -> ExtInt:
    """Min or max of the target aggregate over all satisfying assignments
    within the length bound; empty set gives +inf (min) / -inf (max)."""
    opra = _unwrap(q)
    view = oracle_source(g, q, cfg)
    name, path_sel = target
    best: Optional[ExtInt] = None
    for _, paths in enumerate_satisfying(view, opra.query, cfg, bound_nodes):
        value = aggregate(view, name, [paths[v] for v in path_sel])
        if best is None:
            best = value
        elif mode == "min":
            best = min(best, value)
        else:
            best = max(best, value)
    if best is None:
        return POS_INF if mode == "min" else NEG_INF
    return best
