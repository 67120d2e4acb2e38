"""High-level evaluation pipeline: graph + query text in, results out.

Ties together validation, the ontology view, the product construction
and the solver, converting between external node names and internal
ids at the boundary.  The solve configuration given here also drives
every nested solver run triggered by on-demand labellings.
"""

from __future__ import annotations

from typing import Dict, Mapping, Optional, Sequence, Set, Tuple

from .answer_graph import AnswerGraph, build
from .graph import Graph
from .ontology import ExtendedGraph, extend
from .parser import parse
from .query import OpraQuery
from .solver import (
    EmptinessResult, ExtremumResult, SolveConfig, check_empty,
    enumerate_answers as _enumerate, extremum as _extremum,
)
from .validate import ValidatedQuery, validate

# memo shared across top-level evaluations when persistent caching is on
_PERSISTENT_MEMO: dict = {}


def prepare(g: Graph, q, cfg: Optional[SolveConfig] = None,
            persist_cache: bool = False) -> Tuple[ExtendedGraph, object]:
    """Validate and wrap: returns the ontology view and the inner query."""
    if isinstance(q, str):
        q = parse(q)
    vq = validate(q, g)
    memo = _PERSISTENT_MEMO if persist_cache else None
    eg = extend(g, vq.query.ontology, solve_config=cfg,
                persistent_cache=persist_cache)
    if memo is not None:
        eg._memo = memo
    return eg, vq.query.query


def _ids_for(g: Graph, bound_nodes, bound_paths):
    nodes = {v: g.node_id(n) for v, n in (bound_nodes or {}).items()}
    paths = {
        v: tuple(g.node_id(n) for n in p)
        for v, p in (bound_paths or {}).items()
    }
    return nodes, paths


def build_answer_graph(g: Graph, q, cfg: Optional[SolveConfig] = None,
                       bound_nodes: Optional[Mapping[str, str]] = None,
                       bound_paths: Optional[Mapping[str, Sequence[str]]] = None,
                       target: Optional[Tuple[str, Tuple[str, ...]]] = None,
                       persist_cache: bool = False) -> AnswerGraph:
    eg, pra = prepare(g, q, cfg, persist_cache)
    nodes, paths = _ids_for(g, bound_nodes, bound_paths)
    return build(eg, pra, bound_paths=paths, bound_nodes=nodes, target=target)


def decode_names(g: Graph, env, paths):
    env_names = {v: g.node_name(n) for v, n in (env or {}).items()}
    path_names = {
        v: [g.node_name(n) for n in p] for v, p in (paths or {}).items()
    }
    return env_names, path_names


def evaluate(g: Graph, q, cfg: Optional[SolveConfig] = None,
             bound_nodes=None, bound_paths=None, on_expand=None,
             persist_cache: bool = False) -> EmptinessResult:
    """Emptiness of the query on the graph; witness decoded to names."""
    ag = build_answer_graph(g, q, cfg, bound_nodes, bound_paths,
                            persist_cache=persist_cache)
    res = check_empty(ag, cfg=cfg, on_expand=on_expand)
    if not res.empty:
        res.env, res.paths = decode_names(g, res.env, res.paths)
    return res


def evaluate_extremum(g: Graph, q, target: str, mode: str,
                      cfg: Optional[SolveConfig] = None,
                      target_paths: Optional[Sequence[str]] = None,
                      bound_nodes=None, bound_paths=None, on_expand=None,
                      persist_cache: bool = False) -> ExtremumResult:
    """Min/max of a labelling aggregated over the query's free path
    variables (or an explicit selection of path variables)."""
    if isinstance(q, str):
        q = parse(q)
    vq = validate(q, g)
    if target_paths is None:
        target_paths = vq.query.query.match_paths
        if not target_paths:
            raise ValueError(
                "the query has no free path variable to aggregate over; "
                "pass target_paths explicitly"
            )
    ag = build_answer_graph(g, vq, cfg, bound_nodes, bound_paths,
                            target=(target, tuple(target_paths)),
                            persist_cache=persist_cache)
    res = _extremum(ag, mode, cfg=cfg, on_expand=on_expand)
    if res.witness is not None:
        res.env, res.witness = decode_names(g, res.env, res.witness)
    return res


def engine_answers(g: Graph, q, max_len: int,
                   cfg: Optional[SolveConfig] = None,
                   track_all: bool = False,
                   persist_cache: bool = False) -> Set[tuple]:
    """Decoded answer set over product paths of at most max_len steps."""
    ag = build_answer_graph(g, q, cfg, persist_cache=persist_cache)
    answers, _ = _enumerate(ag, max_len=max_len, cfg=cfg, track_all=track_all)
    return answers
