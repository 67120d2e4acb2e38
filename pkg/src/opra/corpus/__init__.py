"""Bundled example corpus: the map fixture plus its query suite.

The fixture graph and queries ship as package data; golden outputs were
generated once by the brute-force oracle (see generate_goldens) and are
committed.  The `run` entry point re-evaluates everything with the
product engine and diffs against the goldens, so a corpus run is a
standing engine-versus-oracle differential check.
"""

from __future__ import annotations

import json
from importlib import resources
from typing import Dict, List, Optional, Tuple

from ..engine import engine_answers, evaluate_extremum
from ..extint import to_json
from ..graph import Graph, graph_from_dict
from ..ontology import extend
from ..oracle import OracleConfig, brute_extremum, enumerate_answers
from ..parser import parse
from ..solver import SolveConfig
from ..validate import validate

QUERY_NAMES = (
    "q_route", "q_route_sp", "sums", "multiple_paths",
    "processed_labellings", "t_walk_via_walk", "nested_queries",
    "neighbourhood", "path_lengths", "registers",
)

# (query, product-path length bound for answer enumeration)
ANSWER_PLANS: Tuple[Tuple[str, int], ...] = (
    ("q_route", 4),
    ("q_route_sp", 6),
    ("sums", 8),
    ("multiple_paths", 6),
    ("processed_labellings", 6),
    ("t_walk_via_walk", 8),
    ("nested_queries", 4),
    ("neighbourhood", 6),
    ("path_lengths", 6),
    ("registers", 6),
)

EXTREMUM_PLANS = (
    ("min_time_route_sp", "q_route_sp", "time", "min"),
    ("max_attr_route_sp", "q_route_sp", "attr", "max"),
)

CORPUS_CONFIG = SolveConfig(b1=8, b2=16)
ORACLE_TWO_PHASE = (8, 16)


def _read(name: str) -> str:
    return resources.files(__package__).joinpath(name).read_text("utf-8")


def fixture_graph() -> Graph:
    return graph_from_dict(json.loads(_read("fig2.json")))


def query_text(name: str) -> str:
    return _read(name + ".opra")


def load_query(name: str, g: Optional[Graph] = None):
    q = parse(query_text(name))
    return validate(q, g if g is not None else fixture_graph())


def _canonical_answers(g: Graph, vq, answers) -> List[dict]:
    pra = vq.query.query
    out = []
    for nodes, paths in answers:
        out.append({
            "nodes": {
                v: g.node_name(n) for v, n in zip(pra.match_nodes, nodes)
            },
            "paths": {
                v: [g.node_name(n) for n in p]
                for v, p in zip(pra.match_paths, paths)
            },
        })
    out.sort(key=lambda e: json.dumps(e, sort_keys=True))
    return out


def _engine_report(g: Graph, persist_cache: bool = False) -> dict:
    report: Dict[str, dict] = {"answers": {}, "extrema": {}, "terms": {}}
    for name, bound in ANSWER_PLANS:
        vq = load_query(name, g)
        answers = engine_answers(g, vq, max_len=bound, cfg=CORPUS_CONFIG,
                                 persist_cache=persist_cache)
        report["answers"][name] = {
            "bound": bound,
            "answers": _canonical_answers(g, vq, answers),
        }
    for key, qname, target, mode in EXTREMUM_PLANS:
        vq = load_query(qname, g)
        res = evaluate_extremum(g, vq, target=target, mode=mode,
                                cfg=CORPUS_CONFIG)
        report["extrema"][key] = {
            "query": qname, "target": target, "mode": mode,
            "value": to_json(res.value),
        }
    report["terms"] = _engine_term_checks(g)
    return report


def _engine_term_checks(g: Graph) -> dict:
    out: Dict[str, object] = {}
    vq = load_query("processed_labellings", g)
    eg = extend(g, vq.query.ontology, solve_config=CORPUS_CONFIG)
    out["t_walk_W"] = to_json(eg.label_value("t_walk", (g.node_id("W"),)))
    vq = load_query("neighbourhood", g)
    eg = extend(g, vq.query.ontology, solve_config=CORPUS_CONFIG)
    out["mas_S_T"] = to_json(
        eg.label_value("mas", (g.node_id("S"), g.node_id("T"))))
    out["mas_S_W"] = to_json(
        eg.label_value("mas", (g.node_id("S"), g.node_id("W"))))
    vq = load_query("nested_queries", g)
    eg = extend(g, vq.query.ontology, solve_config=CORPUS_CONFIG)
    out["crowded"] = {
        g.node_name(v): to_json(eg.label_value("crowded", (v,)))
        for v in g.real_nodes
    }
    return out


def load_goldens() -> dict:
    return json.loads(_read("goldens.json"))


def run(persist_cache: bool = False) -> Tuple[dict, List[str]]:
    """Evaluate the whole suite and diff against the committed goldens.

    Returns the engine report and the list of mismatched item names.
    """
    g = fixture_graph()
    report = _engine_report(g, persist_cache=persist_cache)
    goldens = load_goldens()
    failures = []
    for section in ("answers", "extrema", "terms"):
        for key, expected in goldens.get(section, {}).items():
            got = report.get(section, {}).get(key)
            if got != expected:
                failures.append(f"{section}.{key}")
    return report, failures


# -- golden generation (oracle side; run once, output committed) ---------------

def generate_goldens() -> dict:
    """Compute the goldens with the brute-force oracle.

    Finite values come straight from bounded enumeration.  Extrema use
    the two-phase protocol (better value in the longer phase means the
    true extremum is unbounded); the simultaneous-extrema query is
    evaluated by substituting per-endpoint oracle extrema, which on this
    fixture are unbounded for every connected pair, so no finite route
    can match them and its answer set is empty.
    """
    g = fixture_graph()
    ocfg = lambda n: OracleConfig(max_path_len=n, max_paths=5_000_000)
    goldens: Dict[str, dict] = {"answers": {}, "extrema": {}, "terms": {}}

    for name, bound in ANSWER_PLANS:
        vq = load_query(name, g)
        if name == "path_lengths":
            answers = _oracle_path_lengths_answers(g, vq, bound)
        else:
            answers = enumerate_answers(g, vq, ocfg(bound))
        goldens["answers"][name] = {
            "bound": bound,
            "answers": _canonical_answers(g, vq, answers),
        }

    b1, b2 = ORACLE_TWO_PHASE
    for key, qname, target, mode in EXTREMUM_PLANS:
        vq = load_query(qname, g)
        pra = vq.query.query
        sel = pra.match_paths
        short = brute_extremum(g, vq, (target, sel), mode, ocfg(b1))
        long_ = brute_extremum(g, vq, (target, sel), mode, ocfg(b2))
        if mode == "min":
            value = float("-inf") if long_ < short else short
        else:
            value = float("inf") if long_ > short else short
        goldens["extrema"][key] = {
            "query": qname, "target": target, "mode": mode,
            "value": to_json(value),
        }

    goldens["terms"] = _oracle_term_checks(g)
    return goldens


def _oracle_path_lengths_answers(g: Graph, vq, bound: int):
    """Answer set of the simultaneous-extrema query via the oracle.

    For each endpoint pair, take the oracle's two-phase max/min of the
    competing-route aggregates; a pair admits an answer only if some
    route attains both, which an unbounded maximum rules out.
    """
    from ..oracle import enumerate_satisfying, oracle_source
    from ..graph import aggregate

    route_vq = load_query("q_route", g)
    b1, b2 = ORACLE_TWO_PHASE
    answers = set()
    view = oracle_source(g, route_vq, OracleConfig(max_path_len=b2))
    for s in g.real_nodes:
        for t in g.real_nodes:
            bound_nodes = {"s": s, "t": t}
            extrema = {}
            for target, mode in (("attr", "max"), ("time", "min")):
                short = brute_extremum(
                    g, route_vq, (target, ("pi",)), mode,
                    OracleConfig(max_path_len=b1), bound_nodes=bound_nodes)
                long_ = brute_extremum(
                    g, route_vq, (target, ("pi",)), mode,
                    OracleConfig(max_path_len=b2), bound_nodes=bound_nodes)
                if mode == "max":
                    extrema[target] = float("inf") if long_ > short else short
                else:
                    extrema[target] = float("-inf") if long_ < short else short
            for _, paths in enumerate_satisfying(
                    view, route_vq.query.query,
                    OracleConfig(max_path_len=bound),
                    bound_nodes=bound_nodes):
                pi = paths["pi"]
                if aggregate(g, "attr", [pi]) == extrema["attr"] \
                        and aggregate(g, "time", [pi]) == extrema["time"]:
                    answers.add(((s, t), ()))
                    break
    return answers


def _oracle_term_checks(g: Graph) -> dict:
    from ..oracle import OracleView

    ocfg = OracleConfig(max_path_len=8, max_paths=5_000_000)
    out: Dict[str, object] = {}
    vq = load_query("processed_labellings", g)
    view = OracleView(g, vq.query.ontology, ocfg)
    out["t_walk_W"] = to_json(view.label_value("t_walk", (g.node_id("W"),)))
    vq = load_query("neighbourhood", g)
    view = OracleView(g, vq.query.ontology, ocfg)
    out["mas_S_T"] = to_json(
        view.label_value("mas", (g.node_id("S"), g.node_id("T"))))
    out["mas_S_W"] = to_json(
        view.label_value("mas", (g.node_id("S"), g.node_id("W"))))
    vq = load_query("nested_queries", g)
    view = OracleView(g, vq.query.ontology, ocfg)
    out["crowded"] = {
        g.node_name(v): to_json(view.label_value("crowded", (v,)))
        for v in g.real_nodes
    }
    return out
