"""Labelled-graph data model.

A graph is a finite node set plus named labelling functions from node
tuples to extended integers.  Node names are interned to dense ints;
index 0 is the distinguished sink node used to pad paths past their end,
so every path has a total (1-based) index.  Labellings are stored
sparsely with an explicit default, which makes lookup total; tuples that
mention the sink are never stored and therefore evaluate to the default.

Graphs and labellings are immutable after load and safe to share across
concurrent evaluations.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Sequence, Tuple

from .errors import (
    ArityMismatchError,
    DuplicateEntryError,
    GraphLoadError,
    NameCollisionError,
    UnknownLabellingError,
    UnknownNodeError,
)
from .extint import ExtInt, ext_add, from_json, is_finite, to_json

logger = logging.getLogger(__name__)

SINK = 0
SINK_NAME = "<sink>"

NodeId = int
Path = Tuple[NodeId, ...]


@dataclass(frozen=True)
class Labelling:
    """A total function from node tuples of fixed arity to extended ints."""

    name: str
    arity: int
    default: ExtInt = 0
    entries: Mapping[Tuple[NodeId, ...], ExtInt] = field(default_factory=dict)

    def value(self, key: Tuple[NodeId, ...]) -> ExtInt:
        return self.entries.get(key, self.default)

    def finite_bound(self) -> int:
        """Largest absolute finite value this labelling can take."""
        bound = abs(self.default) if is_finite(self.default) else 0
        for v in self.entries.values():
            if is_finite(v) and abs(v) > bound:
                bound = abs(v)
        return bound


class Graph:
    """Immutable labelled graph with interned node ids (0 is the sink)."""

    def __init__(self, node_names: Sequence[str], labellings: Iterable[Labelling]):
        names = [SINK_NAME]
        seen = {SINK_NAME}
        for n in node_names:
            if n in seen:
                raise NameCollisionError(f"duplicate node name {n!r}")
            seen.add(n)
            names.append(n)
        self.node_names: Tuple[str, ...] = tuple(names)
        self._index: Dict[str, int] = {n: i for i, n in enumerate(self.node_names)}
        self.labellings: Dict[str, Labelling] = {}
        for lab in labellings:
            if lab.name in self.labellings:
                raise NameCollisionError(f"duplicate labelling name {lab.name!r}")
            self.labellings[lab.name] = lab

    # -- nodes ----------------------------------------------------------

    @property
    def real_nodes(self) -> range:
        """Ids of all nodes except the sink."""
        return range(1, len(self.node_names))

    def node_id(self, name: str) -> NodeId:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownNodeError(f"unknown node {name!r}") from None

    def node_name(self, nid: NodeId) -> str:
        return self.node_names[nid]

    # -- labellings -----------------------------------------------------

    def has_labelling(self, name: str) -> bool:
        return name in self.labellings

    def arity(self, name: str) -> int:
        lab = self.labellings.get(name)
        if lab is None:
            raise UnknownLabellingError(f"unknown labelling {name!r}")
        return lab.arity

    def label_value(self, name: str, key: Tuple[NodeId, ...]) -> ExtInt:
        lab = self.labellings.get(name)
        if lab is None:
            raise UnknownLabellingError(f"unknown labelling {name!r}")
        if len(key) != lab.arity:
            raise ArityMismatchError(
                f"labelling {name!r} has arity {lab.arity}, got {len(key)} nodes"
            )
        return lab.value(key)


def path_index(path: Sequence[NodeId], i: int) -> NodeId:
    """1-based indexing with sink padding past the end of the path."""
    if i < 1:
        raise ValueError("path positions are 1-based")
    return path[i - 1] if i <= len(path) else SINK


def aggregate(source, name: str, paths: Sequence[Sequence[NodeId]]) -> ExtInt:
    """Sum a labelling positionwise along a tuple of paths.

    Position i contributes the labelling applied to (p_1[i], ..., p_k[i]);
    the sum runs to the longest path's length, so shorter paths contribute
    sink-padded tuples.  All paths empty gives the empty sum, 0.

    `source` is anything with arity()/label_value(), i.e. a Graph or an
    ontology-extended view of one.
    """
    if source.arity(name) != len(paths):
        raise ArityMismatchError(
            f"labelling {name!r} has arity {source.arity(name)}, "
            f"got {len(paths)} paths"
        )
    s = max((len(p) for p in paths), default=0)
    total: ExtInt = 0
    for i in range(1, s + 1):
        key = tuple(path_index(p, i) for p in paths)
        total = ext_add(total, source.label_value(name, key))
    return total


# -- JSON format --------------------------------------------------------------
#
# {"nodes": ["S", "T", ...],                      sink implicit, never listed
#  "labellings": {"time": {"arity": 1,
#                          "default": 0,          optional, int | "+inf" | "-inf"
#                          "entries": [["S", 10], ...]}}}
#
# Each entry is exactly `arity` node names followed by one value.  Duplicate
# tuples are a load error.

def graph_from_dict(data: dict, weight_cap: int | None = None) -> Graph:
    if not isinstance(data, dict) or "nodes" not in data:
        raise GraphLoadError("graph file must be an object with a 'nodes' array")
    names = data["nodes"]
    if not isinstance(names, list) or not all(isinstance(n, str) for n in names):
        raise GraphLoadError("'nodes' must be an array of strings")
    if SINK_NAME in names:
        raise NameCollisionError(f"node name {SINK_NAME!r} is reserved for the sink")
    index = {n: i + 1 for i, n in enumerate(names)}
    if len(index) != len(names):
        raise NameCollisionError("duplicate node name in 'nodes'")

    labellings = []
    for lname, spec in (data.get("labellings") or {}).items():
        arity = spec.get("arity")
        if not isinstance(arity, int) or arity < 1:
            raise GraphLoadError(f"labelling {lname!r}: arity must be a positive int")
        default = from_json(spec.get("default", 0))
        entries: Dict[Tuple[int, ...], ExtInt] = {}
        for row in spec.get("entries", []):
            if len(row) != arity + 1:
                raise GraphLoadError(
                    f"labelling {lname!r}: entry needs {arity} nodes and one value"
                )
            try:
                key = tuple(index[n] for n in row[:arity])
            except KeyError as e:
                raise UnknownNodeError(
                    f"labelling {lname!r}: unknown node {e.args[0]!r}"
                ) from None
            if key in entries:
                raise DuplicateEntryError(
                    f"labelling {lname!r}: duplicate entry for {row[:arity]}"
                )
            entries[key] = from_json(row[arity])
        labellings.append(Labelling(lname, arity, default, entries))

    g = Graph(names, labellings)
    cap = weight_cap if weight_cap is not None else 10 * len(g.node_names)
    for lab in g.labellings.values():
        if lab.finite_bound() > cap:
            logger.warning(
                "labelling %r has magnitude %d above the cap %d; "
                "solver bounds assume labels polynomial in graph size",
                lab.name, lab.finite_bound(), cap,
            )
    return g


def graph_to_dict(g: Graph) -> dict:
    labellings = {}
    for lab in g.labellings.values():
        entries = [
            [*(g.node_name(n) for n in key), to_json(v)]
            for key, v in sorted(lab.entries.items())
        ]
        labellings[lab.name] = {
            "arity": lab.arity,
            "default": to_json(lab.default),
            "entries": entries,
        }
    return {"nodes": list(g.node_names[1:]), "labellings": labellings}


def load_graph(path: str, weight_cap: int | None = None) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return graph_from_dict(json.load(fh), weight_cap=weight_cap)
