"""JSON and CSV formats for networks, tuple sets, samples and mixture tables.

Probabilities are written as JSON numbers for floats and as ``"p/q"`` strings
for exact rationals; loaders accept either.
"""
from __future__ import annotations

import csv
import json
from fractions import Fraction
from pathlib import Path

import numpy as np

from .cbn import CausalNet, Cpt, Node, normalize_table
from .estimate import SampleSet
from .intervene import Target, TupleSet


def encode_prob(p):
    if isinstance(p, Fraction):
        return str(p) if p.denominator != 1 else int(p)
    return p


def decode_prob(x):
    if isinstance(x, str):
        return Fraction(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    return float(x)


def net_to_dict(net: CausalNet) -> dict:
    nodes = []
    for n in net.nodes:
        d = {"id": n.id, "card": n.card}
        if n.label is not None:
            d["label"] = n.label
        nodes.append(d)
    return {
        "nodes": nodes,
        "edges": [list(e) for e in net.edges],
        "cpds": [{"child": c.child, "parents": list(c.parents),
                  "table": [[encode_prob(p) for p in row] for row in c.table]}
                 for c in sorted(net.cpds, key=lambda c: c.child)],
        "positive": net.positive,
    }


def net_from_dict(d: dict) -> CausalNet:
    nodes = [Node(int(n["id"]), int(n["card"]), n.get("label")) for n in d["nodes"]]
    cpds = []
    for c in d["cpds"]:
        table = [[decode_prob(p) for p in row] for row in c["table"]]
        cpds.append(Cpt(int(c["child"]), tuple(int(p) for p in c["parents"]),
                        normalize_table(int(c["child"]), table)))
    edges = [(int(a), int(b)) for a, b in d.get("edges", [])]
    return CausalNet(nodes, edges, cpds, bool(d.get("positive", True)))


def tupleset_to_dict(ts: TupleSet) -> dict:
    out = []
    for t in ts:
        d = {"target": {str(n): v for n, v in t.target}, "weight": float(t.weight)}
        if isinstance(t.weight, Fraction):
            d["weight_exact"] = str(t.weight)
        out.append(d)
    return {"tuples": out}


def tupleset_from_dict(d: dict) -> TupleSet:
    pairs = []
    for t in d["tuples"]:
        w = decode_prob(t["weight_exact"]) if "weight_exact" in t else decode_prob(t["weight"])
        pairs.append((Target(tuple((int(n), int(v)) for n, v in t["target"].items())), w))
    return TupleSet(pairs)


def dump_json(obj: dict, path) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=False) + "\n")


def load_json(path) -> dict:
    return json.loads(Path(path).read_text())


def save_net(net: CausalNet, path) -> None:
    dump_json(net_to_dict(net), path)


def load_net(path) -> CausalNet:
    return net_from_dict(load_json(path))


def save_tupleset(ts: TupleSet, path) -> None:
    dump_json(tupleset_to_dict(ts), path)


def load_tupleset(path) -> TupleSet:
    return tupleset_from_dict(load_json(path))


def save_samples(samples: SampleSet, path, labels: dict | None = None) -> None:
    """Headerful CSV, one column per node. Header cells are node ids."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([str(c) for c in samples.columns])
        w.writerows(samples.data.tolist())


def load_samples(path, source: str = "observational") -> SampleSet:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        rows = [[int(x) for x in row] for row in r if row]
    cols = tuple(int(h) for h in header)
    data = np.array(rows, dtype=np.int64).reshape(len(rows), len(cols))
    return SampleSet(cols, data, source)


def mixture_table_to_dict(columns, table: dict) -> dict:
    return {"columns": list(columns),
            "rows": [list(k) + [encode_prob(p)] for k, p in table.items()]}


def mixture_table_from_dict(d: dict):
    cols = tuple(int(c) for c in d["columns"])
    table = {tuple(int(x) for x in row[:-1]): decode_prob(row[-1]) for row in d["rows"]}
    return cols, table
