"""Discrete causal Bayesian networks with tabular CPDs.

Probabilities are stored either as Python floats or as ``fractions.Fraction``.
All arithmetic in this package is written generically so the same code runs in
exact rational mode (used by the oracle recovery path) and in floating point
(used with sampled data).
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence, Union

from .errors import (CycleDetected, IncompleteAssignment, InvalidNetwork, NotASink,
                     PositivityViolated, UnnormalizedCpt)

Prob = Union[float, Fraction]

#: rows within this distance of 1 are silently renormalized in float mode
FLOAT_NORM_TOL = 1e-12
#: per-entry rounding slack below which a row is left untouched
ROUNDING_TOL = 4 * 2.0 ** -52


@dataclass(frozen=True)
class Node:
    id: int
    card: int
    label: str | None = None

    def __post_init__(self):
        if self.card < 2:
            raise InvalidNetwork(f"node {self.id}: cardinality must be >= 2, got {self.card}")


@dataclass(frozen=True)
class Cpt:
    """P(child | parents) as rows indexed by mixed-radix parent code.

    The first parent is the most significant digit, so for parents (A, B) with
    cardinalities (2, 3) row ``a * 3 + b`` holds P(child | A=a, B=b).
    """

    child: int
    parents: tuple[int, ...]
    table: tuple[tuple[Prob, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "parents", tuple(self.parents))
        object.__setattr__(self, "table", tuple(tuple(row) for row in self.table))

    @property
    def is_exact(self) -> bool:
        return all(isinstance(p, (Fraction, int)) for row in self.table for p in row)


@dataclass(frozen=True)
class ValidationReport:
    n_nodes: int
    n_edges: int
    positive: bool
    exact: bool


@dataclass(frozen=True, eq=False)
class CausalNet:
    """DAG plus one CPT per node. Immutable; node ids are arbitrary ints."""

    nodes: tuple[Node, ...]
    edges: tuple[tuple[int, int], ...]
    cpds: tuple[Cpt, ...]
    positive: bool = True
    _card: dict = field(init=False, repr=False)
    _cpd: dict = field(init=False, repr=False)
    _radix: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(sorted(tuple(e) for e in self.edges)))
        object.__setattr__(self, "cpds", tuple(self.cpds))
        card = {n.id: n.card for n in self.nodes}
        if len(card) != len(self.nodes):
            raise InvalidNetwork("duplicate node ids")
        cpd = {c.child: c for c in self.cpds}
        if set(cpd) != set(card) or len(cpd) != len(self.cpds):
            raise InvalidNetwork("need exactly one CPT per node")
        radix = {}
        for c in self.cpds:
            mult = []
            m = 1
            for p in reversed(c.parents):
                if p not in card:
                    raise InvalidNetwork(f"node {c.child}: unknown parent {p}")
                mult.append(m)
                m *= card[p]
            radix[c.child] = tuple(reversed(mult))
            if len(c.table) != m or any(len(r) != card[c.child] for r in c.table):
                raise InvalidNetwork(f"node {c.child}: CPT shape does not match parents")
        object.__setattr__(self, "_card", card)
        object.__setattr__(self, "_cpd", cpd)
        object.__setattr__(self, "_radix", radix)

    def __eq__(self, other):
        if not isinstance(other, CausalNet):
            return NotImplemented
        return (self.nodes == other.nodes and self.edges == other.edges
                and sorted(self.cpds, key=lambda c: c.child) == sorted(other.cpds, key=lambda c: c.child)
                and self.positive == other.positive)

    def __hash__(self):
        return hash((self.nodes, self.edges))

    @property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(n.id for n in self.nodes)

    def card(self, node: int) -> int:
        return self._card[node]

    def cpd(self, node: int) -> Cpt:
        return self._cpd[node]

    def parents(self, node: int) -> tuple[int, ...]:
        return self._cpd[node].parents

    def children(self, node: int) -> tuple[int, ...]:
        return tuple(sorted(c for p, c in self.edges if p == node))

    def parent_code(self, node: int, v: Mapping[int, int]) -> int:
        return sum(m * v[p] for p, m in zip(self._cpd[node].parents, self._radix[node]))

    def cond_prob(self, node: int, v: Mapping[int, int]) -> Prob:
        """P(v[node] | parents as assigned in v)."""
        return self._cpd[node].table[self.parent_code(node, v)][v[node]]

    @property
    def is_exact(self) -> bool:
        return all(c.is_exact for c in self.cpds)

    def to_exact(self, max_denominator: int | None = None) -> "CausalNet":
        """Copy with Fraction entries, each row renormalized to sum exactly to 1."""
        def conv(x):
            f = Fraction(x) if not isinstance(x, float) else Fraction(repr(x))
            return f.limit_denominator(max_denominator) if max_denominator else f

        cpds = []
        for c in self.cpds:
            rows = []
            for row in c.table:
                fr = [conv(x) for x in row]
                s = sum(fr)
                rows.append(tuple(x / s for x in fr))
            cpds.append(Cpt(c.child, c.parents, rows))
        return CausalNet(self.nodes, self.edges, cpds, self.positive)

    def to_float(self) -> "CausalNet":
        cpds = [Cpt(c.child, c.parents, [[float(x) for x in row] for row in c.table])
                for c in self.cpds]
        return CausalNet(self.nodes, self.edges, cpds, self.positive)

    def with_cpds(self, cpds: Sequence[Cpt], positive: bool | None = None) -> "CausalNet":
        return CausalNet(self.nodes, self.edges, cpds,
                         self.positive if positive is None else positive)

    def assignments(self, nodes: Sequence[int] | None = None) -> Iterable[dict[int, int]]:
        """Every assignment over ``nodes`` (default: all nodes)."""
        nodes = self.node_ids if nodes is None else tuple(nodes)
        for vals in itertools.product(*(range(self._card[n]) for n in nodes)):
            yield dict(zip(nodes, vals))


def make_net(cards: Sequence[int], parents: Mapping[int, Sequence[int]],
             tables: Mapping[int, Sequence[Sequence[Prob]]], positive: bool = True,
             labels: Sequence[str] | None = None) -> CausalNet:
    """Convenience constructor for nets with ids ``0..len(cards)-1``."""
    nodes = [Node(i, k, labels[i] if labels else None) for i, k in enumerate(cards)]
    edges = [(p, c) for c in range(len(cards)) for p in parents.get(c, ())]
    cpds = [Cpt(i, tuple(parents.get(i, ())), tables[i]) for i in range(len(cards))]
    return CausalNet(nodes, edges, cpds, positive)


def normalize_table(node: int, table: Sequence[Sequence[Prob]]) -> list[list[Prob]]:
    """Check row sums; renormalize float rows within FLOAT_NORM_TOL, reject the rest."""
    out = []
    for code, row in enumerate(table):
        s = sum(row)
        exact = all(isinstance(x, (Fraction, int)) for x in row)
        if exact:
            if s != 1:
                raise UnnormalizedCpt(node, code, s)
            out.append(list(row))
        else:
            if abs(s - 1.0) > FLOAT_NORM_TOL:
                raise UnnormalizedCpt(node, code, s)
            if abs(s - 1.0) <= ROUNDING_TOL * len(row):
                out.append([float(x) for x in row])
            else:
                out.append([float(x) / s for x in row])
    return out


def topological_order(net: CausalNet) -> list[int]:
    """Kahn's algorithm, always releasing the smallest ready node id first."""
    indeg = {n: 0 for n in net.node_ids}
    kids: dict[int, list[int]] = {n: [] for n in net.node_ids}
    for p, c in net.edges:
        indeg[c] += 1
        kids[p].append(c)
    ready = [n for n, d in indeg.items() if d == 0]
    heapq.heapify(ready)
    order = []
    while ready:
        n = heapq.heappop(ready)
        order.append(n)
        for c in kids[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(ready, c)
    if len(order) != len(indeg):
        raise CycleDetected(f"cycle among nodes {sorted(set(indeg) - set(order))}")
    return order


def validate(net: CausalNet) -> ValidationReport:
    """Raise on the first structural or numerical defect; return a summary otherwise."""
    topological_order(net)
    graph_parents: dict[int, set] = {n: set() for n in net.node_ids}
    for p, c in net.edges:
        if p not in graph_parents or c not in graph_parents:
            raise InvalidNetwork(f"edge {(p, c)} references an unknown node")
        graph_parents[c].add(p)
    for c in net.cpds:
        if set(c.parents) != graph_parents[c.child] or len(set(c.parents)) != len(c.parents):
            raise InvalidNetwork(f"node {c.child}: CPT parents {c.parents} differ from graph")
        for code, row in enumerate(c.table):
            s = sum(row)
            if c.is_exact:
                if s != 1:
                    raise UnnormalizedCpt(c.child, code, s)
            elif abs(s - 1.0) > FLOAT_NORM_TOL:
                raise UnnormalizedCpt(c.child, code, s)
            for value, p in enumerate(row):
                if p < 0 or (net.positive and p <= 0):
                    raise PositivityViolated(c.child, code, value)
    return ValidationReport(len(net.nodes), len(net.edges), net.positive, net.is_exact)


def _check_total(net: CausalNet, v: Mapping[int, int]):
    ids = net.node_ids
    if len(v) != len(ids) or any(n not in v for n in ids):
        raise IncompleteAssignment(f"assignment must cover nodes {ids}")
    for n in ids:
        if not 0 <= v[n] < net.card(n):
            raise IncompleteAssignment(f"value {v[n]} out of range for node {n}")


def joint_prob(net: CausalNet, v: Mapping[int, int]) -> Prob:
    _check_total(net, v)
    p = 1
    for n in net.node_ids:
        p *= net.cond_prob(n, v)
        if p == 0:
            return p
    return p


def delete_last(net: CausalNet, order: Sequence[int] | None = None) -> CausalNet:
    """Drop the last node of ``order``; it must have no children."""
    order = topological_order(net) if order is None else list(order)
    last = order[-1]
    if net.children(last):
        raise NotASink(f"node {last} has children {net.children(last)}")
    nodes = [n for n in net.nodes if n.id != last]
    edges = [e for e in net.edges if e[1] != last]
    cpds = [c for c in net.cpds if c.child != last]
    return CausalNet(nodes, edges, cpds, net.positive)
