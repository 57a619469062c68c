"""Sampling, CPD estimation and empirical marginals.

Random streams come from numpy's counter-based Philox generator. A seed is
expanded with ``SeedSequence`` and child streams are spawned per purpose
(component choice, node values), so each consumer sees an independent,
reproducible stream. Within a stream, uniforms are drawn as one row-major
``(M, n_nodes)`` block: row ``r`` always consumes draws ``r*n .. r*n+n-1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .cbn import CausalNet, Cpt, topological_order
from .errors import EmptySampleSet
from .intervene import TupleSet

DEFAULT_DELTA = 1e-6


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def spawn(seed, n: int) -> list[np.random.SeedSequence]:
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return ss.spawn(n)


@dataclass(frozen=True, eq=False)
class SampleSet:
    columns: tuple[int, ...]
    data: np.ndarray          # shape (M, len(columns)), integer value codes
    source: str = "observational"

    @property
    def M(self) -> int:
        return int(self.data.shape[0])

    def column(self, node: int) -> np.ndarray:
        return self.data[:, self.columns.index(node)]

    def __eq__(self, other):
        return (isinstance(other, SampleSet) and self.columns == other.columns
                and self.source == other.source and np.array_equal(self.data, other.data))


def _cumulative_tables(net: CausalNet) -> dict[int, np.ndarray]:
    out = {}
    for c in net.cpds:
        cum = np.cumsum(np.array(c.table, dtype=float), axis=1)
        cum[:, -1] = 1.0
        out[c.child] = cum
    return out


def _draw(net: CausalNet, M: int, rng: np.random.Generator,
          fixed: Mapping[int, np.ndarray] | None = None) -> np.ndarray:
    """Ancestral sampling; ``fixed[node]`` holds per-row forced values (-1 = free)."""
    ids = net.node_ids
    pos = {n: i for i, n in enumerate(ids)}
    cums = _cumulative_tables(net)
    u = rng.random((M, len(ids)))
    out = np.zeros((M, len(ids)), dtype=np.int64)
    for n in topological_order(net):
        cpd = net.cpd(n)
        code = np.zeros(M, dtype=np.int64)
        for p in cpd.parents:
            code = code * net.card(p) + out[:, pos[p]]
        cum = cums[n][code]
        vals = (u[:, pos[n], None] >= cum).sum(axis=1)
        np.minimum(vals, net.card(n) - 1, out=vals)
        if fixed is not None and n in fixed:
            forced = fixed[n]
            vals = np.where(forced >= 0, forced, vals)
        out[:, pos[n]] = vals
    return out


def ancestral_sample(net: CausalNet, seed, M: int) -> SampleSet:
    rng = make_rng(seed)
    return SampleSet(net.node_ids, _draw(net, M, rng), "observational")


def mixture_sample(net: CausalNet, ts: TupleSet, seed, M: int) -> SampleSet:
    """Pick a component per row with probability equal to its weight, then sample
    the intervened network for that row."""
    comp_ss, value_ss = spawn(seed, 2)
    weights = np.array([float(t.weight) for t in ts])
    weights = weights / weights.sum()
    comp = make_rng(comp_ss).choice(len(weights), size=M, p=weights)
    fixed = {}
    for n in net.node_ids:
        per_comp = np.array([t.target.get(n, -1) for t in ts], dtype=np.int64)
        if (per_comp >= 0).any():
            fixed[n] = per_comp[comp]
    data = _draw(net, M, make_rng(value_ss), fixed)
    return SampleSet(net.node_ids, data, "mixture")


def mle_cpds(samples: SampleSet, skeleton: CausalNet, delta: float = DEFAULT_DELTA) -> CausalNet:
    """Relative-frequency CPDs; any row with a zero gets +delta everywhere and is
    renormalized, so the result is strictly positive."""
    if samples.M == 0:
        raise EmptySampleSet("no samples to estimate from")
    if not delta > 0:
        raise ValueError("delta must be positive")
    cpds = []
    for n in skeleton.node_ids:
        parents = skeleton.parents(n)
        k = skeleton.card(n)
        rows = 1
        code = np.zeros(samples.M, dtype=np.int64)
        for p in parents:
            code = code * skeleton.card(p) + samples.column(p)
            rows *= skeleton.card(p)
        counts = np.bincount(code * k + samples.column(n), minlength=rows * k)
        counts = counts.reshape(rows, k).astype(float)
        tot = counts.sum(axis=1, keepdims=True)
        freq = np.divide(counts, tot, out=np.zeros_like(counts), where=tot > 0)
        zero = (freq == 0).any(axis=1)
        freq[zero] += delta
        freq /= freq.sum(axis=1, keepdims=True)
        cpds.append(Cpt(n, parents, freq.tolist()))
    return skeleton.with_cpds(cpds, positive=True)


def empirical_marginal(samples: SampleSet, partial: Mapping[int, int]) -> float:
    if samples.M == 0:
        raise EmptySampleSet("no samples")
    mask = np.ones(samples.M, dtype=bool)
    for n, v in partial.items():
        mask &= samples.column(n) == v
    return int(mask.sum()) / samples.M


class FrequencyOracle:
    """Relative frequencies of partial assignments in a sample set.

    Counts for each queried node set are computed once with ``np.unique`` on
    mixed-radix row codes and cached.
    """

    backing = "empirical-frequency"

    def __init__(self, samples: SampleSet, cards: Mapping[int, int] | None = None):
        if samples.M == 0:
            raise EmptySampleSet("no samples")
        self.samples = samples
        if cards is None:
            cards = {n: int(samples.column(n).max()) + 1 for n in samples.columns}
        self.cards = dict(cards)
        self._cache: dict[tuple, dict] = {}

    def _counts(self, nodes: Sequence[int]) -> dict[int, int]:
        key = tuple(nodes)
        if key not in self._cache:
            code = np.zeros(self.samples.M, dtype=np.int64)
            for n in key:
                code = code * self.cards[n] + self.samples.column(n)
            vals, cnt = np.unique(code, return_counts=True)
            self._cache[key] = dict(zip(vals.tolist(), cnt.tolist()))
        return self._cache[key]

    def prob(self, v: Mapping[int, int]) -> float:
        nodes = tuple(sorted(v))
        code = 0
        for n in nodes:
            if v[n] >= self.cards[n]:
                return 0.0
            code = code * self.cards[n] + v[n]
        return self._counts(nodes).get(code, 0) / self.samples.M
