"""Random benchmark instances and recovery metrics.

Instances follow the simulation protocol: a random DAG with between N and 5N
edges, Dirichlet(alpha) CPD rows, 4..16 intervention targets whose values avoid
one reserved value per node, and Dirichlet(2) mixing weights.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, asdict
from fractions import Fraction

import numpy as np

from .cbn import CausalNet, Cpt, Node
from .intervene import Target, TupleSet

MODELS = ("sf", "er")


@dataclass(frozen=True)
class InstanceConfig:
    N: int
    M: int = 2 ** 10
    model: str = "sf"
    k: int = 3
    cpd_alpha: float = 2.0
    m_range: tuple[int, int] = (4, 16)
    weight_alpha: float = 2.0
    seed: int = 0
    epsilon: float = 0.01
    delta: float = 1e-6

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be >= 1")
        if self.model not in MODELS:
            raise ValueError(f"unknown graph model {self.model!r}")
        if self.k < 2 or self.cpd_alpha <= 0 or self.weight_alpha <= 0:
            raise ValueError("need k >= 2 and positive Dirichlet parameters")


@dataclass(frozen=True)
class MetricsRecord:
    recall: float
    rmse: float
    fp_rmse: float
    fn_rmse: float
    instance: int = 0
    N: int = 0
    M: int = 0


def _rng(seed) -> np.random.Generator:
    from .estimate import make_rng
    return make_rng(seed)


def edge_bounds(N: int) -> tuple[int, int]:
    cap = N * (N - 1) // 2
    hi = min(5 * N, cap)
    return min(N, hi), hi


def _edge_count(N: int, rng) -> int:
    lo, hi = edge_bounds(N)
    return int(rng.integers(lo, hi + 1))


def _preferential_attachment(N: int, per_node: int, rng) -> set[tuple[int, int]]:
    """Edges (i, j) with i < j in position space; new nodes attach preferentially."""
    edges = set()
    degree = np.zeros(N)
    for j in range(1, N):
        n_att = min(per_node, j)
        w = degree[:j] + 1.0
        chosen = rng.choice(j, size=n_att, replace=False, p=w / w.sum())
        for i in chosen:
            edges.add((int(i), j))
            degree[i] += 1
            degree[j] += 1
    return edges


def _skeleton(N: int, k: int, pos_edges, perm) -> CausalNet:
    # perm[position] = node id; orient low position -> high position
    edges = sorted((int(perm[i]), int(perm[j])) for i, j in pos_edges)
    parents = {n: sorted(p for p, c in edges if c == n) for n in range(N)}
    nodes = [Node(n, k) for n in range(N)]
    cpds = []
    for n in range(N):
        rows = k ** len(parents[n])
        cpds.append(Cpt(n, tuple(parents[n]), [[1.0 / k] * k for _ in range(rows)]))
    return CausalNet(nodes, edges, cpds, True)


def random_dag(cfg: InstanceConfig, seed=None) -> CausalNet:
    """Random DAG skeleton with uniform placeholder CPDs.

    Scale-free: preferential attachment over a random node ordering, then
    uniform random edge additions/removals to reach the drawn edge count.
    Erdos-Renyi: the drawn number of pairs chosen uniformly among the
    upper-triangular slots of a random ordering.
    """
    rng = _rng(cfg.seed if seed is None else seed)
    N = cfg.N
    E = _edge_count(N, rng)
    perm = rng.permutation(N)
    slots = [(i, j) for i in range(N) for j in range(i + 1, N)]
    if cfg.model == "er":
        idx = rng.choice(len(slots), size=E, replace=False) if E else []
        pos_edges = {slots[i] for i in idx}
    else:
        pos_edges = _preferential_attachment(N, max(1, math.ceil(E / N)), rng) if N > 1 else set()
        while len(pos_edges) > E:
            cur = sorted(pos_edges)
            pos_edges.remove(cur[int(rng.integers(len(cur)))])
        while len(pos_edges) < E:
            free = [s for s in slots if s not in pos_edges]
            pos_edges.add(free[int(rng.integers(len(free)))])
    return _skeleton(N, cfg.k, pos_edges, perm)


def random_cbn(skeleton: CausalNet, alpha: float = 2.0, seed=0) -> CausalNet:
    """Every CPT row drawn from a symmetric Dirichlet(alpha)."""
    rng = _rng(seed)
    cpds = []
    for c in sorted(skeleton.cpds, key=lambda c: c.child):
        k = skeleton.card(c.child)
        rows = rng.dirichlet([alpha] * k, size=len(c.table))
        cpds.append(Cpt(c.child, c.parents, rows.tolist()))
    return skeleton.with_cpds(cpds, positive=True)


def random_tupleset(net: CausalNet, cfg: InstanceConfig, seed=0, m: int | None = None) -> TupleSet:
    """Random mixture satisfying exclusion: one reserved value per node is never
    targeted. Repeated targets are merged by summing their weights."""
    rng = _rng(seed)
    ids = list(net.node_ids)
    N = len(ids)
    if m is None:
        m = int(rng.integers(cfg.m_range[0], cfg.m_range[1] + 1))
    reserved = {n: int(rng.integers(net.card(n))) for n in ids}
    targets = []
    for _ in range(m):
        r = int(rng.integers(0, N + 1))
        chosen = rng.choice(N, size=r, replace=False) if r else []
        items = []
        for i in chosen:
            n = ids[int(i)]
            allowed = [v for v in range(net.card(n)) if v != reserved[n]]
            items.append((n, allowed[int(rng.integers(len(allowed)))]))
        targets.append(Target(tuple(items)))
    weights = rng.dirichlet([cfg.weight_alpha] * m)
    return TupleSet.merged(zip(targets, weights.tolist()))


def exact_weights(ts: TupleSet, max_denominator: int = 1000) -> TupleSet:
    """Rational weights close to the float ones, summing exactly to 1."""
    ws = [max(Fraction(t.weight).limit_denominator(max_denominator), Fraction(1, max_denominator))
          for t in ts]
    s = sum(ws)
    return TupleSet((t.target, w / s) for t, w in zip(ts, ws))


def metrics(truth: TupleSet, recovered: TupleSet) -> MetricsRecord:
    """Recall, RMSE over the union, FP-RMSE and FN-RMSE (0 for empty sets)."""
    if len(truth) == 0:
        raise ValueError("truth must be non-empty")
    tw = {t: float(w) for t, w in truth.weights().items()}
    rw = {t: float(w) for t, w in recovered.weights().items()}
    both = tw.keys() & rw.keys()
    fn = tw.keys() - rw.keys()
    fp = rw.keys() - tw.keys()
    sq_both = sum((tw[t] - rw[t]) ** 2 for t in both)
    sq_fn = sum(tw[t] ** 2 for t in fn)
    sq_fp = sum(rw[t] ** 2 for t in fp)
    union = len(tw.keys() | rw.keys())
    return MetricsRecord(
        recall=len(both) / len(tw),
        rmse=math.sqrt((sq_both + sq_fn + sq_fp) / union),
        fp_rmse=math.sqrt(sq_fp / len(fp)) if fp else 0.0,
        fn_rmse=math.sqrt(sq_fn / len(fn)) if fn else 0.0,
    )


@dataclass(frozen=True)
class InstanceResult:
    model: str
    N: int
    M: int
    seed: int
    m: int
    recall: float
    rmse: float
    fp_rmse: float
    fn_rmse: float
    pruned_mass: float
    runtime_ms: float

    def row(self) -> dict:
        return asdict(self)


CSV_COLUMNS = ("model", "N", "M", "seed", "m", "recall", "rmse", "fp_rmse", "fn_rmse",
               "pruned_mass", "runtime_ms")


def cell_seed(base: int, model: str, N: int, M: int, instance: int) -> int:
    """Instance seed for one grid cell; every (N, M) cell gets fresh instances."""
    ss = np.random.SeedSequence([base, MODELS.index(model), N, M, instance])
    return int(ss.generate_state(1)[0])


def instance_streams(seed: int):
    """Independent child streams: dag, cpds, tuples, observational and mixture samples."""
    from .estimate import spawn
    return spawn(seed, 5)


def make_instance(cfg: InstanceConfig):
    dag_ss, cpd_ss, ts_ss, obs_ss, mix_ss = instance_streams(cfg.seed)
    net = random_cbn(random_dag(cfg, dag_ss), cfg.cpd_alpha, cpd_ss)
    ts = random_tupleset(net, cfg, ts_ss)
    return net, ts, obs_ss, mix_ss


def run_instance(cfg: InstanceConfig) -> InstanceResult:
    """Generate, sample, estimate and disentangle one instance; score the result."""
    from .disentangle import disentangle_finite
    from .estimate import FrequencyOracle, ancestral_sample, mixture_sample, mle_cpds
    net, ts, obs_ss, mix_ss = make_instance(cfg)
    t0 = time.perf_counter()
    B = ancestral_sample(net, obs_ss, cfg.M)
    Bmix = mixture_sample(net, ts, mix_ss, cfg.M)
    net_hat = mle_cpds(B, net, cfg.delta)
    oracle = FrequencyOracle(Bmix, {n: net.card(n) for n in net.node_ids})
    report = disentangle_finite(net_hat, oracle, cfg.epsilon, check=False)
    runtime = (time.perf_counter() - t0) * 1000
    mr = metrics(ts, report.tuples)
    return InstanceResult(cfg.model, cfg.N, cfg.M, cfg.seed, len(ts), mr.recall, mr.rmse,
                          mr.fp_rmse, mr.fn_rmse, report.pruned_mass, runtime)
