"""Recovery of intervention targets and mixing weights from a mixture.

Both the exact and the finite-sample algorithm walk a topological order one
node at a time. The tuple set recovered for the first ``l`` nodes is lifted to
the first ``l + 1`` nodes by solving one structured system per recovered
target, in an order where no later target is contained in an earlier one.

Distribution access goes through oracle objects exposing ``prob(assignment)``
for assignments over a topological prefix, plus a ``backing`` tag.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .cbn import CausalNet, Prob, topological_order
from .errors import ExclusionUnsatisfiable, Inconsistent
from .intervene import Target, TupleSet, mixture_prefix_prob, prefix_prob
from .solver import FLOAT_SUM_TOL, FLOAT_ZERO_TOL, StructuredSystem, solve_exact, solve_scored

DEFAULT_EPSILON = 0.01


class NetOracle:
    """Marginals of P_target over a topological prefix, read off the CPDs."""

    backing = "exact-net"

    def __init__(self, net: CausalNet, target: Target | None = None):
        self.net = net
        self.target = target or Target()

    def prob(self, v: Mapping[int, int]) -> Prob:
        return prefix_prob(self.net, self.target, v)


class MixtureOracle:
    """Exact mixture marginals built from a known tuple set (self-oracle)."""

    backing = "exact-mixture"

    def __init__(self, net: CausalNet, tuples: TupleSet):
        self.net = net
        self.tuples = tuples

    def prob(self, v: Mapping[int, int]) -> Prob:
        return mixture_prefix_prob(self.net, self.tuples, v)


class TableOracle:
    """Marginals of an explicit joint table, obtained by summing out the suffix.

    ``table`` maps full assignments (tuples ordered as ``columns``) to weights.
    Weights need not be normalized: they are divided by their total, so raw
    counts work as well as probabilities. Marginal tables are cached per
    queried node set.
    """

    def __init__(self, columns: Sequence[int], table: Mapping[tuple, Prob],
                 backing: str = "exact-mixture"):
        self.columns = tuple(columns)
        self.table = dict(table)
        self.backing = backing
        self._total = sum(self.table.values(), 0)
        self._pos = {c: i for i, c in enumerate(self.columns)}
        self._cache: dict[tuple, dict] = {}

    def marginal(self, nodes: Sequence[int]) -> dict[tuple, Prob]:
        key = tuple(nodes)
        if key not in self._cache:
            idx = [self._pos[n] for n in key]
            acc: dict[tuple, Prob] = {}
            for row, w in self.table.items():
                sub = tuple(row[i] for i in idx)
                acc[sub] = acc.get(sub, 0) + w
            self._cache[key] = acc
        return self._cache[key]

    def prob(self, v: Mapping[int, int]) -> Prob:
        nodes = tuple(sorted(v))
        w = self.marginal(nodes).get(tuple(v[n] for n in nodes), 0)
        return w / self._total


def exact_table_oracle(net: CausalNet, tuples: TupleSet, backing="exact-mixture") -> TableOracle:
    """Enumerate the full mixture table; exponential in the node count."""
    cols = net.node_ids
    table = {tuple(v[c] for c in cols): mixture_prefix_prob(net, tuples, v)
             for v in net.assignments()}
    return TableOracle(cols, table, backing)


@dataclass
class LiftContext:
    """Settings used to lift one level: ordered targets, witness values, complements."""

    node: int
    prefix: tuple[int, ...]
    targets: tuple[Target, ...]
    weights: tuple
    witness: dict[int, int]

    def complement(self, i: int) -> dict[int, int]:
        s = self.targets[i]
        return {n: self.witness[n] for n in self.prefix if n not in s}

    def base(self, i: int) -> dict[int, int]:
        v = self.complement(i)
        v.update(self.targets[i].as_dict())
        return v

    def setting(self, i: int, value: int) -> dict[int, int]:
        v = self.base(i)
        v[self.node] = value
        return v


@dataclass
class DisentangleReport:
    tuples: TupleSet
    residuals: list = field(default_factory=list)   # (level, target index, residual)
    pruned_mass: float = 0.0
    repairs: list = field(default_factory=list)     # (level, node, zeroed value)
    dropped: list = field(default_factory=list)     # (level, target) removed with mu < epsilon
    wall_time: float = 0.0
    mode: str = "oracle"

    def to_dict(self) -> dict:
        from .formats import tupleset_to_dict
        return {
            "mode": self.mode,
            "tuples": tupleset_to_dict(self.tuples)["tuples"],
            "residuals": [{"level": lv, "target_index": i, "residual": float(r)}
                          for lv, i, r in self.residuals],
            "pruned_mass": float(self.pruned_mass),
            "repairs": [{"level": lv, "node": n, "value": v} for lv, n, v in self.repairs],
            "dropped": [{"level": lv, "target": {str(n): v for n, v in t}}
                        for lv, t in self.dropped],
            "wall_time": self.wall_time,
        }


def order_targets(ts: TupleSet) -> list:
    """Targets by size then codes: no target is a subset of an earlier one."""
    return sorted(ts, key=lambda t: t.target.sort_key())


def _witness(ts: TupleSet, net: CausalNet, prefix: Sequence[int], level: int) -> dict[int, int]:
    used: dict[int, set] = {n: set() for n in prefix}
    for t in ts:
        for n, v in t.target:
            used[n].add(v)
    w = {}
    for n in prefix:
        free = [v for v in range(net.card(n)) if v not in used[n]]
        if not free:
            raise ExclusionUnsatisfiable(n, level)
        w[n] = free[0]
    return w


def make_context(net: CausalNet, order: Sequence[int], level: int, S: TupleSet) -> LiftContext:
    """Context for adding ``order[level]`` on top of the prefix ``order[:level]``."""
    prefix = tuple(order[:level])
    ordered = order_targets(S)
    return LiftContext(
        node=order[level], prefix=prefix,
        targets=tuple(t.target for t in ordered),
        weights=tuple(t.weight for t in ordered),
        witness=_witness(S, net, prefix, level))


def _is_float(x) -> bool:
    return not isinstance(x, (Fraction, int))


def _snap(x):
    """Float rounding residue around zero becomes exactly zero."""
    return 0.0 if _is_float(x) and abs(x) <= FLOAT_ZERO_TOL else x


@dataclass
class _LevelResult:
    lifts: list          # per target i: list of k weights for s_i ∪ {node=l}
    remainders: list     # per target i: weight kept on s_i itself
    residuals: list
    pruned: float = 0.0
    dropped: list = field(default_factory=list)
    repair: int | None = None


def _solve_level(net: CausalNet, ctx: LiftContext, mix, finite: bool,
                 epsilon: float, check: bool) -> _LevelResult:
    u = ctx.node
    k = net.card(u)
    res = _LevelResult([], [], [])
    done: list[tuple[Target, Prob]] = []   # tuples fixed for groups j < i
    for i, (s_i, mu_i) in enumerate(zip(ctx.targets, ctx.weights)):
        settings = [ctx.setting(i, l) for l in range(k)]
        if check:
            # later groups (and all their lifts) vanish on these settings
            for s_r in ctx.targets[i + 1:]:
                for l, v in enumerate(settings):
                    assert prefix_prob(net, s_r, v) == 0, (s_r, v)
                    assert prefix_prob(net, s_r.extend(u, l), v) == 0, (s_r, l, v)
        a = [prefix_prob(net, s_i, v) for v in settings]
        c = prefix_prob(net, s_i, ctx.base(i))
        if check:
            sa = sum(a, 0)
            if _is_float(sa):
                assert abs(sa - c) <= FLOAT_SUM_TOL * c, (sa, c)
            else:
                assert sa == c, (sa, c)
        b = []
        for l, v in enumerate(settings):
            bl = mix.prob(v) - mu_i * a[l]
            for s, w in done:
                bl -= w * prefix_prob(net, s, v)
            b.append(bl)
        sys = StructuredSystem(tuple(a), tuple(b), c)
        sol = solve_scored(sys) if finite else solve_exact(sys)
        x = list(sol.x)
        total = sum(x, 0)
        rem = _snap(mu_i - total)
        if not finite:
            if rem < 0:
                raise Inconsistent(f"lifts of {s_i} exceed its weight {mu_i} by {-rem}")
        elif rem < epsilon:
            if total > 0:
                x = [mu_i * xi / total for xi in x]
                if rem > 0:
                    res.pruned += rem
                rem = 0 * rem
            else:
                # mu_i itself is below epsilon and nothing lifts: drop the target
                res.pruned += mu_i
                res.dropped.append(s_i)
                rem = 0 * rem
        res.lifts.append(x)
        res.remainders.append(rem)
        res.residuals.append(sol.residual)
        for l, xl in enumerate(x):
            if xl > 0:
                done.append((s_i.extend(u, l), xl))
        if rem > 0:
            done.append((s_i, rem))
    return res


def _repair_exclusion(res: _LevelResult, k: int) -> int | None:
    """If every value of the new node is used, zero the least-used one.

    Each group's lift weights are rescaled to keep their previous total; if a
    group had all its lift mass on the zeroed value, that mass returns to the
    unlifted target.
    """
    used = {l for x in res.lifts for l, xl in enumerate(x) if xl > 0}
    if len(used) < k:
        return None
    mass = [sum(x[l] for x in res.lifts) for l in range(k)]
    vstar = min(range(k), key=lambda l: (mass[l], l))
    for i, x in enumerate(res.lifts):
        before = sum(x, 0)
        z = x[vstar]
        x[vstar] = 0 * z
        after = sum(x, 0)
        if after > 0:
            res.lifts[i] = [xl * before / after for xl in x]
        else:
            res.remainders[i] += z
    return vstar


def lift_level(net: CausalNet, order: Sequence[int], level: int, S: TupleSet, mix,
               finite: bool = False, epsilon: float = DEFAULT_EPSILON,
               check: bool = True) -> tuple[TupleSet, _LevelResult, LiftContext]:
    """Lift ``S`` (over ``order[:level]``) to a tuple set over ``order[:level+1]``."""
    ctx = make_context(net, order, level, S)
    res = _solve_level(net, ctx, mix, finite, epsilon, check)
    if finite:
        res.repair = _repair_exclusion(res, net.card(ctx.node))
    pairs = []
    for s_i, x, rem in zip(ctx.targets, res.lifts, res.remainders):
        pairs.extend((s_i.extend(ctx.node, l), xl) for l, xl in enumerate(x) if xl > 0)
        if rem > 0:
            pairs.append((s_i, rem))
    return TupleSet(pairs), res, ctx


def base_case(card: int, p: Sequence[Prob], mix: Sequence[Prob], node: int = 0,
              finite: bool = False, epsilon: float = DEFAULT_EPSILON) -> TupleSet:
    """Recover the tuple set of a one-node network from P(v^i) and P_mix(v^i)."""
    a = list(p)
    b = [m - pi for m, pi in zip(mix, p)]
    sys = StructuredSystem(tuple(a), tuple(b), 1 if not any(map(_is_float, a)) else 1.0)
    sol = solve_scored(sys) if finite else solve_exact(sys)
    x = list(sol.x)
    total = sum(x, 0)
    rem = _snap(1 - total)
    if finite and rem < epsilon and total > 0:
        x = [xi / total for xi in x]
        rem = 0
    elif not finite and rem < 0:
        raise Inconsistent("base-case weights exceed 1")
    pairs = [(Target(((node, l),)), xl) for l, xl in enumerate(x) if xl > 0]
    if rem > 0:
        pairs.append((Target(), rem))
    return TupleSet(pairs)


def _run(net: CausalNet, mix, finite: bool, epsilon: float, check: bool) -> DisentangleReport:
    t0 = time.perf_counter()
    order = topological_order(net)
    exact = net.is_exact
    S = TupleSet([(Target(), Fraction(1) if exact else 1.0)])
    report = DisentangleReport(S, mode="finite" if finite else "oracle")
    for level in range(len(order)):
        S, res, ctx = lift_level(net, order, level, S, mix, finite, epsilon, check)
        report.residuals.extend((level, i, r) for i, r in enumerate(res.residuals))
        report.pruned_mass += float(res.pruned)
        report.dropped.extend((level, t) for t in res.dropped)
        if res.repair is not None:
            report.repairs.append((level, ctx.node, res.repair))
    report.tuples = S
    report.wall_time = time.perf_counter() - t0
    return report


def disentangle_oracle(net: CausalNet, mix, check: bool = True) -> TupleSet:
    """Exact recovery: the unique exclusion-satisfying tuple set generating ``mix``.

    ``mix`` is an oracle (see :class:`MixtureOracle`, :class:`TableOracle`) or a
    :class:`TupleSet`, which is turned into a self-oracle on ``net``.
    """
    return disentangle_oracle_report(net, mix, check).tuples


def disentangle_oracle_report(net: CausalNet, mix, check: bool = True) -> DisentangleReport:
    if isinstance(mix, TupleSet):
        mix = MixtureOracle(net, mix)
    return _run(net, mix, finite=False, epsilon=0.0, check=check)


def disentangle_finite(net_hat: CausalNet, mix, epsilon: float = DEFAULT_EPSILON,
                       check: bool = True) -> DisentangleReport:
    """Finite-sample recovery with least-residual candidate selection and pruning.

    ``net_hat`` is normally a smoothed MLE network; ``mix`` is a SampleSet or any
    oracle (an exact one reduces this to the oracle algorithm).
    """
    from .errors import EmptySampleSet
    from .estimate import FrequencyOracle, SampleSet
    if isinstance(mix, SampleSet):
        if mix.M == 0:
            raise EmptySampleSet("mixture sample set is empty")
        mix = FrequencyOracle(mix, {n: net_hat.card(n) for n in net_hat.node_ids})
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return _run(net_hat, mix, finite=True, epsilon=epsilon, check=check)


def brute_force_lift(net: CausalNet, order: Sequence[int], level: int, S: TupleSet, mix):
    """Independent check of one lift: enumerate, per target, which lift values are
    zero, solve the full joint system over all candidate targets by least
    squares, and keep the non-negative exact solution respecting exclusion.

    Used in tests only; exponential in the number of targets.
    """
    import numpy as np
    u = order[level]
    k = net.card(u)
    prefix = list(order[:level + 1])
    ordered = order_targets(S)
    cands = []
    for t in ordered:
        cands.append(t.target)
        cands.extend(t.target.extend(u, l) for l in range(k))
    rows = list(net.assignments(prefix))
    A = np.array([[float(prefix_prob(net, c, v)) for c in cands] for v in rows])
    y = np.array([float(mix.prob(v)) for v in rows])
    # marginal constraints: lifts of s_i sum to mu_i
    Ceq = np.zeros((len(ordered), len(cands)))
    for i in range(len(ordered)):
        Ceq[i, i * (k + 1):(i + 1) * (k + 1)] = 1
    deq = np.array([float(t.weight) for t in ordered])
    solutions = []
    for zeros in itertools.product(range(k), repeat=len(ordered)):
        keep = [j for j in range(len(cands))
                if not (j % (k + 1) != 0 and (j % (k + 1)) - 1 == zeros[j // (k + 1)])]
        AA = np.vstack([A[:, keep], Ceq[:, keep]])
        yy = np.concatenate([y, deq])
        sol, *_ = np.linalg.lstsq(AA, yy, rcond=None)
        if np.linalg.norm(AA @ sol - yy) > 1e-9 or (sol < -1e-9).any():
            continue
        full = np.zeros(len(cands))
        full[keep] = sol
        if not any(np.allclose(full, s, atol=1e-9) for s in solutions):
            solutions.append(full)
    return cands, solutions
