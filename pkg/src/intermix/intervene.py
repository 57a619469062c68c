"""Perfect interventions, mixtures of interventions and the exclusion check."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping

from .cbn import CausalNet, Prob, _check_total
from .errors import ExclusionViolated, IncompleteAssignment, InvalidTupleSet

#: tolerance on the total weight of a float tuple set
FLOAT_WEIGHT_TOL = 1e-9


@dataclass(frozen=True)
class Target:
    """A partial assignment ``node -> value``; the empty target is observational."""

    items: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        items = tuple(sorted((int(n), int(v)) for n, v in self.items))
        if len({n for n, _ in items}) != len(items):
            raise ValueError(f"target assigns a node twice: {items}")
        object.__setattr__(self, "items", items)

    @classmethod
    def of(cls, mapping: Mapping[int, int] | None = None) -> "Target":
        return cls(tuple((mapping or {}).items()))

    def __len__(self):
        return len(self.items)

    def __iter__(self):
        return iter(self.items)

    def __contains__(self, node):
        return any(n == node for n, _ in self.items)

    def __repr__(self):
        if not self.items:
            return "Target(∅)"
        return "Target(" + ", ".join(f"V{n}={v}" for n, v in self.items) + ")"

    @property
    def nodes(self) -> tuple[int, ...]:
        return tuple(n for n, _ in self.items)

    def get(self, node, default=None):
        for n, v in self.items:
            if n == node:
                return v
        return default

    def as_dict(self) -> dict[int, int]:
        return dict(self.items)

    def drop(self, node: int) -> "Target":
        return Target(tuple(it for it in self.items if it[0] != node))

    def extend(self, node: int, value: int) -> "Target":
        return Target(self.items + ((node, value),))

    def issubset(self, other: "Target") -> bool:
        return set(self.items) <= set(other.items)

    def sort_key(self):
        return (len(self.items), self.items)


@dataclass(frozen=True)
class InterventionTuple:
    target: Target
    weight: Prob


class TupleSet:
    """Immutable set of (target, weight) pairs in canonical order.

    Targets are kept sorted by (size, node/value codes), so two sets are equal
    exactly when they hold the same targets with equal weights.
    """

    __slots__ = ("tuples",)

    def __init__(self, tuples: Iterable[InterventionTuple | tuple] = ()):
        tl = []
        for t in tuples:
            if not isinstance(t, InterventionTuple):
                target, w = t
                if not isinstance(target, Target):
                    target = Target.of(target)
                t = InterventionTuple(target, w)
            if not t.weight > 0:
                raise InvalidTupleSet(f"weight of {t.target} must be positive, got {t.weight}")
            tl.append(t)
        tl.sort(key=lambda t: t.target.sort_key())
        for a, b in zip(tl, tl[1:]):
            if a.target == b.target:
                raise InvalidTupleSet(f"duplicate target {a.target}")
        self.tuples = tuple(tl)

    @classmethod
    def merged(cls, pairs: Iterable[tuple[Target, Prob]]) -> "TupleSet":
        """Build from possibly repeated targets, summing the weights of repeats."""
        acc: dict[Target, Prob] = {}
        for t, w in pairs:
            acc[t] = acc.get(t, 0) + w
        return cls((t, w) for t, w in acc.items() if w > 0)

    def __iter__(self) -> Iterator[InterventionTuple]:
        return iter(self.tuples)

    def __len__(self):
        return len(self.tuples)

    def __eq__(self, other):
        if not isinstance(other, TupleSet):
            return NotImplemented
        return self.tuples == other.tuples

    def __hash__(self):
        return hash(self.tuples)

    def __repr__(self):
        return "TupleSet(" + ", ".join(f"{t.target!r}: {t.weight}" for t in self.tuples) + ")"

    @property
    def targets(self) -> tuple[Target, ...]:
        return tuple(t.target for t in self.tuples)

    def weights(self) -> dict[Target, Prob]:
        return {t.target: t.weight for t in self.tuples}

    def total(self) -> Prob:
        return sum((t.weight for t in self.tuples), 0)

    @property
    def is_exact(self) -> bool:
        return all(isinstance(t.weight, (Fraction, int)) for t in self.tuples)

    def check_normalized(self, tol: float = FLOAT_WEIGHT_TOL):
        s = self.total()
        if self.is_exact:
            if s != 1:
                raise InvalidTupleSet(f"weights sum to {s}, not 1")
        elif abs(s - 1) > tol:
            raise InvalidTupleSet(f"weights sum to {s}, not 1")

    def check_against(self, net: CausalNet):
        for t in self.tuples:
            for n, v in t.target:
                if n not in net.node_ids or not 0 <= v < net.card(n):
                    raise InvalidTupleSet(f"target {t.target} invalid for this network")

    def to_exact(self, max_denominator: int | None = None) -> "TupleSet":
        """Fraction weights rescaled to sum exactly to 1."""
        def conv(x):
            f = Fraction(repr(x)) if isinstance(x, float) else Fraction(x)
            return f.limit_denominator(max_denominator) if max_denominator else f
        ws = [conv(t.weight) for t in self.tuples]
        s = sum(ws)
        return TupleSet((t.target, w / s) for t, w in zip(self.tuples, ws))

    def to_float(self) -> "TupleSet":
        return TupleSet((t.target, float(t.weight)) for t in self.tuples)


@dataclass(frozen=True)
class ExclusionWitness:
    values: dict

    def __getitem__(self, node):
        return self.values[node]


def prefix_prob(net: CausalNet, target: Target, v: Mapping[int, int]) -> Prob:
    """P_target of the partial assignment ``v``.

    ``v`` must cover an ancestrally closed node set (every covered node has its
    parents covered), e.g. a prefix of a topological order. Target entries on
    nodes outside ``v`` are marginalized away, which for perfect interventions
    simply means they are ignored.
    """
    for n, val in target.items:
        if n in v and v[n] != val:
            return 0
    p = 1
    for n in v:
        if n in target:
            continue
        try:
            p *= net.cond_prob(n, v)
        except KeyError as exc:
            raise IncompleteAssignment(f"node {n} is assigned but parent {exc} is not") from None
        if p == 0:
            return p
    return p


def interventional_prob(net: CausalNet, t: Target, v: Mapping[int, int]) -> Prob:
    _check_total(net, v)
    return prefix_prob(net, t, v)


def mixture_prefix_prob(net: CausalNet, ts: TupleSet, v: Mapping[int, int]) -> Prob:
    return sum((t.weight * prefix_prob(net, t.target, v) for t in ts), 0)


def mixture_prob(net: CausalNet, ts: TupleSet, v: Mapping[int, int]) -> Prob:
    _check_total(net, v)
    return mixture_prefix_prob(net, ts, v)


def check_exclusion(ts: TupleSet, net: CausalNet) -> ExclusionWitness:
    """Smallest value of each node that no target uses."""
    used: dict[int, set] = {n: set() for n in net.node_ids}
    for t in ts:
        for n, v in t.target:
            used[n].add(v)
    witness = {}
    for n in net.node_ids:
        free = [v for v in range(net.card(n)) if v not in used[n]]
        if not free:
            raise ExclusionViolated(n)
        witness[n] = free[0]
    return ExclusionWitness(witness)


def marginalize_tuples(ts: TupleSet, last: int) -> TupleSet:
    """Tuple set generating the marginal mixture once ``last`` (a sink) is summed out."""
    return TupleSet.merged((t.target.drop(last), t.weight) for t in ts)
