"""Fixtures shared by several test modules: the worked examples and random
exact instances satisfying positivity and exclusion."""
import random
from fractions import Fraction as F

from intermix import Target, TupleSet, make_net
from intermix.cbn import CausalNet, Cpt, Node

HALF = F(1, 2)


def two_node_example():
    net = make_net([2, 2], {1: [0]}, {0: [[HALF, HALF]], 1: [[HALF, HALF], [HALF, HALF]]})
    ts = TupleSet([({0: 0}, HALF), ({0: 0, 1: 0}, HALF)])
    return net, ts


def zero_prob_example():
    net = make_net([2, 2], {1: [0]}, {0: [[HALF, HALF]], 1: [[HALF, HALF], [F(1), F(0)]]},
                   positive=False)
    ts = TupleSet([({0: 0}, HALF), ({0: 0, 1: 0}, HALF)])
    return net, ts


def three_node_example(mu=(F(1, 5), F(3, 10), F(1, 2))):
    """Three binary nodes, pa(V2)={V1}, pa(V3)={V1,V2}; arbitrary positive CPDs."""
    net = make_net(
        [2, 2, 2], {1: [0], 2: [0, 1]},
        {0: [[F(2, 5), F(3, 5)]],
         1: [[F(1, 3), F(2, 3)], [F(3, 4), F(1, 4)]],
         2: [[F(1, 7), F(6, 7)], [F(2, 9), F(7, 9)], [F(5, 8), F(3, 8)], [F(1, 2), F(1, 2)]]})
    ts = TupleSet([({0: 0}, mu[0]), ({0: 0, 1: 0}, mu[1]), ({0: 0, 1: 0, 2: 0}, mu[2])])
    return net, ts


def random_positive_row(rng, k):
    w = [F(rng.randint(1, 9)) for _ in range(k)]
    s = sum(w)
    return [x / s for x in w]


def random_exact_net(rng, N, cards, max_parents=3):
    """Random DAG over ids shuffled against the topological order."""
    perm = list(range(N))
    rng.shuffle(perm)
    parents = {}
    for pos in range(N):
        earlier = perm[:pos]
        npar = rng.randint(0, min(max_parents, len(earlier)))
        parents[perm[pos]] = sorted(rng.sample(earlier, npar))
    nodes = [Node(i, cards[i]) for i in range(N)]
    edges = [(p, c) for c in range(N) for p in parents[c]]
    cpds = []
    for c in range(N):
        rows = 1
        for p in parents[c]:
            rows *= cards[p]
        cpds.append(Cpt(c, tuple(parents[c]), [random_positive_row(rng, cards[c]) for _ in range(rows)]))
    return CausalNet(nodes, edges, cpds, True)


def random_exact_tupleset(rng, net, m):
    """Up to m distinct targets avoiding one reserved value per node; rational weights."""
    ids = list(net.node_ids)
    reserved = {n: rng.randrange(net.card(n)) for n in ids}
    targets = set()
    for _ in range(m):
        r = rng.randint(0, len(ids))
        items = []
        for n in rng.sample(ids, r):
            allowed = [v for v in range(net.card(n)) if v != reserved[n]]
            items.append((n, rng.choice(allowed)))
        targets.add(Target(tuple(items)))
    w = [F(rng.randint(1, 20)) for _ in targets]
    s = sum(w)
    return TupleSet((t, x / s) for t, x in zip(sorted(targets, key=Target.sort_key), w))


def random_instance(seed, N=None, k=None, m=None):
    rng = random.Random(seed)
    N = N or rng.randint(2, 5)
    k = k or rng.choice([2, 3])
    cards = [k] * N
    net = random_exact_net(rng, N, cards)
    ts = random_exact_tupleset(rng, net, m or rng.randint(1, 8))
    return net, ts
