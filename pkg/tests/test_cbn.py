import itertools
import random
from fractions import Fraction as F

import pytest

from intermix import delete_last, joint_prob, make_net, topological_order, validate
from intermix.cbn import CausalNet, Cpt, Node, normalize_table
from intermix.errors import (CycleDetected, IncompleteAssignment, InvalidNetwork, NotASink,
                             PositivityViolated, UnnormalizedCpt)
from intermix.formats import net_from_dict, net_to_dict

from instances import zero_prob_example, two_node_example, three_node_example, random_exact_net


def brute_joint(net, v):
    """Sum-product with row lookup built by explicit enumeration of parent values."""
    p = F(1)
    for c in net.cpds:
        parent_rows = itertools.product(*(range(net.card(q)) for q in c.parents))
        lookup = {vals: row for vals, row in zip(parent_rows, c.table)}
        p *= lookup[tuple(v[q] for q in c.parents)][v[c.child]]
    return p


def test_validate_uniform_single_node():
    net = make_net([2], {}, {0: [[0.5, 0.5]]})
    report = validate(net)
    assert report.n_nodes == 1 and report.n_edges == 0 and report.positive


def test_validate_rejects_zero_entry_when_positive():
    net, _ = zero_prob_example()
    flagged = net.with_cpds(net.cpds, positive=True)
    with pytest.raises(PositivityViolated) as err:
        validate(flagged)
    assert err.value.node == 1 and err.value.parent_code == 1 and err.value.value == 1
    validate(net)  # flag cleared: zero entries allowed


def test_validate_detects_two_cycle():
    nodes = [Node(0, 2), Node(1, 2)]
    cpds = [Cpt(0, (1,), [[0.5, 0.5]] * 2), Cpt(1, (0,), [[0.5, 0.5]] * 2)]
    net = CausalNet(nodes, [(0, 1), (1, 0)], cpds)
    with pytest.raises(CycleDetected):
        validate(net)


def test_validate_unnormalized_row():
    net = make_net([2], {}, {0: [[F(1, 2), F(1, 3)]]})
    with pytest.raises(UnnormalizedCpt):
        validate(net)


def test_normalize_table_float_tolerance():
    assert normalize_table(0, [[0.5, 0.5 + 1e-13]])[0][0] == pytest.approx(0.5)
    with pytest.raises(UnnormalizedCpt):
        normalize_table(0, [[0.5, 0.6]])


def test_bad_shapes_rejected():
    with pytest.raises(InvalidNetwork):
        Node(0, 1)
    with pytest.raises(InvalidNetwork):
        make_net([2, 2], {1: [0]}, {0: [[0.5, 0.5]], 1: [[0.5, 0.5]]})


@pytest.mark.parametrize("parents,expected", [
    ({1: [0], 2: [1]}, [0, 1, 2]),
    ({}, [0, 1, 2]),
    ({1: [0], 2: [0, 1]}, [0, 1, 2]),
    ({0: [2], 1: [2]}, [2, 0, 1]),
])
def test_topological_order(parents, expected):
    tables = {i: [[0.5, 0.5]] * (2 ** len(parents.get(i, []))) for i in range(3)}
    assert topological_order(make_net([2, 2, 2], parents, tables)) == expected


def test_joint_prob_example():
    net, _ = two_node_example()
    assert joint_prob(net, {0: 0, 1: 0}) == F(1, 4)


def test_joint_prob_rejects_partial():
    net, _ = two_node_example()
    with pytest.raises(IncompleteAssignment):
        joint_prob(net, {0: 0})
    with pytest.raises(IncompleteAssignment):
        joint_prob(net, {0: 0, 1: 2})


@pytest.mark.parametrize("seed", range(20))
def test_joint_prob_matches_brute_force(seed):
    rng = random.Random(seed)
    net = random_exact_net(rng, 3, [rng.choice([2, 3]) for _ in range(3)])
    total = 0
    for v in net.assignments():
        p = joint_prob(net, v)
        assert p == brute_joint(net, v)
        total += p
    assert total == 1


def test_delete_last_chain():
    net, _ = two_node_example()
    reduced = delete_last(net)
    assert reduced.node_ids == (0,) and reduced.cpd(0) == net.cpd(0)


def test_delete_last_three_node_example():
    net, _ = three_node_example()
    reduced = delete_last(net)
    assert reduced.node_ids == (0, 1) and reduced.edges == ((0, 1),)


def test_delete_last_requires_sink():
    net, _ = three_node_example()
    with pytest.raises(NotASink):
        delete_last(net, order=[0, 2, 1])


@pytest.mark.parametrize("seed", range(20))
def test_delete_last_marginal_identity(seed):
    rng = random.Random(100 + seed)
    net = random_exact_net(rng, 4, [rng.choice([2, 3]) for _ in range(4)])
    order = topological_order(net)
    last = order[-1]
    reduced = delete_last(net, order)
    for v in reduced.assignments():
        full = sum(brute_joint(net, {**v, last: x}) for x in range(net.card(last)))
        assert joint_prob(reduced, v) == full


def test_to_exact_rows_sum_to_one():
    net = make_net([3], {}, {0: [[0.1, 0.2, 0.7]]}).to_exact()
    assert sum(net.cpd(0).table[0]) == 1 and net.is_exact


@pytest.mark.parametrize("seed", range(5))
def test_json_round_trip(seed):
    rng = random.Random(seed)
    net = random_exact_net(rng, 4, [3] * 4)
    assert net_from_dict(net_to_dict(net)) == net
    fnet = net.to_float()
    assert net_from_dict(net_to_dict(fnet)) == fnet
