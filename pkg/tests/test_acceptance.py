"""Acceptance criteria. Each test records one PASS/FAIL line, printed in the
terminal summary under "acceptance criteria"."""
import math
import random
import statistics
import time
from fractions import Fraction as F

import numpy as np

from intermix import StructuredSystem, Target, TupleSet, disentangle_finite, disentangle_oracle, make_net
from intermix.benchgen import InstanceConfig, cell_seed, metrics, run_instance
from intermix.disentangle import exact_table_oracle
from intermix.solver import candidates, solve_exact

from instances import (zero_prob_example, two_node_example, three_node_example, random_exact_tupleset, random_instance,
                       random_positive_row)
from solver_oracles import planted_system, rational_rank

HALF = F(1, 2)
SWEEP_INSTANCES = 40


def timed(fn, repeats=5):
    """Result of ``fn`` and the median wall time over ``repeats`` calls."""
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def sweep_cell(model, N, M, n=SWEEP_INSTANCES, base=0):
    rows = [run_instance(InstanceConfig(N=N, M=M, model=model, seed=cell_seed(base, model, N, M, i)))
            for i in range(n)]
    return {f: float(np.mean([getattr(r, f) for r in rows]))
            for f in ("recall", "rmse", "fp_rmse", "fn_rmse")}


def test_two_node_example(acceptance):
    net, ts = two_node_example()
    out, t = timed(lambda: disentangle_oracle(net, ts))
    expected = TupleSet([({0: 0}, HALF), ({0: 0, 1: 0}, HALF)])
    acceptance(1, f"two-node example recovered exactly in {t * 1e3:.2f} ms (< 10 ms)",
               out == expected and t < 0.010)


def test_three_node_example(acceptance):
    results = []
    for mu in [(F(1, 5), F(3, 10), F(1, 2)), (F(1, 3), F(1, 3), F(1, 3)), (F(1, 10), F(1, 10), F(4, 5))]:
        net, ts = three_node_example(mu)
        out, t = timed(lambda: disentangle_oracle(net, ts))
        # delta_0 = mu_0 on (V1=0), delta_3 = mu_1 on (V1=0,V2=0), delta_4 = mu_2 on its lift
        # to V3=0; the other deltas are zero and absent from the output
        results.append((out == ts, t))
    ok = all(r for r, _ in results) and max(t for _, t in results) < 0.050
    acceptance(2, f"three-node lift exact for 3 planted weight vectors, "
                  f"max {max(t for _, t in results) * 1e3:.2f} ms (< 50 ms)", ok)


def test_identifiability_round_trip(acceptance):
    t0 = time.perf_counter()
    failures = 0
    for seed in range(200):
        rng = random.Random(10 ** 6 + seed)
        net, ts = random_instance(10 ** 6 + seed, N=rng.randint(2, 5), k=rng.choice([2, 3]),
                                  m=rng.randint(1, 8))
        assert net.is_exact and ts.is_exact
        failures += disentangle_oracle(net, ts) != ts
    elapsed = time.perf_counter() - t0
    acceptance(3, f"200 random rational instances, {failures} failures, {elapsed:.1f} s (< 60 s)",
               failures == 0 and elapsed < 60)


def test_structured_solver_suite(acceptance):
    t0 = time.perf_counter()
    rng = random.Random(4)
    bad = 0
    for _ in range(1000):
        k = rng.randint(2, 8)
        a, b, c, x = planted_system(rng, k)
        sys = StructuredSystem(a, b, c)
        rank_ok = rational_rank(sys.matrix()) == k - 1
        null_ok = all(v == 0 for v in sys.apply(a))
        nonneg = {tuple(v) for v in candidates(sys) if min(v) >= 0}
        bad += not (rank_ok and null_ok and nonneg == {tuple(x)} and list(solve_exact(sys).x) == x)
    elapsed = time.perf_counter() - t0
    acceptance(4, f"1000 planted systems (k <= 8), {bad} failures, {elapsed:.1f} s (< 10 s)",
               bad == 0 and elapsed < 10)


def test_positivity_not_required(acceptance):
    net, ts = zero_prob_example()
    out = disentangle_oracle(net, ts)
    acceptance(5, "zero-probability network recovered with exact weights (1/2, 1/2)",
               out == TupleSet([({0: 0}, HALF), ({0: 0, 1: 0}, HALF)]))


def _non_increasing(xs, slack=0.02):
    rises = [b - a for a, b in zip(xs, xs[1:]) if b > a]
    return len(rises) == 0 or (len(rises) == 1 and rises[0] <= slack)


def test_sample_size_trend(acceptance):
    t0 = time.perf_counter()
    Ms = [2 ** 6, 2 ** 10, 2 ** 14, 2 ** 18]
    cells = [sweep_cell("sf", 4, M) for M in Ms]
    elapsed = time.perf_counter() - t0
    recall = [c["recall"] for c in cells]
    rmse = [c["rmse"] for c in cells]
    fp = [c["fp_rmse"] for c in cells]
    ok = (all(b >= a for a, b in zip(recall, recall[1:])) and recall[-1] >= 0.9
          and _non_increasing(rmse) and _non_increasing(fp) and elapsed < 900)
    fmt = lambda xs: "/".join(f"{x:.3f}" for x in xs)
    acceptance(6, f"N=4, {SWEEP_INSTANCES} instances per M in 2^6..2^18: recall {fmt(recall)}, "
                  f"rmse {fmt(rmse)}, fp-rmse {fmt(fp)}, {elapsed:.0f} s", ok)


def test_graph_model_parity(acceptance):
    sf = sweep_cell("sf", 4, 2 ** 14)
    er = sweep_cell("er", 4, 2 ** 14)
    diff = abs(sf["recall"] - er["recall"])
    acceptance(7, f"N=4, M=2^14, {SWEEP_INSTANCES} instances each: recall sf {sf['recall']:.3f} "
                  f"vs er {er['recall']:.3f}, |diff| {diff:.3f} (<= 0.1)", diff <= 0.1)


def test_metrics_example(acceptance):
    A, B, C = Target.of({0: 0}), Target.of({1: 0}), Target.of({2: 0})
    r = metrics(TupleSet([(A, 0.6), (B, 0.4)]), TupleSet([(A, 0.5), (C, 0.5)]))
    want = (0.5, math.sqrt((0.1 ** 2 + 0.4 ** 2 + 0.5 ** 2) / 3), 0.5, 0.4)
    got = (r.recall, r.rmse, r.fp_rmse, r.fn_rmse)
    acceptance(8, f"metrics example recall/rmse/fp/fn = {'/'.join(f'{g:.4f}' for g in got)}",
               all(abs(g - w) <= 1e-12 for g, w in zip(got, want)))


def test_exact_frequencies_reduce_to_oracle(acceptance):
    exact_ok = float_ok = 0
    for seed in range(50):
        net, ts = random_instance(5 * 10 ** 5 + seed)
        want = disentangle_oracle(net, ts)
        eps = float(min(ts.weights().values())) / 2
        table = exact_table_oracle(net, ts, backing="empirical-frequency")
        exact_ok += disentangle_finite(net, table, eps).tuples == want
        ftable = exact_table_oracle(net.to_float(), ts.to_float(), backing="empirical-frequency")
        got = disentangle_finite(net.to_float(), ftable, eps).tuples.weights()
        float_ok += (set(got) == set(want.targets)
                     and all(abs(got[t] - float(w)) < 1e-9 for t, w in want.weights().items()))
    acceptance(9, f"exact probabilities as frequencies: {exact_ok}/50 identical (rational), "
                  f"{float_ok}/50 within 1e-9 (float)", exact_ok == 50 and float_ok == 50)


def _chain(rng, N, k):
    return make_net([k] * N, {i: [i - 1] for i in range(1, N)},
                    {i: [random_positive_row(rng, k) for _ in range(k if i else 1)] for i in range(N)})


def test_chain_runtime_growth(acceptance):
    Ns = [2, 4, 8, 16]
    times = []
    for N in Ns:
        rng = random.Random(N)
        net = _chain(rng, N, 3)
        ts = random_exact_tupleset(rng, net, 6)
        while len(ts) < 6:
            ts = random_exact_tupleset(rng, net, 6)
        out, _ = timed(lambda: disentangle_oracle(net, ts), repeats=1)
        assert out == ts
        times.append(min(timed(lambda: disentangle_oracle(net, ts), repeats=1)[1] for _ in range(3)))
    slope = float(np.polyfit(np.log(Ns), np.log(times), 1)[0])
    acceptance(10, f"chain runtimes {'/'.join(f'{t * 1e3:.1f}' for t in times)} ms for N=2/4/8/16, "
                   f"log-log slope {slope:.2f} (< 3)", slope < 3)
