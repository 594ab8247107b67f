#!/usr/bin/env python3
"""Exercise the Python bindings end to end on a tiny synthetic network."""

import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parents[1]


def import_mfpm():
    so = ROOT / "target" / "debug" / "libmfpm.so"
    if not so.exists():
        subprocess.run(["cargo", "build", "-p", "mfpm-py"], cwd=ROOT, check=True)
    stage = pathlib.Path(tempfile.mkdtemp(prefix="mfpm-py-"))
    shutil.copy(so, stage / "mfpm.so")
    sys.path.insert(0, str(stage))
    import mfpm

    return mfpm


def main():
    mfpm = import_mfpm()
    work = pathlib.Path(tempfile.mkdtemp(prefix="mfpm-smoke-"))

    # a two-node chain: p(a->b) = 1/indeg(b) = 1, so seeding a buys the
    # whole graph and the exact numbers follow from the drawn parameters
    graph = work / "chain.txt"
    graph.write_text("a b\n")
    net = mfpm.load_network(graph, q=1, directed=True, rng_seed=7)
    assert net.n == 2 and net.m == 1 and net.q == 1
    assert net.labels() == ["a", "b"]
    cost_a = net.cost("a")
    assert 0.0 < cost_a <= 1.0
    assert net.weights("a") == [1.0]

    exact = net.exact_profit(["a"])
    assert math.isclose(exact, net.total_profit()), exact
    mean, se = net.monte_carlo_profit(["a"], sims=2000, seed=3)
    assert abs(mean - exact) <= 3 * se + 1e-9, (mean, se)

    # {a} is feasible at budget cost(a) and strictly beats every alternative
    best, value = net.exact_optimum(budget=cost_a)
    assert best == ["a"] and math.isclose(value, exact), (best, value)

    res = net.run_policy("SAG", budget=cost_a, policy_seed=5, env_seed=9)
    assert res["seeds"], res
    assert res["total_cost"] < cost_a + max(cost_a, net.cost("b"))
    assert res["realized_profit"] in (exact, net.profit("b")) or res["realized_profit"] == 0.0
    again = net.run_policy("SAG", budget=cost_a, policy_seed=5, env_seed=9)
    assert again["seeds"] == res["seeds"]
    assert again["estimated_profit"] == res["estimated_profit"]
    assert again["trace"] == res["trace"]

    # a bigger synthetic graph through the full experiment pipeline
    bigger = work / "synth.txt"
    bigger.write_text(mfpm.synth_edge_list(15, 30, seed=2))
    config = work / "exp.toml"
    out_csv = work / "results.csv"
    config.write_text(
        f'dataset = "{bigger}"\n'
        f'output = "{out_csv}"\n'
        "q = 2\n"
        "rng_seed = 4\n"
        "budgets = [2.0]\n"
        'policies = ["AR", "AMD", "SAG"]\n'
        "repetitions = 2\n"
        "seed = 6\n"
        "rr_cap = 20000\n"
        "timing = false\n"
    )
    report = mfpm.run_experiment(config)
    assert report["rows"] == 3 * 1 * 2, report
    lines = mfpm.summarize(out_csv)
    assert len(lines) == 3
    assert {l["policy"] for l in lines} == {"AR", "AMD", "SAG"}
    assert all(l["runs"] == 2 for l in lines)

    print("python bindings smoke test: ok")


if __name__ == "__main__":
    main()
