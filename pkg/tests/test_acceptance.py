"""Acceptance criteria, each at its stated tolerance.

Every test records one PASS/FAIL line, printed in the terminal summary.
"""
import itertools
import json
import math
import time

import numpy as np
import pytest

from rieszlab import (
    Ball,
    CantorSpec,
    DiscreteMeasure,
    KernelSpec,
    adjoint_apply,
    comparability_scan,
    find_thin_ball,
    global_identity_check,
    main_lemma_ratio,
    multiscale_energy_profile,
    operator_norm,
    permutation_form,
    pointwise_identity_check,
    reflectionless_pairing,
    total_energy,
    transform_field,
    tree_transform_field,
    variational_derivative,
)
from rieszlab.cli import run
from rieszlab.transforms import dense_operator, weighted_inner
from rieszlab.treecode import contract_deviation

from .conftest import random_measure, record_acceptance, safe_eps

S_VALUES = (0.25, 0.5, 0.75)


def check(number, name, ok, detail):
    record_acceptance(number, name, ok, detail)
    assert ok, detail


def test_criterion_1_pointwise_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(20261014)
    worst = 0.0
    for k in range(100):
        d = 1 + k % 3
        s = S_VALUES[(k // 3) % 3]
        mu = random_measure(rng, int(rng.integers(3, 201)), d)
        eps = safe_eps(mu, 0.005, 0.3, rng)
        x = mu.points[rng.integers(mu.size)] if k % 2 else rng.uniform(0, 1, d)
        rep = pointwise_identity_check(mu, KernelSpec(s), eps, x)
        worst = max(worst, rep.relative_residual)
    elapsed = time.perf_counter() - t0
    check(1, "pointwise identity (E=F)", worst <= 1e-9 and elapsed <= 60,
          f"max relative residual {worst:.2e} (<= 1e-9), {elapsed:.1f}s")


def test_criterion_2_global_identity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    worst = 0.0
    for k in range(30):
        d = 1 + k % 3
        s = S_VALUES[k % 3]
        mu = random_measure(rng, int(rng.integers(3, 151)), d)
        g = global_identity_check(mu, KernelSpec(s), 0.5 * mu.resolution)
        worst = max(worst, g.relative_residual)
    elapsed = time.perf_counter() - t0
    check(2, "global energy identity", worst <= 1e-10 and elapsed <= 60,
          f"max relative residual {worst:.2e} (<= 1e-10), {elapsed:.1f}s")


def test_criterion_3_duality_and_pairing():
    rng = np.random.default_rng(3)
    worst_dual = worst_pair = 0.0
    for k in range(100):
        d = 1 + k % 3
        spec = KernelSpec(S_VALUES[k % 3], 1 if k % 2 else 3)
        mu = random_measure(rng, int(rng.integers(2, 120)), d)
        eps = safe_eps(mu, 0.005, 0.3, rng)
        f = rng.standard_normal(mu.size)
        G = rng.standard_normal((mu.size, d))
        a = weighted_inner(mu, transform_field(mu, spec, eps, f=f), G)
        b = weighted_inner(mu, f, adjoint_apply(mu, spec, eps, G))
        worst_dual = max(worst_dual, abs(a - b) / max(abs(a), abs(b)))
        psi = rng.standard_normal(mu.size)
        p1 = reflectionless_pairing(mu, spec, eps, psi, "direct").value
        p2 = reflectionless_pairing(mu, spec, eps, psi, "antisymmetrized").value
        worst_pair = max(worst_pair, np.linalg.norm(p1 - p2) / max(np.linalg.norm(p1), 1e-300))
    check(3, "adjoint duality and antisymmetrized pairing",
          worst_dual <= 1e-10 and worst_pair <= 1e-10,
          f"duality {worst_dual:.2e}, pairing {worst_pair:.2e} (<= 1e-10)")


def test_criterion_4_comparability():
    lows, highs, spread = [], [], 0.0
    for seed, (d, s, n) in enumerate(itertools.product((1, 2, 3), S_VALUES, (1, 3))):
        lo, hi = comparability_scan(KernelSpec(s, n), 10_000, seed=seed, dim=d)
        lows.append(lo)
        highs.append(hi)
        spread = max(spread, hi / lo)
    h = math.sqrt(3) / 2
    tri = [abs(permutation_form(KernelSpec(s), [0, 0], [1, 0], [0.5, h]) - 1.5) for s in S_VALUES]
    col = abs(permutation_form(KernelSpec(0.5), [0.0], [1.0], [2.0]) - (math.sqrt(2) - 1))
    ok = min(lows) > 0 and math.isfinite(spread) and max(tri) <= 1e-10 and col <= 1e-10
    check(4, "comparability of p", ok,
          f"min ratio {min(lows):.3g}, max ratio {max(highs):.3g}, worst max/min {spread:.3g}; "
          f"equilateral err {max(tri):.1e}, collinear err {col:.1e}")


def _derivative_instances():
    rng = np.random.default_rng(5)
    for k in range(10):
        mu = CantorSpec(0.5, 5 + k % 4).build()
        c = mu.points[rng.integers(mu.size)]
        yield mu, Ball(c, rng.uniform(0.1, 0.4)), Ball(c, rng.uniform(0.02, 0.1)), mu.resolution / 2
    for k in range(10):
        d = 1 + k % 3
        mu = random_measure(rng, int(rng.integers(30, 120)), d)
        c = mu.points[0]
        yield mu, Ball(c, 0.5), Ball(c, 0.2), mu.resolution / 2


def test_criterion_5_variational_derivative():
    spec = KernelSpec(0.5)
    orders = []
    for mu, ball, delta, eps in _derivative_instances():
        orders.append(variational_derivative(mu, ball, delta, spec, eps).observed_order)
    mu = CantorSpec(0.5, 6).build()
    far = variational_derivative(mu, Ball([0.05], 0.1), Ball([0.9], 0.05), spec, mu.resolution / 2)
    zero = far.analytic == 0.0 and all(v == 0.0 for _, v in far.finite_difference)
    ok = len(orders) == 20 and all(1.7 <= o <= 2.3 for o in orders) and zero
    check(5, "variational derivative", ok,
          f"orders in [{min(orders):.4f}, {max(orders):.4f}] over {len(orders)} instances; "
          f"disjoint delta exactly zero: {zero}")


def test_criterion_6_blowup():
    t0 = time.perf_counter()
    spec = KernelSpec(0.5)
    mu = CantorSpec(0.5, 10).build()
    x = mu.points[0]
    rep = multiscale_energy_profile(mu, spec, x, Ball(x, 4.0**-10), 9, step=2)
    s1, _ = rep.window_fit(2, 5)
    s2, _ = rep.window_fit(5, 8)
    slope_ok = s1 > 0 and s2 > 0 and max(s1, s2) / min(s1, s2) <= 2.0

    ratios, mc_ok, mc_notes = [], True, []
    for g in range(4, 11):
        mu = CantorSpec(0.5, g).build()
        ball = find_thin_ball(mu, [0.5], 0.5).ball
        ratios.append(main_lemma_ratio(mu, spec, ball).ratio)
        if mu.size <= 500:
            exact = total_energy(mu, spec).value
            mc = total_energy(mu, spec, "montecarlo", samples=1_000_000, seed=g)
            z = abs(mc.value - exact) / mc.stderr
            mc_ok &= z <= 4.0
            mc_notes.append(f"{z:.2f}")
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    elapsed = time.perf_counter() - t0
    ok = slope_ok and increasing and mc_ok and elapsed <= 300
    check(6, "blow-up mechanism", ok,
          f"window slopes {s1:.3f}/{s2:.3f}; ratios gen 4-10 "
          + ",".join(f"{r:.3f}" for r in ratios)
          + f"; MC |z| {','.join(mc_notes)} (<= 4); {elapsed:.1f}s")


def test_criterion_7_operator_norm():
    two = DiscreteMeasure([[0.0], [1.0]], [0.5, 0.5])
    errs = [abs(operator_norm(two, KernelSpec(s), 0.5) - 0.5) for s in S_VALUES]
    rng = np.random.default_rng(7)
    worst = 0.0
    for k in range(10):
        d = 1 + k % 3
        spec = KernelSpec(S_VALUES[k % 3])
        mu = random_measure(rng, int(rng.integers(10, 201)), d)
        eps = safe_eps(mu, 0.005, 0.2, rng)
        dense = np.linalg.norm(dense_operator(mu, spec, eps), 2)
        worst = max(worst, abs(operator_norm(mu, spec, eps) - dense) / dense)
    check(7, "operator norm oracles", max(errs) <= 1e-6 and worst <= 1e-2,
          f"two-atom error {max(errs):.1e} (<= 1e-6); dense relative error {worst:.1e} (<= 1e-2)")


def test_criterion_8_treecode():
    full = CantorSpec(0.5, 13).build()
    pick = np.sort(np.random.default_rng(0).choice(full.size, 5000, replace=False))
    mu = DiscreteMeasure(full.points[pick], full.weights[pick])
    spec = KernelSpec(0.5)
    eps = mu.resolution / 2
    naive = transform_field(mu, spec, eps)
    thetas = (0.6, 0.3, 0.1, 0.03)
    devs = [contract_deviation(mu, spec, naive, tree_transform_field(mu, spec, eps, th))
            for th in thetas]
    approx = tree_transform_field(mu, spec, eps, 0.3)
    global_rel = float(np.abs(approx - naive).max() / np.abs(naive).max())
    exact = np.array_equal(tree_transform_field(mu, spec, eps, 0.0), naive)
    at03 = devs[thetas.index(0.3)]
    decreasing = all(b < a for a, b in zip(devs, devs[1:]))
    check(8, "treecode contract", at03 <= 1e-2 and decreasing and exact,
          "deviation by theta " + ", ".join(f"{t}:{v:.1e}" for t, v in zip(thetas, devs))
          + f"; global relative at 0.3: {global_rel:.1e}; full opening identical: {exact}")


def _strip_timing(rep):
    rep["results"].pop("timing", None)
    return rep


def test_criterion_9_determinism(tmp_path):
    cantor = tmp_path / "c.csv"
    cloud = tmp_path / "r.json"
    psi = tmp_path / "psi.json"
    psi.write_text(json.dumps([{"center": [0.2], "radius": 0.3, "coefficient": 1.0}]))
    gens = [
        ["gen", "cantor", "--s", "0.5", "--generations", "8", "--out", str(cantor)],
        ["gen", "random", "--N", "80", "--dim", "2", "--seed", "4", "--out", str(cloud)],
    ]
    files = []
    for argv in gens:
        assert run(argv) == 0
        first = open(argv[-1], "rb").read()
        assert run(argv) == 0
        files.append(first == open(argv[-1], "rb").read())
    c = ["--in", str(cantor), "--s", "0.5"]
    commands = [
        ["transform", *c, "--eps", "1e-5"],
        ["transform", *c, "--eps", "1e-5", "--theta-mac", "0.3"],
        ["energy", *c],
        ["energy", *c, "--mode", "montecarlo", "--mc-samples", "200000", "--seed", "9"],
        ["identity-check", "--in", str(cloud), "--s", "0.5", "--eps", "1e-4", "--seed", "3"],
        ["pairing", *c, "--eps", "1e-5", "--psi", str(psi)],
        ["defect", *c, "--eps", "1e-5", "--ball", "0.05,0.1"],
        ["derivative", *c, "--eps", "1e-5", "--ball", "0.05,0.1", "--delta", "0.0,0.03"],
        ["blowup", *c, "--scales", "5", "--step", "2"],
        ["falsify", *c, "--x-samples", "16", "--seed", "1"],
        ["bench", *c, "--eps", "1e-5"],
    ]
    same = []
    for argv in commands:
        reports = []
        for threads in ("1", "4", "1"):
            out = tmp_path / "o.json"
            assert run([*argv, "--threads", threads, "--out", str(out)]) == 0
            reports.append(_strip_timing(json.loads(out.read_text())))
        same.append(reports[0] == reports[1] == reports[2])
    ok = all(files) and all(same)
    check(9, "CLI determinism", ok,
          f"{sum(same)}/{len(same)} commands identical across runs and thread counts; "
          f"generated files identical: {all(files)}")
