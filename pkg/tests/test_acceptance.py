"""Acceptance criteria, one test each; every test prints a PASS/FAIL line."""

import math
import os
import subprocess
import sys
import time

import numpy as np
import pytest

from infbeltrami import (Disk, DiskGrid, PerturbationOracle, RationalPhase, ZeroOracle,
                         cauchy_integral_direct, construct_trivial, ess_sup, evaluate,
                         greedy_run, localize, norm_lower_bound, pairing_monomials,
                         verify_class_equality)
from infbeltrami.fields import adapted_grid
from infbeltrami.geometry import Annulus
from infbeltrami.grid import NodeSet
from infbeltrami.serialize import write_json
from infbeltrami.trivial import beta_eval, random_poly

from conftest import const, zbar

GRID = DiskGrid(n_rad=64, n_ang=256)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}")
        assert ok, detail
    return emit


def test_1_triviality_oracle(report):
    t0 = time.perf_counter()
    ext = construct_trivial(zbar(), 0.5, 8, GRID)
    dt = time.perf_counter() - t0
    p = pairing_monomials(ext.field, 8, GRID).max_abs
    c1 = ext.moments.values[1]
    ok = p <= 1e-10 and abs(c1 - math.pi / 32) < 1e-12 and dt < 1.0
    report(1, ok, f"max pairing {p:.2e}, c1 {c1.real:.10f}, {dt:.2f}s")


def test_2_constant_closed_form(report):
    ext = construct_trivial(const(1.0), 0.5, 8, GRID)
    vals = evaluate(ext.beta, GRID.on(ext.annulus).nodes)
    dev = float(np.max(np.abs(vals + 1 / 3)))
    sup = float(np.max(np.abs(vals)))
    bound = 3 * 1.0 * 0.5 / 0.75
    report(2, dev <= 1e-12 and sup <= bound,
           f"beta = -1/3 within {dev:.1e}; sup {sup:.6f} <= {bound}")


def test_3_randomized_bound_suite(report):
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    fields = [random_poly(rng, degree=4) for _ in range(20)]
    passed, worst = 0, -math.inf
    for nu in fields:
        for r in (0.1, 0.3, 0.5):
            ext = construct_trivial(nu, r, 8, GRID)
            nu_sup = ess_sup(nu, GRID.on(ext.inner_disk))
            beta_sup = ess_sup(ext.beta, GRID.on(ext.annulus))
            bound = 3 * nu_sup * r / (1 - r * r)
            worst = max(worst, beta_sup - bound)
            passed += beta_sup <= bound + 1e-9
    dt = time.perf_counter() - t0
    report(3, passed == 60 and dt < 10.0,
           f"{passed}/60 within bound (worst excess {worst:.3e}), {dt:.2f}s")


def test_4_localization_contract(report):
    mu, alpha = const(0.3), const(0.0)
    loc = localize(mu, alpha, 0.0, 0.1, 8, GRID)
    inner_zero = bool(np.all(evaluate(loc.field, GRID.on(loc.inner).nodes) == 0))
    outside = GRID.on(Annulus(0j, loc.inner.radius, 1.0))
    ring = GRID.on(Annulus(0j, loc.inner.radius, loc.host.radius))
    sup_out = max(ess_sup(loc.field, outside), ess_sup(loc.field, ring))
    pair = verify_class_equality(loc.field, mu, 8, GRID, 1e-8).report.max_abs
    ok = inner_zero and sup_out <= 0.4 + 1e-9 and pair <= 1e-8
    report(4, ok, f"zero on inner disk {inner_zero}, sup outside {sup_out:.6f}, "
                  f"pairing {pair:.1e}")


@pytest.mark.parametrize("case", ["constant", "phase"])
def test_5_norm_estimator(report, case):
    if case == "constant":
        mu, idx = const(0.3), 0
    else:
        mu, idx = RationalPhase(Disk.unit(), 0.3, 1), 2
    t0 = time.perf_counter()
    est = norm_lower_bound(mu, 4, GRID)
    dt = time.perf_counter() - t0
    phi = np.abs(np.array(est.phi))
    leak = float(np.delete(phi, idx).max() / phi[idx])
    ok = abs(est.value - 0.3) <= 1e-3 and leak <= 1e-2 and dt < 5.0
    report(5, ok, f"{case}: value {est.value:.6f}, off-direction weight {leak:.1e}, {dt:.2f}s")


def test_6_greedy_simulation(report):
    chi0 = construct_trivial(zbar(), 0.5, 8, GRID).field
    t0 = time.perf_counter()
    run = greedy_run(chi0, ZeroOracle(), 5, 8, GRID)
    dt = time.perf_counter() - t0
    disks = [r.disk for r in run]
    disjoint = all(a.disjoint(b) for i, a in enumerate(disks) for b in disks[i + 1:])
    pair = max((r.pairing.max_abs for r in run), default=math.inf)
    sups = [run.initial_ess_sup] + [r.ess_sup for r in run]
    monotone = all(b <= a for a, b in zip(sups, sups[1:]))
    chis = [chi0] + run.fields
    pointwise = True
    for a, b in zip(chis, chis[1:]):
        nodes = NodeSet.union(adapted_grid(b, GRID), adapted_grid(a, GRID)).nodes
        pointwise &= bool(np.all(np.abs(evaluate(b, nodes)) <= np.abs(evaluate(a, nodes))
                                 + 1e-12))
    ok = len(run) == 5 and disjoint and pair <= 1e-8 and monotone and pointwise and dt < 30
    report(6, ok, f"{len(run)} steps, disjoint {disjoint}, max pairing {pair:.1e}, "
                  f"sup {sups[0]:.4f} -> {sups[-1]:.4f}, pointwise {pointwise}, {dt:.1f}s")


def test_7_negative_control(report):
    c = const(0.3)
    steps = {}
    for name, oracle in (("zero", ZeroOracle()), ("perturb", PerturbationOracle())):
        steps[name] = len(greedy_run(c, oracle, 5, 8, GRID))
    report(7, all(v == 0 for v in steps.values()), f"steps per strategy {steps}")


def test_8_series_direct_agreement(report):
    rng = np.random.default_rng(8)
    r = 0.5
    worst = 0.0
    count = 0
    for _ in range(10):
        ext = construct_trivial(random_poly(rng, degree=4), r, 8, GRID)
        s = ext.sign
        for _ in range(10):
            rad = rng.uniform(1.2 * r, 0.99)
            z = rad * np.exp(2j * np.pi * rng.uniform())
            direct = cauchy_integral_direct(ext.inner, r, z, tol=1e-9)
            want = s * (-z) * direct / (math.pi * (1 - r * r))
            worst = max(worst, abs(beta_eval(ext, z) - want))
            count += 1
    report(8, count == 100 and worst <= 1e-6, f"{count} points, max |series - direct| {worst:.2e}")


def _cli(args, threads, cwd):
    env = dict(os.environ, BELTRAMI_THREADS=str(threads))
    subprocess.run([sys.executable, "-m", "infbeltrami", *args], cwd=cwd, env=env, check=True,
                   capture_output=True)


def test_9_determinism(report, tmp_path):
    src = tmp_path / "zbar.json"
    write_json(src, zbar().to_doc())
    runs = [
        ["construct-trivial", "--input", str(src), "--radius", "0.5", "--out", "t.json"],
        ["norm-bound", "--input", str(src), "--degree", "3", "--restarts", "4",
         "--out", "n.json"],
        ["greedy", "--chi", "t.json", "--max-steps", "2", "--n-rad", "32", "--n-ang", "128",
         "--render-dir", "img", "--res", "32", "--out", "g.json"],
        ["render", "--input", "t.json", "--out", "t.ppm", "--res", "64", "--report", "r.json"],
    ]
    blobs = []
    for i, threads in enumerate((1, 4, 4)):
        d = tmp_path / f"run{i}"
        d.mkdir()
        for args in runs:
            _cli(args, threads, d)
        files = sorted(p for p in d.rglob("*") if p.is_file())
        blobs.append({str(p.relative_to(d)): p.read_bytes() for p in files})
    same = blobs[0] == blobs[1] == blobs[2]
    report(9, same and len(blobs[0]) >= 6,
           f"{len(blobs[0])} artifacts byte-identical across runs and BELTRAMI_THREADS=1/4: {same}")
