"""End-to-end exit criteria. Each test prints one PASS/FAIL line and then asserts it.

Run only these with ``pytest -m acceptance``; skip them with ``-m "not acceptance"``.
The d=10,000 runs are shared between criteria 5 and 9 and take most of the time.
"""

import json
import os
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from oracles import crowding
from vmof import kernels
from vmof.benchmarks import hv_reference_point, hypervolume, hypervolume_mc, igd, make_sp1, sample_reference_front
from vmof.core import Population
from vmof.dominance import environmental_select, fast_nondominated_sort
from vmof.framework import vmof_run
from vmof.harness.baselines import nsga2_run
from vmof.harness.experiment import build_vmof_config, load_plan, plan_from_dict, run_experiment
from vmof.harness.report import compare_table
from vmof.harness.scaling import DEFAULT_DIMS, bench_scaling, loglog_slope
from vmof.sampling import thompson_bandit

pytestmark = pytest.mark.acceptance

ROOT = Path(__file__).resolve().parents[1]
WORKERS = min(4, os.cpu_count() or 1)


# ---------------------------------------------------------------- 1


def _oracle_ranks(F: np.ndarray) -> np.ndarray:
    """Peel layers using a dominance table built one row at a time."""
    n = len(F)
    D = np.zeros((n, n), dtype=bool)  # D[i, j]: i dominates j
    for i in range(n):
        D[i] = np.all(F[i] <= F, axis=1) & np.any(F[i] < F, axis=1)
    rank = np.full(n, -1)
    alive = np.ones(n, dtype=bool)
    r = 0
    while alive.any():
        layer = alive & ~D[alive].any(axis=0)
        rank[layer] = r
        alive &= ~layer
        r += 1
    return rank


def _oracle_select(F: np.ndarray, rank: np.ndarray, n: int) -> list[int]:
    chosen: list[int] = []
    for r in range(rank.max() + 1):
        front = np.flatnonzero(rank == r).tolist()
        if len(chosen) + len(front) <= n:
            chosen += front
            if len(chosen) == n:
                break
            continue
        cd = crowding(F[front].tolist())
        order = sorted(range(len(front)), key=lambda t: (-cd[t], front[t]))
        chosen += [front[t] for t in order[: n - len(chosen)]]
        break
    return sorted(chosen)


def test_criterion_1_dominance_oracle(verdict):
    rng = np.random.default_rng(2024)
    mismatches = 0
    package_time = 0.0
    t_all = time.perf_counter()
    for k in range(1000):
        n = int(rng.integers(1, 201))
        m = int(rng.integers(2, 4))
        # every third instance on a coarse grid, so ties and duplicates occur
        F = rng.integers(0, 6, (n, m)).astype(float) if k % 3 == 0 else rng.random((n, m))
        keep = int(rng.integers(1, n + 1))
        t0 = time.perf_counter()
        rank = fast_nondominated_sort(F).rank
        sel = environmental_select(Population(np.zeros((n, 1)), F, np.arange(1, n + 1)), keep)
        package_time += time.perf_counter() - t0
        want = _oracle_ranks(F)
        mismatches += int(not np.array_equal(rank, want))
        mismatches += int((sel.ids - 1).tolist() != _oracle_select(F, want, keep))
    total = time.perf_counter() - t_all
    ok = mismatches == 0 and package_time < 30
    verdict(1, ok, f"{mismatches} mismatches over 1000 instances; package {package_time:.2f}s, with oracles {total:.1f}s")
    assert ok


# ---------------------------------------------------------------- 2

BANDIT_MEANS = 0.05 + 0.1 * np.arange(10)


def test_criterion_2_thompson_sampling(verdict):
    t0 = time.perf_counter()
    best = int(np.argmax(BANDIT_MEANS))
    hits = sum(thompson_bandit(BANDIT_MEANS, 2000, np.random.default_rng(seed))[1] == best for seed in range(100))
    gaps = BANDIT_MEANS.max() - BANDIT_MEANS
    T = 2000
    ratios = []
    for seed in range(50):
        played, _ = thompson_bandit(BANDIT_MEANS, 2 * T, np.random.default_rng(10_000 + seed))
        regret = np.cumsum(gaps[played])
        ratios.append(regret[2 * T - 1] / regret[T - 1])
    ratio = float(np.mean(ratios))
    elapsed = time.perf_counter() - t0
    ok = hits >= 95 and ratio < 1.8 and elapsed < 60
    verdict(2, ok, f"best arm recommended in {hits}/100; mean regret(2T)/regret(T) = {ratio:.3f}; {elapsed:.1f}s")
    assert ok


# ---------------------------------------------------------------- 3


def _random_front(rng, m):
    n = int(rng.integers(2, 31))
    P = rng.random((4 * n, m))
    P = P[kernels.nondominated_mask(P)]
    return P[:n]


def test_criterion_3_metric_identities(verdict):
    rng = np.random.default_rng(7)
    identity = all(igd(F, F) == 0.0 for F in (_random_front(rng, 2), _random_front(rng, 3), np.eye(3)))
    outside = 0
    worst = 0.0
    for k in range(100):
        m = 2 if k < 50 else 3
        P = _random_front(np.random.default_rng(k), m)
        ref = np.full(m, 1.1)
        exact = hypervolume(P, ref)
        est, se = hypervolume_mc(P, ref, 1_000_000, rng=np.random.default_rng(1000 + k))
        z = abs(exact - est) / se if se > 0 else (0.0 if exact == est else np.inf)
        worst = max(worst, z)
        outside += z > 3
    tri = np.array([(0, 1), (0.5, 0.5), (1, 0)], float)
    ex_igd = igd(tri, [(0, 1), (1, 0)])
    ex_hv = hypervolume([(0.25, 0.75), (0.75, 0.25)], (1, 1))
    examples = abs(ex_igd - 0.23570226) <= 1e-8 and abs(ex_hv - 0.3125) <= 1e-12
    ok = identity and outside == 0 and examples
    verdict(
        3,
        ok,
        f"igd(F,F)=0: {identity}; HV outside 3 SE in {outside}/100 sets (max |z| {worst:.2f}); "
        f"IGD example {ex_igd:.10f}, HV example {ex_hv}",
    )
    assert ok


# ---------------------------------------------------------------- 4


def test_criterion_4_comparative_sp1_d1000(verdict, tmp_path):
    plan = plan_from_dict(
        {
            "algorithms": ["vmof", "nsga2", "random_search"],
            "problems": ["sp1:d=1000"],
            "seeds": 10,
            "budget_per_dim": 100,
            "budget_cap": 100_000,
            "population_size": 100,
        }
    )
    t0 = time.perf_counter()
    records = run_experiment(plan, tmp_path / "c4.csv", workers=WORKERS)
    elapsed = time.perf_counter() - t0
    errors = [r.error for r in records if r.error]
    row = compare_table(records, "vmof", "igd")[0]
    ok = not errors and row.marks == {"nsga2": "-", "random_search": "-"}
    med = ", ".join(f"{a} {v:.4g}" for a, v in row.medians.items())
    verdict(
        4,
        ok,
        f"median IGD {med}; marks vs vmof {row.marks}; p {', '.join(f'{a} {p:.2g}' for a, p in row.p_values.items())}; "
        f"{elapsed / 60:.1f} min on {WORKERS} worker(s)",
    )
    assert ok


# ---------------------------------------------------------------- 5 and 9

D_LARGE = 10_000
CHECK_EVERY = 5_000
_cache: dict = {}


def _large_plan():
    return plan_from_dict({"algorithms": ["vmof"], "problems": [f"sp1:d={D_LARGE}"], "seeds": 10, "budget_per_dim": 100, "budget_cap": 100_000})


def _vmof_large(algorithm: str, seed: int):
    key = (algorithm, seed)
    if key not in _cache:
        problem = make_sp1(D_LARGE)
        plan = _large_plan()
        cfg = build_vmof_config(problem, plan, plan.budget_for(D_LARGE), seed, algorithm)
        res = vmof_run(problem, cfg, checkpoint_every=CHECK_EVERY)
        _cache[key] = (igd(sample_reference_front(problem), res.population.F), res)
    return _cache[key]


def test_criterion_5_convergence_profile(verdict):
    problem = make_sp1(D_LARGE)
    E = _large_plan().budget_for(D_LARGE)
    monotone = 0
    vm_curves, ns_curves = [], []
    for seed in range(10):
        _, res = _vmof_large("vmof", seed)
        first_end = max(i for i, h in enumerate(res.history) if h.iteration == 1)
        g = [h.igd for h in res.history[first_end:]]
        monotone += all(b <= a for a, b in zip(g, g[1:]))
        vm_curves.append([c[1] for c in res.checkpoints])
        ns = nsga2_run(problem, 100, E, seed, checkpoint_every=CHECK_EVERY)
        ns_curves.append([c[1] for c in ns.checkpoints])
    vm = np.median(np.asarray(vm_curves), axis=0)
    ns = np.median(np.asarray(ns_curves), axis=0)
    below = int(np.sum(vm < ns))
    ok = monotone >= 8 and below == len(vm)
    verdict(
        5,
        ok,
        f"history nonincreasing after iteration 1 in {monotone}/10 seeds; median VMOF IGD below NSGA-II at "
        f"{below}/{len(vm)} checkpoints (final {vm[-1]:.4g} vs {ns[-1]:.4g})",
    )
    assert ok


def test_criterion_9_ablations(verdict):
    full = [_vmof_large("vmof", s)[0] for s in range(10)]
    nods = [_vmof_large("vmof-nods", s)[0] for s in range(10)]
    nodf = [_vmof_large("vmof-nodf", s)[0] for s in range(10)]
    worse_nods = sum(a > f for a, f in zip(nods, full))
    worse_nodf = sum(a > f for a, f in zip(nodf, full))
    ok = worse_nods >= 7 and worse_nodf >= 7
    verdict(
        9,
        ok,
        f"no-sampling worse than full in {worse_nods}/10 seeds, no-fine-tuning worse in {worse_nodf}/10; "
        f"median IGD full {np.median(full):.4g}, no-sampling {np.median(nods):.4g}, no-fine-tuning {np.median(nodf):.4g}",
    )
    assert ok


# ---------------------------------------------------------------- 6

_C6_SCRIPT = """
import json, resource, sys, time
import numpy as np
from vmof.benchmarks import make_sp1
from vmof.framework import VmofConfig, vmof_run
t0 = time.perf_counter()
p = make_sp1(1_000_000)
init = vmof_run(p, VmofConfig(population_size=20, total_budget=20, seed=0)).population.F
res = vmof_run(p, VmofConfig(population_size=20, total_budget=2000, seed=0))
cut = float(np.median(init[:, 0]))
best = lambda F: float(F[F[:, 0] <= cut, 1].min()) if np.any(F[:, 0] <= cut) else float("inf")
print(json.dumps({
    "seconds": time.perf_counter() - t0,
    "peak_kb": resource.getrusage(resource.RUSAGE_SELF).ru_maxrss,
    "evaluations": res.evaluations,
    "f1_cut": cut,
    "init_best_f2": best(init),
    "final_best_f2": best(res.population.F),
}))
"""


def test_criterion_6_million_dimensions(verdict):
    proc = subprocess.run([sys.executable, "-c", _C6_SCRIPT], capture_output=True, text=True, timeout=3600)
    if proc.returncode != 0:
        verdict(6, False, f"run failed: {proc.stderr.strip().splitlines()[-1:]}")
        pytest.fail(proc.stderr)
    r = json.loads(proc.stdout.strip().splitlines()[-1])
    gb = r["peak_kb"] / 1024**2
    ok = r["seconds"] < 15 * 60 and gb < 8 and r["evaluations"] == 2000 and r["final_best_f2"] < r["init_best_f2"]
    verdict(
        6,
        ok,
        f"{r['seconds']:.0f}s, peak RSS {gb:.2f} GB, best f2 with f1 <= {r['f1_cut']:.3f}: "
        f"{r['init_best_f2']:.4f} initially, {r['final_best_f2']:.4f} at the end",
    )
    assert ok


# ---------------------------------------------------------------- 7


def test_criterion_7_scaling(verdict):
    rows = bench_scaling(DEFAULT_DIMS)
    per_eval = [sec / ev for _, sec, ev in rows]
    slope = loglog_slope([d for d, _, _ in rows], per_eval)
    ok = 0.8 <= slope <= 1.3
    detail = ", ".join(f"d={d}: {s:.3g}s/eval" for (d, _, _), s in zip(rows, per_eval))
    verdict(7, ok, f"log-log slope {slope:.3f} ({detail}; backend {kernels.BACKEND})")
    assert ok


# ---------------------------------------------------------------- 8


def _without_wall_time(path: Path) -> bytes:
    lines = path.read_text().splitlines(keepends=True)
    k = lines[0].rstrip("\n").split(",").index("wall_time_s")
    out = []
    for line in lines:
        cols = line.rstrip("\n").split(",")
        out.append(",".join(cols[:k] + cols[k + 1 :]) + "\n")
    return "".join(out).encode()


def test_criterion_8_determinism(verdict, tmp_path):
    plan = load_plan(ROOT / "plans" / "smoke.toml")
    a, b = tmp_path / "a" / "results.csv", tmp_path / "b" / "results.csv"
    run_experiment(plan, a)
    run_experiment(plan, b, workers=2)
    same = _without_wall_time(a) == _without_wall_time(b)
    hist = a.with_suffix(".history.csv").read_bytes() == b.with_suffix(".history.csv").read_bytes()
    ok = same and hist
    verdict(8, ok, f"results CSV identical modulo wall_time_s: {same}; history CSV identical: {hist} ({len(plan.cells())} cells, serial vs 2 workers)")
    assert ok
