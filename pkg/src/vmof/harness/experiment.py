"""Plan files, trial records and the multi-run experiment driver.

A plan is a TOML file::

    algorithms = ["vmof", "nsga2", "random_search"]
    problems = ["sp1:d=100", "sp2:d=100"]
    seeds = 10                  # or an explicit list
    budget_per_dim = 100        # E = min(budget_per_dim * d, budget_cap)
    budget_cap = 100000         # or a fixed total_budget = ...
    phase_fraction = 0.05       # any VmofConfig field
    [sampling]                  # and [finetune], [pso], [variation]
    reward_mode = "front"

``vmof-nods`` and ``vmof-nodf`` name the two ablations (random
recommendation, fine-tuning pass-through).
"""

from __future__ import annotations

import csv
import dataclasses
import math
import os
import re
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from vmof.benchmarks import hv_reference_point, hypervolume, igd, load_external_problem, sample_reference_front, save_front_csv
from vmof.core import Problem
from vmof.errors import ConfigInvalid, VmofError
from vmof.finetuning import FinetuneConfig
from vmof.framework import VmofConfig, default_population_size, vmof_run
from vmof.harness.baselines import nsga2_run, random_search
from vmof.optimizer import PsoParams, VariationParams
from vmof.sampling import SamplingConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

RESULT_COLUMNS = ["algorithm", "problem", "d", "m", "N", "E", "seed", "igd", "hv", "wall_time_s", "error"]
HISTORY_COLUMNS = ["algorithm", "problem", "seed", "iteration", "phase", "consumed", "igd", "hv"]
ALGORITHMS = ("vmof", "vmof-nods", "vmof-nodf", "nsga2", "random_search")
_SUBCONFIGS = {"sampling": SamplingConfig, "finetune": FinetuneConfig, "pso": PsoParams, "variation": VariationParams}
_PLAN_KEYS = {"algorithms", "problems", "seeds", "total_budget", "budget_per_dim", "budget_cap", "checkpoints"}


@dataclass
class TrialRecord:
    algorithm: str
    problem: str
    d: int
    m: int
    N: int
    E: int
    seed: int
    igd: float = math.nan
    hv: float = math.nan
    wall_time_s: float = math.nan
    error: str = ""
    history: list = field(default_factory=list, repr=False, compare=False)
    front: np.ndarray | None = field(default=None, repr=False, compare=False)

    @property
    def ok(self) -> bool:
        return not self.error


@dataclass
class Plan:
    algorithms: list[str]
    problems: list[str]
    seeds: list[int]
    total_budget: int | None = None
    budget_per_dim: int | None = None
    budget_cap: int | None = None
    checkpoints: int = 20
    vmof: dict = field(default_factory=dict)

    def budget_for(self, d: int) -> int:
        if self.total_budget is not None:
            return int(self.total_budget)
        E = int(self.budget_per_dim or 100) * d
        return min(E, int(self.budget_cap)) if self.budget_cap else E

    def cells(self) -> list[tuple[str, str, int]]:
        return [(a, p, s) for p in self.problems for a in self.algorithms for s in self.seeds]


def plan_from_dict(raw: dict) -> Plan:
    raw = dict(raw)
    for key in ("algorithms", "problems", "seeds"):
        if key not in raw:
            raise ConfigInvalid(f"plan is missing {key!r}")
    seeds = raw.pop("seeds")
    seeds = list(range(seeds)) if isinstance(seeds, int) else [int(s) for s in seeds]
    algorithms = list(raw.pop("algorithms"))
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ConfigInvalid(f"unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
    plan_kw = {k: raw.pop(k) for k in list(raw) if k in _PLAN_KEYS}
    allowed = {f.name for f in dataclasses.fields(VmofConfig)} - {"seed", "total_budget"}
    bad = set(raw) - allowed
    if bad:
        raise ConfigInvalid(f"unknown plan keys {sorted(bad)}")
    return Plan(algorithms, list(plan_kw.pop("problems")), seeds, vmof=raw, **plan_kw)


def load_plan(path) -> Plan:
    with open(path, "rb") as fh:
        return plan_from_dict(tomllib.load(fh))


def build_vmof_config(problem: Problem, plan: Plan, E: int, seed: int, algorithm: str = "vmof") -> VmofConfig:
    kw = {}
    for key, value in plan.vmof.items():
        if key in _SUBCONFIGS:
            try:
                kw[key] = _SUBCONFIGS[key](**value)
            except TypeError as exc:
                raise ConfigInvalid(f"[{key}]: {exc}") from None
        else:
            kw[key] = value
    if algorithm == "vmof-nods":
        kw["sampling"] = dataclasses.replace(kw.get("sampling", SamplingConfig()), reward_mode="none")
    elif algorithm == "vmof-nodf":
        kw["finetune"] = dataclasses.replace(kw.get("finetune", FinetuneConfig()), enabled=False)
    return VmofConfig.for_problem(problem, total_budget=E, seed=seed, **kw)


def run_cell(plan: Plan, algorithm: str, descriptor: str, seed: int) -> TrialRecord:
    """One independent (algorithm, problem, seed) trial; errors become an error mark."""
    rec = TrialRecord(algorithm, descriptor, 0, 0, 0, 0, seed)
    t0 = time.perf_counter()
    try:
        problem = load_external_problem(descriptor)
        rec.d, rec.m = problem.dim, problem.n_obj
        rec.E = plan.budget_for(problem.dim)
        every = max(1, rec.E // plan.checkpoints) if plan.checkpoints else None
        if algorithm.startswith("vmof"):
            cfg = build_vmof_config(problem, plan, rec.E, seed, algorithm)
            rec.N = cfg.population_size
            res = vmof_run(problem, cfg)
            F = res.population.F
            rec.history = [(h.iteration, h.phase, h.consumed, h.igd, h.hv) for h in res.history]
        else:
            rec.N = int(plan.vmof.get("population_size", default_population_size(problem.n_obj)))
            if algorithm == "nsga2":
                variation = VariationParams(**plan.vmof.get("variation", {}))
                res = nsga2_run(problem, rec.N, rec.E, seed, variation, checkpoint_every=every)
            else:
                res = random_search(problem, rec.E, seed, checkpoint_every=every)
            F = res.F
            rec.history = [(i + 1, "checkpoint", c, g, h) for i, (c, g, h) in enumerate(res.checkpoints)]
        rec.front = F
        if problem.pf_sampler is not None:
            rec.igd = igd(sample_reference_front(problem), F)
            rec.hv = hypervolume(F, hv_reference_point(problem))
    except (VmofError, ValueError, TypeError) as exc:
        rec.error = f"{type(exc).__name__}: {exc}"
    rec.wall_time_s = time.perf_counter() - t0
    return rec


# ---------------------------------------------------------------- CSV


def _fmt(value) -> str:
    if isinstance(value, float):
        return "nan" if math.isnan(value) else format(value, ".17g")
    return str(value)


def _row(rec: TrialRecord) -> list[str]:
    return [_fmt(getattr(rec, c)) for c in RESULT_COLUMNS]


def write_results(path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        w.writerows(_row(r) for r in records)


def read_results(path) -> list[TrialRecord]:
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            out.append(
                TrialRecord(
                    row["algorithm"],
                    row["problem"],
                    int(row["d"]),
                    int(row["m"]),
                    int(row["N"]),
                    int(row["E"]),
                    int(row["seed"]),
                    float(row["igd"]),
                    float(row["hv"]),
                    float(row["wall_time_s"]),
                    row.get("error") or "",
                )
            )
    return out


def write_history(path, records: list[TrialRecord]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(HISTORY_COLUMNS)
        for r in records:
            for it, phase, consumed, g, h in r.history:
                w.writerow([r.algorithm, r.problem, r.seed, it, phase, consumed, _fmt(float(g)), _fmt(float(h))])


def front_filename(rec: TrialRecord) -> str:
    safe = re.sub(r"[^A-Za-z0-9.=-]+", "_", rec.problem)
    return f"{rec.algorithm}__{safe}__seed{rec.seed}.csv"


def write_front(directory: Path, rec: TrialRecord) -> None:
    if rec.front is None:
        return
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / front_filename(rec)
    save_front_csv(path, rec.front)
    # metadata goes first so readers can group without parsing the name
    text = path.read_text()
    path.write_text(f"# algorithm={rec.algorithm}\n# problem={rec.problem}\n# seed={rec.seed}\n{text}")


def run_experiment(
    plan: Plan,
    out: str | os.PathLike | None = None,
    workers: int = 1,
    progress=None,
) -> list[TrialRecord]:
    """Run every cell of ``plan``; returns records in plan order.

    With ``out`` set, each finished cell is appended to the results CSV at
    once, and the file is rewritten in plan order when all cells are done.
    A ``<stem>.history.csv`` file and a ``fronts/`` directory go next to it.
    """
    cells = plan.cells()
    done: dict[int, TrialRecord] = {}
    fh = writer = None
    fronts_dir = None
    if out is not None:
        out = Path(out)
        out.parent.mkdir(parents=True, exist_ok=True)
        fronts_dir = out.parent / "fronts"
        fh = open(out, "w", newline="")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RESULT_COLUMNS)
        fh.flush()

    def finish(i: int, rec: TrialRecord) -> None:
        done[i] = rec
        if writer is not None:
            writer.writerow(_row(rec))
            fh.flush()
            write_front(fronts_dir, rec)
        if progress is not None:
            progress(rec)

    try:
        if workers <= 1:
            for i, cell in enumerate(cells):
                finish(i, run_cell(plan, *cell))
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = {pool.submit(run_cell, plan, *cell): i for i, cell in enumerate(cells)}
                for fut in as_completed(futures):
                    finish(futures[fut], fut.result())
    finally:
        if fh is not None:
            fh.close()
    records = [done[i] for i in sorted(done)]
    if out is not None and len(done) == len(cells):
        write_results(out, records)
        write_history(out.with_suffix(".history.csv"), records)
    return records
