import numpy as np
import pytest

from vmof.benchmarks import igd, make_sp1, make_sp2, sample_reference_front
from vmof.core import EvalBudget
from vmof.errors import ConfigInvalid
from vmof.finetuning import FinetuneConfig
from vmof.framework import ObjectiveTrace, VmofConfig, default_n_d, vmof_run
from vmof.sampling import SamplingConfig


def test_defaults():
    assert VmofConfig.for_problem(make_sp1(5)).population_size == 100
    assert VmofConfig.for_problem(make_sp1(5)).n_d == 25
    cfg = VmofConfig.for_problem(make_sp2(5))
    assert cfg.population_size == 105 and cfg.n_d == 21
    assert default_n_d(7) == 1
    assert VmofConfig().phase_budget == 5000


@pytest.mark.parametrize(
    "kw",
    [
        dict(population_size=10, n_d=3),
        dict(phase_fraction=0.5),
        dict(total_budget=50),
        dict(total_budget=1000, phase_fraction=0.05),
        dict(init_direction_scale=-1),
        dict(sampling=SamplingConfig(reward_mode="bogus")),
    ],
)
def test_invalid_configs(kw):
    base = dict(population_size=100, total_budget=100_000)
    with pytest.raises(ConfigInvalid):
        VmofConfig(**{**base, **kw}).validate()


def test_budget_covers_only_initialisation():
    p = make_sp1(20)
    res = vmof_run(p, VmofConfig(population_size=20, total_budget=20, seed=1))
    assert res.iterations == 0 and res.history == [] and res.evaluations == 20
    assert len(res.population) == 20 and res.population.evaluated


def small(seed=0, **kw):
    return VmofConfig(population_size=20, n_d=5, total_budget=3000, phase_fraction=0.05, seed=seed, **kw)


def test_run_is_deterministic_and_respects_budget():
    p = make_sp1(50)
    a = vmof_run(p, small(4))
    b = vmof_run(p, small(4))
    np.testing.assert_array_equal(a.population.X, b.population.X)
    assert [(h.phase, h.consumed, h.igd) for h in a.history] == [(h.phase, h.consumed, h.igd) for h in b.history]
    assert a.evaluations == 3000
    assert len(a.population) == 20
    np.testing.assert_array_equal(p.evaluate_batch(a.population.X), a.population.F)
    consumed = [h.consumed for h in a.history]
    assert consumed == sorted(consumed) and consumed[-1] == 3000
    assert [h.phase for h in a.history[:3]] == ["sampling", "finetuning", "optimizer"]


def test_run_improves_on_random_start():
    p = make_sp1(50)
    res = vmof_run(p, small(0, init_direction_scale=0.1))
    front = sample_reference_front(p)
    start = vmof_run(p, VmofConfig(population_size=20, n_d=5, total_budget=20, seed=0))
    assert igd(front, res.population.F) < igd(front, start.population.F)


def test_archive_history_is_nonincreasing():
    res = vmof_run(make_sp1(30), small(2))
    g = [h.igd for h in res.history]
    assert all(b <= a for a, b in zip(g, g[1:]))


@pytest.mark.parametrize("kw", [dict(sampling=SamplingConfig(reward_mode="none")), dict(finetune=FinetuneConfig(enabled=False))])
def test_ablations_run(kw):
    res = vmof_run(make_sp1(30), small(1, **kw))
    assert res.evaluations == 3000 and len(res.population) == 20


def test_three_objectives():
    res = vmof_run(make_sp2(20), VmofConfig(population_size=21, n_d=7, total_budget=2000, phase_fraction=0.1, seed=0))
    assert res.population.F.shape == (21, 3)


def test_checkpoints():
    res = vmof_run(make_sp1(30), small(0), checkpoint_every=500)
    assert [c[0] for c in res.checkpoints] == [500, 1000, 1500, 2000, 2500, 3000]


def test_trace_keeps_nondominated_archive():
    tr = ObjectiveTrace()
    tr.add(np.array([(1.0, 1.0), (2.0, 2.0)]))
    tr.add(np.array([(0.5, 3.0), (1.0, 1.0), (3.0, 0.5)]))
    tr.add(np.array([(0.9, 0.9)]))
    assert sorted(map(tuple, tr.F.tolist())) == [(0.5, 3.0), (0.9, 0.9), (3.0, 0.5)]
    assert np.isnan(tr.metrics()[0])
    b = EvalBudget(10)
    b.subscribe(tr)
