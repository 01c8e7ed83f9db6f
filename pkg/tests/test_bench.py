import numpy as np
import pytest

from quantbo.bench import (
    ProfileTable,
    RegretTrace,
    build_profiles,
    penalized_value,
    perf_test,
    regret_trace,
)
from quantbo.loop import CuqbConfig, IterationRecord, RunRecord, run
from quantbo.optimizer import MultiStartConfig
from quantbo.acquisition import QuantileConfig
from quantbo.problems import registry_get


def test_penalized_value_feasible_equals_objective():
    p = registry_get("rosen-suzuki")
    x = np.array([0.0, 1.0, 2.0, -1.0])
    assert penalized_value(p, x, 1e5) == pytest.approx(44.0, abs=1e-10)


def test_penalized_value_ignores_rho_without_constraints():
    p = registry_get("booth")
    x = np.array([0.3, -1.2])
    assert penalized_value(p, x, 1.0) == penalized_value(p, x, 1e9)


def test_penalized_value_bazaraa_global_max():
    # the recorded optimizer is rounded to 3 decimals and sits ~6e-4
    # outside the feasible set, so a large rho would swamp the value
    p = registry_get("bazaraa")
    assert penalized_value(p, p.x_star, 1.0) == pytest.approx(6.613, abs=1e-2)


def test_penalized_value_charges_violations():
    p = registry_get("bazaraa")
    x = np.array(p.box[:, 1])  # corner, generically infeasible
    vals = p.evaluate(x)
    hinge = np.sum(np.maximum(-vals[1:], 0))
    assert hinge > 0
    assert penalized_value(p, x, 10.0) == pytest.approx(vals[0] - 10.0 * hinge)


def test_perf_test_boundaries():
    assert perf_test(10.0, 0.0, 10.0, 0.0)
    assert perf_test(10.0, 0.0, 10.0, 1.0)
    assert perf_test(0.0, 0.0, 10.0, 1.0)
    assert not perf_test(-0.1, 0.0, 10.0, 1.0)
    assert not perf_test(9.89, 0.0, 10.0, 0.01)
    assert perf_test(9.91, 0.0, 10.0, 0.01)


# -- regret traces ---------------------------------------------------------


def _fast_cfg(**kw):
    defaults = dict(
        quantile=QuantileConfig(mc_samples=16),
        multistart=MultiStartConfig(n_raw=256, n_starts=2, max_local_iters=40),
        init_budget=4,
        total_budget=8,
        fit_restarts=2,
        refit_restarts=1,
    )
    defaults.update(kw)
    return CuqbConfig(**defaults)


def test_regret_trace_from_run():
    rec = run(registry_get("booth"), _fast_cfg(), solver="random")
    tr = regret_trace(rec, rho=1e5)
    assert len(tr.simple_regret) == 8
    assert np.all(np.diff(tr.simple_regret) <= 1e-12)
    assert np.all(tr.simple_regret >= -1e-9)
    assert np.all(tr.penalized_regret >= -1e-9)
    assert np.all(tr.rec_penalized_regret >= -1e-9)


def test_regret_trace_requires_optimum():
    rec = run(registry_get("williams-otto"), _fast_cfg(), solver="random")
    with pytest.raises(ValueError, match="optimum"):
        regret_trace(rec, rho=1e5)
    tr = regret_trace(rec, rho=1e5, optimum=4314.15)
    assert np.all(np.diff(tr.simple_regret) <= 1e-12)


def test_regret_trace_rejects_increasing_series():
    with pytest.raises(ValueError, match="non-increasing"):
        RegretTrace(
            problem="x",
            solver="s",
            seed=0,
            simple_regret=np.array([1.0, 2.0]),
            penalized_regret=np.zeros(2),
            rec_penalized_regret=np.zeros(2),
        )


# -- profiles --------------------------------------------------------------

X_OPT = (1.0, 3.0)  # booth penalized value 0
X_MID = (1.0, 2.0)  # booth penalized value -5
X_BAD = (0.0, 0.0)  # booth penalized value -74


def _fake_record(solver, seed, recs):
    queried = [X_BAD, X_MID, X_MID, recs[-1]]
    its = tuple(
        IterationRecord(
            t=i + 1,
            x=queried[i],
            y=(0.0,),
            acq_value=None if i < 2 else 0.5,
            infeasible_flag=False,
            rec_index=1,
            rec_x=recs[i],
        )
        for i in range(4)
    )
    return RunRecord(
        problem="booth",
        solver=solver,
        seed=seed,
        status="completed",
        config_hash="h",
        iterations=its,
    )


def _fixture_records():
    a_recs = (X_BAD, X_MID, X_MID, X_OPT)
    b_recs = (X_BAD, X_MID, X_MID, X_MID)
    return [
        _fake_record("alpha", 0, a_recs),
        _fake_record("alpha", 1, a_recs),
        _fake_record("beta", 0, b_recs),
        _fake_record("beta", 1, b_recs),
    ]


def test_build_profiles_hand_fixture():
    table = build_profiles(_fixture_records(), tau=0.1, init_budget=2)
    # start value -5; best end value 0; pass needs value >= -0.5
    assert table.pi[("booth", "alpha")] == 4
    assert np.isinf(table.pi[("booth", "beta")])
    assert np.array_equal(table.rho["alpha"], [0.0, 0.0, 0.0, 1.0])
    assert np.array_equal(table.rho["beta"], [0.0, 0.0, 0.0, 0.0])
    assert table.budgets[-1] == 4


def test_build_profiles_tau_one_passes_on_any_improvement():
    table = build_profiles(_fixture_records(), tau=1.0, init_budget=2)
    # tau = 1 only requires matching the starting value
    assert table.pi[("booth", "alpha")] == 2
    assert table.pi[("booth", "beta")] == 2


def test_build_profiles_rejects_mismatched_seeds():
    records = _fixture_records()[:3]  # beta lacks seed 1
    with pytest.raises(ValueError, match="mismatched seed"):
        build_profiles(records, tau=0.1, init_budget=2)


def test_build_profiles_rejects_missing_solver_cell():
    records = _fixture_records()
    records.append(
        RunRecord(
            problem="bazaraa",
            solver="alpha",
            seed=0,
            status="completed",
            config_hash="h",
            iterations=_fixture_records()[0].iterations,
        )
    )
    with pytest.raises(ValueError, match="missing solvers"):
        build_profiles(records, tau=0.1, init_budget=2)


def test_build_profiles_rejects_empty():
    with pytest.raises(ValueError, match="no records"):
        build_profiles([], tau=0.1)


def test_profile_table_validates_curves():
    with pytest.raises(ValueError, match="non-decreasing"):
        ProfileTable(
            solvers=("a",),
            problems=("p",),
            tau=0.1,
            budgets=np.array([1, 2]),
            pi={("p", "a"): 1.0},
            rho={"a": np.array([1.0, 0.0])},
        )


def test_profile_csv_layout():
    table = build_profiles(_fixture_records(), tau=0.1, init_budget=2)
    text = table.to_csv()
    lines = text.strip().splitlines()
    assert lines[0] == "solver,problem,tau,pi,rho_t1,rho_t2,rho_t3,rho_t4"
    assert "alpha,booth,0.1,4,0,0,0,1" in lines
    assert "beta,booth,0.1,inf,0,0,0,0" in lines


def test_profiles_from_real_runs_monotone():
    p = registry_get("booth")
    records = [
        run(p, _fast_cfg(seed=s), solver=w)
        for w in ("cuqb", "random")
        for s in (0, 1)
    ]
    table = build_profiles(records, tau=0.5, init_budget=4)
    for w in ("cuqb", "random"):
        curve = table.rho[w]
        assert np.all(np.diff(curve) >= 0)
        assert np.all((curve >= 0) & (curve <= 1))
