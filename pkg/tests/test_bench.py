import csv
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from max2qubo.bench import (
    CSV_COLUMNS,
    BenchReport,
    Instance,
    TrialRecord,
    estimate_tts,
    read_trials_csv,
    resolve_target,
    run_benchmark,
    run_trials,
    trials_csv_path,
    tts_score,
    write_trials_csv,
)
from max2qubo.formula import Clause, Formula, emit_dimacs, gen_random_2sat
from max2qubo.qubo import reduce_to_qubo
from max2qubo.solvers import SolverConfig, brute_force_solve


def make_trials(hit_times, n, budget=10.0, iid="i", sid="s"):
    recs = [TrialRecord(iid, sid, k, 0.0, True, t, budget, 0.0) for k, t in enumerate(hit_times)]
    recs += [TrialRecord(iid, sid, len(recs) + k, 0.0, False, None, budget, 1.0)
             for k in range(n - len(hit_times))]
    return recs


def bernoulli_trials(p, n, t, seed):
    rng = np.random.default_rng(seed)
    hits = rng.random(n) < p
    times = rng.uniform(0.0, t, n)
    return [TrialRecord("i", "s", k, 0.0, bool(h), float(tt) if h else None, t, 0.0)
            for k, (h, tt) in enumerate(zip(hits, times))]


# --- estimate_tts -------------------------------------------------------------------

def test_all_hits_gives_t():
    est = estimate_tts(make_trials([5.0] * 100, 100), grid=[5.0])
    assert est.tts == 5.0
    assert est.argmin_time == 5.0
    assert est.success_prob == (1.0,)


def test_half_hits():
    est = estimate_tts(make_trials([2.0] * 50, 100), grid=[2.0])
    assert est.tts == pytest.approx(13.2877, abs=1e-4)


def test_sixty_three_percent():
    est = estimate_tts(make_trials([1.0] * 63, 100), grid=[1.0])
    assert est.tts == pytest.approx(4.6318, abs=1e-4)


def test_no_hits_unbounded():
    est = estimate_tts(make_trials([], 20), grid=[1.0, 2.0])
    assert est.unbounded and est.tts_label() == "unbounded"
    assert est.argmin_time is None


def test_score_conventions():
    assert tts_score(3.0, 0.0) == math.inf
    assert tts_score(3.0, 0.99) == 3.0
    assert tts_score(3.0, 0.999) == 3.0
    assert tts_score(3.0, 1.0) == 3.0


def test_score_decreasing_in_p():
    ps = np.linspace(0.01, 0.98, 50)
    s = [tts_score(2.0, p) for p in ps]
    assert all(a > b for a, b in zip(s, s[1:]))


def test_hit_counted_at_its_time():
    recs = make_trials([1.0, 3.0], 2)
    est = estimate_tts(recs, grid=[0.5, 1.0, 2.0, 3.0])
    assert est.success_prob == (0.0, 0.5, 0.5, 1.0)
    # 0.5 hits by t=1 gives 1*ln(.01)/ln(.5) = 6.64 > 3
    assert est.tts == 3.0 and est.argmin_time == 3.0


def test_default_grid_is_hit_times_plus_budget():
    recs = make_trials([0.2, 0.1], 4, budget=1.5)
    est = estimate_tts(recs)
    assert est.time_grid == (0.1, 0.2, 1.5)


@given(st.lists(st.floats(0.01, 10), min_size=1, max_size=30), st.integers(0, 10),
       st.lists(st.floats(0.01, 12), min_size=1, max_size=10))
def test_success_prob_monotone_and_superset_grid(hit_times, misses, extra):
    recs = make_trials(hit_times, len(hit_times) + misses, budget=10.0)
    est = estimate_tts(recs)
    assert list(est.success_prob) == sorted(est.success_prob)
    sup = estimate_tts(recs, grid=list(est.time_grid) + extra)
    assert sup.tts <= est.tts


@pytest.mark.parametrize("p", [0.1, 0.3, 0.7])
def test_bernoulli_recovery(p):
    t = 2.0
    est = estimate_tts(bernoulli_trials(p, 10_000, t, seed=0), grid=[t])
    exact = t * math.log(0.01) / math.log(1 - p)
    assert est.tts == pytest.approx(exact, rel=0.05)


def test_estimate_errors():
    with pytest.raises(ValueError):
        estimate_tts([])
    mixed = make_trials([1.0], 1) + make_trials([1.0], 1, iid="other")
    with pytest.raises(ValueError):
        estimate_tts(mixed)
    with pytest.raises(ValueError):
        estimate_tts(make_trials([1.0], 1), grid=[])
    with pytest.raises(ValueError):
        estimate_tts(make_trials([1.0], 1), grid=[0.0, 1.0])


def test_trial_record_invariant():
    with pytest.raises(ValueError):
        TrialRecord("i", "s", 0, 0.0, True, 2.0, 1.0, 0.0)
    with pytest.raises(ValueError):
        TrialRecord("i", "s", 0, 0.0, True, None, 1.0, 0.0)


# --- run_trials ------------------------------------------------------------------------

SA = SolverConfig("anneal", sweeps=200, restarts=20)


def test_running_example_always_hits(eq1):
    for cfg in (SA, SolverConfig("local", restarts=3), SolverConfig("brute")):
        recs = run_trials(eq1, cfg, 10, target=1.0)
        assert len(recs) == 10 and all(r.hit for r in recs)
        assert [r.seed for r in recs] == list(range(10))


def test_single_trivial_clause():
    f = Formula(1, (Clause.from_ints([1]),))
    recs = run_trials(f, SA, 1, target=0.0, base_seed=42)
    assert recs[0].hit and recs[0].seed == 42
    assert recs[0].time_to_hit < 0.1


def test_oracle_target_success_rate():
    f = gen_random_2sat(16, 96, 11)
    target = resolve_target(f)
    assert target == brute_force_solve(reduce_to_qubo(f)).best_objective
    recs = run_trials(f, SA, 50, target, instance_id="g16")
    assert sum(r.hit for r in recs) >= 45
    assert all(r.best_objective >= target for r in recs)


def test_seed_discipline():
    f = gen_random_2sat(24, 144, 2)
    target = resolve_target(f)
    # short schedule so the hit pattern is mixed
    cfg = SolverConfig("anneal", sweeps=5, restarts=1)
    a = run_trials(f, cfg, 8, target, base_seed=100)
    b = run_trials(f, cfg, 8, target, base_seed=100)
    assert [(r.hit, r.best_objective) for r in a] == [(r.hit, r.best_objective) for r in b]
    assert 0 < sum(r.hit for r in a) < 8


def test_run_trials_threads_match_serial():
    f = gen_random_2sat(20, 100, 6)
    cfg = SolverConfig("anneal", sweeps=30, restarts=2)
    target = resolve_target(f)
    a = run_trials(f, cfg, 6, target, max_workers=1)
    b = run_trials(f, cfg, 6, target, max_workers=4)
    assert [(r.seed, r.hit, r.best_objective) for r in a] == [(r.seed, r.hit, r.best_objective) for r in b]


def test_run_trials_errors(eq1):
    with pytest.raises(ValueError):
        run_trials(eq1, SA, 0, 1.0)
    with pytest.raises(ValueError):
        run_trials(eq1, SA, 3, None)


def test_resolve_target_from_metadata(eq1):
    assert resolve_target(eq1, known_optimum=3) == 1.0


# --- run_benchmark and persistence -------------------------------------------------------

def test_benchmark_counting_contract(tmp_path):
    insts = [Instance(f"g{s}", gen_random_2sat(12, 72, s)) for s in (1, 2)]
    out = tmp_path / "report.json"
    rep = run_benchmark(insts, SA, 20, out)
    assert len(rep.estimates) == 2
    assert len(rep.trials) == 40
    assert rep.trial_counts == {"g1": 20, "g2": 20}
    rows = list(csv.DictReader(open(trials_csv_path(out))))
    assert len(rows) == 40
    assert list(rows[0]) == CSV_COLUMNS
    assert BenchReport.load(out) == rep


def test_benchmark_empty_set():
    with pytest.raises(ValueError):
        run_benchmark([], SA, 5)


def test_benchmark_unbounded_case():
    f = gen_random_2sat(200, 1200, 1)
    # an objective below zero can never be reached
    rep = run_benchmark([Instance("hard", f)], SolverConfig("local", restarts=1, time_budget=0.01), 3,
                        targets={"hard": -1.0})
    est = rep.estimates[0]
    assert est.unbounded and est.n_hits == 0
    assert '"tts": "unbounded"' in rep.to_json()
    assert BenchReport.from_json(rep.to_json()) == rep


def test_benchmark_skips_unresolvable_target():
    big = Instance("big", gen_random_2sat(30, 60, 1))
    small = Instance("small", gen_random_2sat(8, 20, 1))
    rep = run_benchmark([big, small], SolverConfig("local", restarts=5), 3)
    assert [e.instance_id for e in rep.estimates] == ["small"]
    assert "big" in rep.skipped


def test_trials_csv_round_trip(tmp_path):
    recs = make_trials([0.5, 0.25], 5)
    path = tmp_path / "t.csv"
    write_trials_csv(recs, path)
    assert read_trials_csv(path) == recs
    lines = path.read_text().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert lines[-1].split(",")[4] == ""


def test_trials_csv_path():
    assert str(trials_csv_path("a/b.json")) == "a/b.csv"
    assert str(trials_csv_path("a/b.csv")) == "a/b.trials.csv"
