"""Repeated seeded trials and the time-to-optimal-solution (TTS) statistic.

TTS at time t is ``t * ln(1 - 0.99) / ln(1 - p(t))``: the time needed to see
an optimal solution at least once with 99% confidence when runs of length t
succeed with probability p(t). The reported TTS is its minimum over a grid of
times, which by default is the set of observed hit times plus the budget.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .formula import DimacsError, Formula, parse_dimacs, read_known_optimum
from .qubo import QuboProblem, reduce_to_qubo
from .solvers import BRUTE_FORCE_LIMIT, SolverConfig, SolverError, brute_force_solve

log = logging.getLogger(__name__)

TARGET_PROBABILITY = 0.99
UNBOUNDED = "unbounded"
CSV_COLUMNS = ["instance_id", "solver_id", "seed", "hit", "time_to_hit_s", "budget_s",
               "best_objective", "target_objective"]


@dataclass(frozen=True)
class TrialRecord:
    instance_id: str
    solver_id: str
    seed: int
    target_objective: float
    hit: bool
    time_to_hit: float | None
    budget: float
    best_objective: float

    def __post_init__(self):
        if self.hit and (self.time_to_hit is None or self.time_to_hit > self.budget):
            raise ValueError("a hit needs time_to_hit <= budget")


@dataclass(frozen=True)
class TtsEstimate:
    instance_id: str
    solver_id: str
    time_grid: tuple[float, ...]
    success_prob: tuple[float, ...]
    tts: float
    argmin_time: float | None
    n_trials: int
    n_hits: int

    @property
    def unbounded(self) -> bool:
        return math.isinf(self.tts)

    def tts_label(self) -> str:
        return UNBOUNDED if self.unbounded else f"{self.tts:.6g}"


def tts_score(t: float, p: float) -> float:
    """Time to reach 99% success from runs of length t with per-run success p.

    p = 0 gives infinity. p >= 0.99 gives t, since no fewer than one run can
    be made.
    """
    if p <= 0.0:
        return math.inf
    if p >= TARGET_PROBABILITY:
        return t
    return t * math.log(1.0 - TARGET_PROBABILITY) / math.log(1.0 - p)


def default_grid(trials: Sequence[TrialRecord]) -> list[float]:
    pts = {r.time_to_hit for r in trials if r.hit}
    pts.add(max(r.budget for r in trials))
    return sorted(t for t in pts if t > 0) or [max(r.budget for r in trials) or 1e-9]


def estimate_tts(trials: Sequence[TrialRecord], grid: Iterable[float] | None = None) -> TtsEstimate:
    """Minimum TTS score over ``grid`` from the empirical success curve of ``trials``."""
    trials = list(trials)
    if not trials:
        raise ValueError("no trials")
    ids = {(r.instance_id, r.solver_id) for r in trials}
    if len(ids) > 1:
        raise ValueError(f"trials mix instance/solver ids: {sorted(ids)}")
    grid = default_grid(trials) if grid is None else sorted(set(float(t) for t in grid))
    if not grid or grid[0] <= 0:
        raise ValueError("grid must be nonempty and positive")
    hits = np.sort([r.time_to_hit for r in trials if r.hit])
    n = len(trials)
    probs = [float(np.searchsorted(hits, t, side="right")) / n for t in grid]
    scores = [tts_score(t, p) for t, p in zip(grid, probs)]
    k = int(np.argmin(scores))
    best = scores[k]
    iid, sid = ids.pop()
    return TtsEstimate(
        instance_id=iid,
        solver_id=sid,
        time_grid=tuple(grid),
        success_prob=tuple(probs),
        tts=best,
        argmin_time=None if math.isinf(best) else grid[k],
        n_trials=n,
        n_hits=len(hits),
    )


def resolve_target(f: Formula, known_optimum: int | None = None,
                   max_size: int = BRUTE_FORCE_LIMIT) -> float:
    """Optimal QUBO objective of ``f``: from a known max-satisfied weight or by brute force."""
    if known_optimum is not None:
        return float(f.total_weight - known_optimum)
    return brute_force_solve(reduce_to_qubo(f), max_size).best_objective


def _trial(q: QuboProblem, cfg: SolverConfig, seed: int, target: float, instance_id: str) -> TrialRecord:
    out = cfg.run(q, seed, stop_at=target)
    budget = cfg.time_budget if cfg.time_budget is not None else out.wall_time
    hit = out.best_objective <= target and out.time_to_first_best is not None
    t_hit = out.time_to_first_best if hit else None
    if hit and t_hit > budget:
        # found only after the budget expired (budget is polled between kernel calls)
        hit, t_hit = False, None
    return TrialRecord(instance_id, cfg.name, seed, float(target), hit, t_hit, float(budget),
                       float(out.best_objective))


def run_trials(f: Formula, cfg: SolverConfig, repetitions: int, target: float | None,
               base_seed: int = 0, instance_id: str = "", max_workers: int = 1) -> list[TrialRecord]:
    """Solve ``f`` ``repetitions`` times with seeds ``base_seed + k``.

    The reduction runs once, before and outside every timed trial. Trials may
    run on up to ``max_workers`` threads (capped at the CPU count); records
    come back sorted by seed.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if target is None:
        raise ValueError("a target objective is required")
    q = reduce_to_qubo(f)
    seeds = [base_seed + k for k in range(repetitions)]
    workers = max(1, min(max_workers, os.cpu_count() or 1))
    if workers == 1:
        recs = [_trial(q, cfg, s, target, instance_id) for s in seeds]
    else:
        with ThreadPoolExecutor(workers) as ex:
            recs = list(ex.map(lambda s: _trial(q, cfg, s, target, instance_id), seeds))
    return sorted(recs, key=lambda r: r.seed)


@dataclass(frozen=True)
class Instance:
    instance_id: str
    formula: Formula
    known_optimum: int | None = None


def load_instances(directory: str | Path) -> tuple[list[Instance], dict[str, str]]:
    """Read every ``*.cnf``/``*.wcnf`` file in ``directory``.

    Returns the parsed instances and a map of file name to error for the
    files that failed to parse.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"not a directory: {directory}")
    out, errors = [], {}
    for path in sorted(directory.iterdir()):
        if path.suffix not in (".cnf", ".wcnf"):
            continue
        try:
            text = path.read_text()
            out.append(Instance(path.stem, parse_dimacs(text), read_known_optimum(text)))
        except (OSError, DimacsError, ValueError) as e:
            errors[path.name] = str(e)
    return out, errors


@dataclass
class BenchReport:
    estimates: list[TtsEstimate]
    solver_config: dict
    repetitions: int
    base_seed: int
    trial_counts: dict[str, int]
    trials: list[TrialRecord] = field(default_factory=list)
    skipped: dict[str, str] = field(default_factory=dict)
    environment: str = ""
    note: str = ""

    def to_json(self) -> str:
        d = asdict(self)
        for e in d["estimates"]:
            if math.isinf(e["tts"]):
                e["tts"] = UNBOUNDED
        return json.dumps(d, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "BenchReport":
        d = json.loads(text)
        ests = []
        for e in d.pop("estimates"):
            if e["tts"] == UNBOUNDED:
                e["tts"] = math.inf
            e["time_grid"] = tuple(e["time_grid"])
            e["success_prob"] = tuple(e["success_prob"])
            ests.append(TtsEstimate(**e))
        trials = [TrialRecord(**t) for t in d.pop("trials")]
        return cls(estimates=ests, trials=trials, **d)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.to_json())

    @classmethod
    def load(cls, path: str | Path) -> "BenchReport":
        return cls.from_json(Path(path).read_text())

    def table(self) -> str:
        rows = [f"{'instance':<24} {'trials':>6} {'hits':>9} {'tts_s':>12} {'argmin_t_s':>12}"]
        for e in self.estimates:
            at = "-" if e.argmin_time is None else f"{e.argmin_time:.6g}"
            rows.append(f"{e.instance_id:<24} {self.trial_counts.get(e.instance_id, 0):>6} "
                        f"{e.n_hits:>4}/{e.n_trials:<4} {e.tts_label():>12} {at:>12}")
        return "\n".join(rows)


def write_trials_csv(trials: Iterable[TrialRecord], path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for r in trials:
            w.writerow([r.instance_id, r.solver_id, r.seed, int(r.hit),
                        "" if r.time_to_hit is None else repr(r.time_to_hit),
                        repr(r.budget), repr(r.best_objective), repr(r.target_objective)])


def read_trials_csv(path: str | Path) -> list[TrialRecord]:
    with open(path, newline="") as fh:
        return [
            TrialRecord(
                instance_id=row["instance_id"],
                solver_id=row["solver_id"],
                seed=int(row["seed"]),
                target_objective=float(row["target_objective"]),
                hit=row["hit"] == "1",
                time_to_hit=float(row["time_to_hit_s"]) if row["time_to_hit_s"] else None,
                budget=float(row["budget_s"]),
                best_objective=float(row["best_objective"]),
            )
            for row in csv.DictReader(fh)
        ]


def trials_csv_path(report_path: str | Path) -> Path:
    p = Path(report_path)
    return p.with_name(p.stem + ".trials.csv") if p.suffix == ".csv" else p.with_suffix(".csv")


def environment_note() -> str:
    return (f"python {platform.python_version()}; numpy {np.__version__}; "
            f"{platform.platform()}; cpus {os.cpu_count()}")


def run_benchmark(instances: Sequence[Instance], cfg: SolverConfig, repetitions: int,
                  out_path: str | Path | None = None, base_seed: int = 0,
                  targets: dict[str, float] | None = None, max_workers: int = 1,
                  oracle_max_size: int = BRUTE_FORCE_LIMIT) -> BenchReport:
    """Trials plus a TTS estimate for each instance.

    Targets come from ``targets``, then the instance's known optimum, then
    brute force. Instances whose target cannot be resolved are listed in
    ``report.skipped`` and the run continues. With ``out_path`` the report is
    written there as JSON and the trials go to the same stem with ``.csv``.
    """
    if not instances:
        raise ValueError("empty instance set")
    targets = targets or {}
    report = BenchReport(estimates=[], solver_config=cfg.to_dict(), repetitions=repetitions,
                         base_seed=base_seed, trial_counts={}, environment=environment_note())
    for inst in instances:
        try:
            target = targets.get(inst.instance_id)
            if target is None:
                target = resolve_target(inst.formula, inst.known_optimum, oracle_max_size)
        except SolverError as e:
            log.warning("skipping %s: %s", inst.instance_id, e)
            report.skipped[inst.instance_id] = f"unresolvable target: {e}"
            continue
        recs = run_trials(inst.formula, cfg, repetitions, target, base_seed, inst.instance_id, max_workers)
        report.trials.extend(recs)
        report.trial_counts[inst.instance_id] = len(recs)
        report.estimates.append(estimate_tts(recs))
    if out_path is not None:
        out_path = Path(out_path)
        report.save(out_path)
        write_trials_csv(report.trials, trials_csv_path(out_path))
    return report
