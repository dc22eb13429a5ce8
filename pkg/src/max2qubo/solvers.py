"""QUBO solvers: exhaustive oracle, simulated annealing and steepest-descent local search.

Every solver returns a :class:`SolveOutcome`. Timing starts when the solver
is entered (after any reduction) and uses a monotonic clock.
"""
from __future__ import annotations

import dataclasses
import math
import time
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .formula import Formula, as_assignment, count_satisfied
from .qubo import QuboProblem, qubo_objective

BRUTE_FORCE_LIMIT = 26
DEFAULT_FINAL_TEMPERATURE = 0.01
_DESCENT_CHUNK = 64


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveOutcome:
    best_assignment: np.ndarray
    best_objective: float
    wall_time: float
    seed: int
    time_to_first_best: float | None = None
    satisfied_weight: int | None = None
    checkpoints: tuple[tuple[float, float], ...] = ()
    solver: str = ""

    def attach(self, f: Formula) -> "SolveOutcome":
        """Copy with ``satisfied_weight`` evaluated on the source formula."""
        return dataclasses.replace(self, satisfied_weight=count_satisfied(f, self.best_assignment))

    def bits(self) -> list[int]:
        return [int(b) for b in self.best_assignment]


@dataclass(frozen=True)
class AnnealConfig:
    """Simulated annealing parameters.

    ``initial_temperature=None`` means the largest absolute QUBO coefficient.
    """

    sweeps: int = 1000
    restarts: int = 20
    initial_temperature: float | None = None
    final_temperature: float = DEFAULT_FINAL_TEMPERATURE
    time_budget: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.final_temperature <= 0:
            raise ValueError("final_temperature must be positive")
        if self.initial_temperature is not None:
            if self.initial_temperature <= 0:
                raise ValueError("initial_temperature must be positive")
            if self.final_temperature > self.initial_temperature:
                raise ValueError("final_temperature must not exceed initial_temperature")
        if self.time_budget is not None and self.time_budget < 0:
            raise ValueError("time_budget must be non-negative")

    def schedule(self, q: QuboProblem) -> np.ndarray:
        t0 = self.initial_temperature
        if t0 is None:
            t0 = max(q.max_abs_coefficient(), self.final_temperature)
        t1 = self.final_temperature
        if self.sweeps == 1:
            return np.array([t0])
        return t0 * (t1 / t0) ** (np.arange(self.sweeps) / (self.sweeps - 1))


class _Prepared:
    """CSR form of the symmetrised off-diagonal couplings plus the diagonal."""

    def __init__(self, q: QuboProblem):
        M = q.matrix
        W = np.triu(M, 1)
        W = W + W.T
        rows, cols = np.nonzero(W)
        self.n = q.size
        self.offset = q.offset
        self.diag = np.ascontiguousarray(np.diag(M), dtype=np.float64)
        self.indices = cols.astype(np.int64)
        self.data = W[rows, cols].astype(np.float64)
        self.indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=self.n), out=self.indptr[1:])

    def fields(self, x):
        return K.local_fields(self.indptr, self.indices, self.data, self.diag, x)

    def delta(self, x, i):
        return K.flip_delta(self.indptr, self.indices, self.data, self.diag, x, i)


_warm = False


def _warmup():
    # compile the kernels outside any timed region
    global _warm
    if _warm:
        return
    q = QuboProblem([[1.0, -1.0], [0.0, 1.0]])
    p = _Prepared(q)
    x = np.zeros(2, dtype=np.uint8)
    h = p.fields(x)
    p.delta(x, 0)
    K.anneal_sweeps(p.indptr, p.indices, p.data, x, h, 0.0, 0.0, x.copy(), np.ones(1),
                    np.zeros((1, 2), dtype=np.int64), np.zeros((1, 2)), -np.inf,
                    np.zeros(2, dtype=np.int64), np.zeros(2))
    K.descend(p.indptr, p.indices, p.data, x, h, 0.0, 1, np.zeros(1))
    K.gray_search(p.indptr, p.indices, p.data, p.diag, 0.0)
    _warm = True


class _Tracker:
    """Global best bookkeeping and checkpoint log for one solver run."""

    def __init__(self, n: int):
        self.t_start = time.perf_counter()
        self.best = math.inf
        self.best_x = np.zeros(n, dtype=np.uint8)
        self.checkpoints: list[tuple[float, float]] = []

    def elapsed(self) -> float:
        return time.perf_counter() - self.t_start

    def offer(self, energy: float, x: np.ndarray, t: float | None = None):
        if energy < self.best:
            self.best = energy
            self.best_x[:] = x
            self.checkpoints.append((self.elapsed() if t is None else t, energy))

    def log_chunk(self, t0: float, t1: float, m: int, sweeps, energies, best_x):
        # improvements inside a kernel call get timestamps interpolated over the call
        for s, e in zip(sweeps, energies):
            self.checkpoints.append((t0 + (t1 - t0) * (s + 1) / m, float(e)))
        if len(energies):
            self.best = float(energies[-1])
            self.best_x[:] = best_x

    def outcome(self, q: QuboProblem, seed: int, solver: str, stop_at: float | None) -> SolveOutcome:
        wall = self.elapsed()
        x = self.best_x.copy()
        x.setflags(write=False)
        best = qubo_objective(q, x)
        ttfb = self.checkpoints[-1][0] if self.checkpoints else 0.0
        if stop_at is not None and best > stop_at:
            ttfb = None
        return SolveOutcome(
            best_assignment=x,
            best_objective=best,
            wall_time=wall,
            seed=seed,
            time_to_first_best=ttfb,
            checkpoints=tuple(self.checkpoints),
            solver=solver,
        )


def _stream(seed: int, restart: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & (2**64 - 1), restart]))


def incremental_flip_delta(q: QuboProblem, bits, i: int) -> float:
    """Objective change from flipping bit ``i``, read off row and column i of Q."""
    x = as_assignment(bits, q.size)
    if not 0 <= i < q.size:
        raise IndexError(f"variable {i} out of range for size {q.size}")
    M = q.matrix
    field_ = M[i, i] + M[:i, i] @ x[:i] + M[i, i + 1:] @ x[i + 1:]
    return float(-field_ if x[i] else field_)


def brute_force_solve(q: QuboProblem, max_size: int = BRUTE_FORCE_LIMIT, stop_at: float | None = None) -> SolveOutcome:
    """Global minimum over all ``2**N`` assignments.

    Ties go to the lexicographically smallest assignment. Sizes above
    ``max_size`` are refused; raise it explicitly for a longer oracle run.
    """
    if q.size > max_size:
        raise SolverError(f"brute force limited to N <= {max_size}, got N = {q.size}")
    _warmup()
    tr = _Tracker(q.size)
    p = _Prepared(q)
    _, code = K.gray_search(p.indptr, p.indices, p.data, p.diag, p.offset)
    n = q.size
    x = np.array([(code >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)
    tr.offer(qubo_objective(q, x), x)
    return tr.outcome(q, 0, "brute", stop_at)


def anneal_solve(q: QuboProblem, cfg: AnnealConfig = AnnealConfig(), stop_at: float | None = None) -> SolveOutcome:
    """Simulated annealing with ``cfg.restarts`` independent chains.

    Each sweep visits all N bits in a fresh random order and applies the
    Metropolis rule on the incremental flip delta. Temperatures fall
    geometrically from the initial to the final value across the sweeps.
    Restart r draws from its own stream seeded by ``(cfg.seed, r)``. The run
    ends early once ``stop_at`` is reached or ``cfg.time_budget`` runs out.
    """
    _warmup()
    tr = _Tracker(q.size)
    n = q.size
    if n == 0:
        tr.offer(q.offset, tr.best_x)
        return tr.outcome(q, cfg.seed, "anneal", stop_at)
    p = _Prepared(q)
    temps = cfg.schedule(q)
    target = -np.inf if stop_at is None else float(stop_at)
    chunk = max(1, min(cfg.sweeps, 4096 // n))
    imp_sweep = np.empty(chunk * n, dtype=np.int64)
    imp_energy = np.empty(chunk * n)
    base = np.tile(np.arange(n, dtype=np.int64), (chunk, 1))

    def out_of_time():
        return cfg.time_budget is not None and tr.elapsed() >= cfg.time_budget

    for r in range(cfg.restarts):
        if r and (out_of_time() or tr.best <= target):
            break
        rng = _stream(cfg.seed, r)
        x = rng.integers(0, 2, n, dtype=np.uint8)
        h = p.fields(x)
        energy = qubo_objective(q, x)
        tr.offer(energy, x)
        best = tr.best
        best_x = tr.best_x.copy()
        for start in range(0, cfg.sweeps, chunk):
            if best <= target or out_of_time():
                break
            m = min(chunk, cfg.sweeps - start)
            perms = rng.permuted(base[:m], axis=1)
            uniforms = rng.random((m, n))
            t0 = tr.elapsed()
            energy, best, n_imp, _ = K.anneal_sweeps(
                p.indptr, p.indices, p.data, x, h, energy, best, best_x,
                temps[start:start + m], perms, uniforms, target, imp_sweep, imp_energy,
            )
            tr.log_chunk(t0, tr.elapsed(), m, imp_sweep[:n_imp], imp_energy[:n_imp], best_x)
    return tr.outcome(q, cfg.seed, "anneal", stop_at)


def descent_trajectory(q: QuboProblem, start) -> list[float]:
    """Objective values visited by steepest descent from ``start``, start included."""
    _warmup()
    p = _Prepared(q)
    x = as_assignment(start, q.size).copy()
    h = p.fields(x)
    e0 = qubo_objective(q, x)
    traj = np.empty(1024)
    out = [e0]
    energy = e0
    while True:
        energy, steps, done = K.descend(p.indptr, p.indices, p.data, x, h, energy, len(traj), traj)
        out.extend(traj[:steps].tolist())
        if done:
            return out


def local_search_solve(q: QuboProblem, restarts: int = 20, seed: int = 0,
                       time_budget: float | None = None, stop_at: float | None = None) -> SolveOutcome:
    """Random-restart steepest descent over single-bit flips.

    From each random start the most improving flip is applied (lowest index
    on ties) until no flip improves. The time budget is checked every 64 flips.
    """
    if restarts < 1:
        raise ValueError("restarts must be >= 1")
    _warmup()
    tr = _Tracker(q.size)
    n = q.size
    if n == 0:
        tr.offer(q.offset, tr.best_x)
        return tr.outcome(q, seed, "local", stop_at)
    p = _Prepared(q)
    target = -np.inf if stop_at is None else float(stop_at)
    traj = np.empty(_DESCENT_CHUNK)

    def out_of_time():
        return time_budget is not None and tr.elapsed() >= time_budget

    for r in range(restarts):
        if r and (out_of_time() or tr.best <= target):
            break
        rng = _stream(seed, r)
        x = rng.integers(0, 2, n, dtype=np.uint8)
        h = p.fields(x)
        energy = qubo_objective(q, x)
        tr.offer(energy, x)
        done = False
        while not done and tr.best > target and not out_of_time():
            t0 = tr.elapsed()
            energy, steps, done = K.descend(p.indptr, p.indices, p.data, x, h, energy, _DESCENT_CHUNK, traj)
            t1 = tr.elapsed()
            if steps and traj[steps - 1] < tr.best:
                k = int(np.argmax(traj[:steps] < tr.best))
                for s in range(k, steps):
                    tr.checkpoints.append((t0 + (t1 - t0) * (s + 1) / steps, float(traj[s])))
                tr.best = float(traj[steps - 1])
                tr.best_x[:] = x
    return tr.outcome(q, seed, "local", stop_at)


@dataclass(frozen=True)
class SolverConfig:
    """Named solver plus its parameters, as used by the CLI and the benchmark harness."""

    name: str = "anneal"
    sweeps: int = 1000
    restarts: int = 20
    time_budget: float | None = None
    initial_temperature: float | None = None
    final_temperature: float = DEFAULT_FINAL_TEMPERATURE
    max_size: int = BRUTE_FORCE_LIMIT

    def __post_init__(self):
        if self.name not in SOLVERS:
            raise ValueError(f"unknown solver {self.name!r}; choose from {sorted(SOLVERS)}")

    def run(self, q: QuboProblem, seed: int = 0, stop_at: float | None = None) -> SolveOutcome:
        return SOLVERS[self.name](q, self, seed, stop_at)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _run_anneal(q, cfg: SolverConfig, seed, stop_at):
    ac = AnnealConfig(cfg.sweeps, cfg.restarts, cfg.initial_temperature, cfg.final_temperature,
                      cfg.time_budget, seed)
    return anneal_solve(q, ac, stop_at)


def _run_local(q, cfg: SolverConfig, seed, stop_at):
    return local_search_solve(q, cfg.restarts, seed, cfg.time_budget, stop_at)


def _run_brute(q, cfg: SolverConfig, seed, stop_at):
    return dataclasses.replace(brute_force_solve(q, cfg.max_size, stop_at), seed=seed)


SOLVERS = {"anneal": _run_anneal, "local": _run_local, "brute": _run_brute}
