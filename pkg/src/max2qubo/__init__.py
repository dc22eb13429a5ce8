"""MAX-2-SAT to QUBO reduction, QUBO solvers and time-to-optimal-solution benchmarking."""
from .bench import (BenchReport, Instance, TrialRecord, TtsEstimate, estimate_tts, run_benchmark,
                    run_trials, tts_score)
from .formula import (Clause, DimacsError, Formula, Literal, count_satisfied, emit_dimacs,
                      gen_random_2sat, parse_dimacs)
from .qubo import QuboProblem, emit_qubo, parse_qubo, qubo_objective, reduce_to_qubo
from .solvers import (AnnealConfig, SolveOutcome, SolverConfig, anneal_solve, brute_force_solve,
                      incremental_flip_delta, local_search_solve)

__version__ = "0.1.0"
