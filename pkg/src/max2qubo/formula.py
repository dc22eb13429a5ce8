"""MAX-2-SAT instances: literals, clauses, formulas, DIMACS I/O and random generation."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np


class DimacsError(ValueError):
    """Malformed DIMACS input. ``lineno`` is 1-based, or None for whole-file errors."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


@dataclass(frozen=True)
class Literal:
    variable: int
    negated: bool = False

    def __post_init__(self):
        if self.variable < 0:
            raise ValueError(f"negative variable index {self.variable}")

    def value(self, bits) -> bool:
        return bool(bits[self.variable]) != self.negated

    def __str__(self):
        return ("-" if self.negated else "") + str(self.variable + 1)


@dataclass(frozen=True)
class Clause:
    """Disjunction of one or two literals carrying a positive integer weight."""

    literals: tuple[Literal, ...]
    weight: int = 1

    def __post_init__(self):
        object.__setattr__(self, "literals", tuple(self.literals))
        if not 1 <= len(self.literals) <= 2:
            raise ValueError(f"clause must have 1 or 2 literals, got {len(self.literals)}")
        if isinstance(self.weight, bool) or int(self.weight) != self.weight or self.weight < 1:
            raise ValueError(f"clause weight must be a positive integer, got {self.weight!r}")
        object.__setattr__(self, "weight", int(self.weight))

    @classmethod
    def from_ints(cls, lits: Iterable[int], weight: int = 1) -> "Clause":
        """Build from signed 1-indexed DIMACS literals, e.g. ``(-1, 2)``."""
        out = []
        for v in lits:
            if v == 0:
                raise ValueError("0 is not a literal")
            out.append(Literal(abs(v) - 1, v < 0))
        return cls(tuple(out), weight)

    def satisfied(self, bits) -> bool:
        return any(lit.value(bits) for lit in self.literals)

    def to_ints(self) -> list[int]:
        return [-(l.variable + 1) if l.negated else l.variable + 1 for l in self.literals]


@dataclass(frozen=True)
class Formula:
    num_vars: int
    clauses: tuple[Clause, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(self.clauses))
        if self.num_vars < 0:
            raise ValueError("num_vars must be non-negative")
        for k, c in enumerate(self.clauses):
            for lit in c.literals:
                if lit.variable >= self.num_vars:
                    raise ValueError(
                        f"clause {k} uses variable {lit.variable} but num_vars={self.num_vars}"
                    )

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)

    @property
    def total_weight(self) -> int:
        return sum(c.weight for c in self.clauses)

    @property
    def is_weighted(self) -> bool:
        return any(c.weight != 1 for c in self.clauses)

    def clause_arrays(self):
        """Column view of the clauses: (var_a, neg_a, var_b, neg_b, weight).

        Unit clauses repeat their literal in the b slot, which leaves the
        disjunction unchanged.
        """
        m = len(self.clauses)
        va = np.empty(m, dtype=np.int64)
        na = np.empty(m, dtype=bool)
        vb = np.empty(m, dtype=np.int64)
        nb = np.empty(m, dtype=bool)
        w = np.empty(m, dtype=np.int64)
        for k, c in enumerate(self.clauses):
            a = c.literals[0]
            b = c.literals[-1]
            va[k], na[k], vb[k], nb[k], w[k] = a.variable, a.negated, b.variable, b.negated, c.weight
        return va, na, vb, nb, w


def as_assignment(bits: Sequence[int] | np.ndarray, num_vars: int) -> np.ndarray:
    """Validate ``bits`` as a 0/1 vector of length ``num_vars``; returns a uint8 array."""
    arr = np.asarray(bits)
    if arr.ndim != 1 or arr.shape[0] != num_vars:
        raise ValueError(f"assignment has length {arr.size if arr.ndim else 1}, expected {num_vars}")
    if arr.size and not np.isin(arr, (0, 1)).all():
        raise ValueError("assignment entries must be 0 or 1")
    return arr.astype(np.uint8)


def count_satisfied(f: Formula, bits) -> int:
    """Total weight of the clauses of ``f`` satisfied by ``bits``."""
    bits = as_assignment(bits, f.num_vars)
    return sum(c.weight for c in f.clauses if c.satisfied(bits))


def count_satisfied_batch(f: Formula, assignments: np.ndarray) -> np.ndarray:
    """Vectorised ``count_satisfied`` over the rows of a (K, N) 0/1 matrix."""
    A = np.asarray(assignments)
    if A.ndim != 2 or A.shape[1] != f.num_vars:
        raise ValueError(f"expected shape (K, {f.num_vars}), got {A.shape}")
    A = A.astype(bool)
    if not f.clauses:
        return np.zeros(A.shape[0], dtype=np.int64)
    va, na, vb, nb, w = f.clause_arrays()
    sat = (A[:, va] != na) | (A[:, vb] != nb)
    return sat.astype(np.int64) @ w


def all_assignments(n: int) -> np.ndarray:
    """Every 0/1 vector of length n in lexicographic order (bit 0 most significant)."""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.uint8)


# --- DIMACS -----------------------------------------------------------------

_HEADER = re.compile(r"^p\s+(w?cnf)\s+(\S+)\s+(\S+)(?:\s+(\S+))?\s*$")


def _int(tok: str, lineno: int, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise DimacsError(f"{what} {tok!r} is not an integer", lineno) from None


def parse_dimacs(text: str) -> Formula:
    """Parse DIMACS CNF or WCNF text into a :class:`Formula`.

    Every clause sits on one line terminated by ``0``. For WCNF the first
    integer on a clause line is its weight. An optional ``top`` in the WCNF
    header is accepted, but clauses at or above it (hard clauses) are not.
    """
    header = None
    clauses: list[Clause] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            if header is not None:
                raise DimacsError("duplicate problem line", lineno)
            m = _HEADER.match(line)
            if not m:
                raise DimacsError(f"malformed problem line {line!r}", lineno)
            fmt = m.group(1)
            n = _int(m.group(2), lineno, "variable count")
            c = _int(m.group(3), lineno, "clause count")
            top = m.group(4)
            if top is not None and fmt != "wcnf":
                raise DimacsError(f"malformed problem line {line!r}", lineno)
            top = _int(top, lineno, "top weight") if top is not None else None
            if n < 0 or c < 0:
                raise DimacsError("negative count in problem line", lineno)
            header = (fmt, n, c, top)
            continue
        if header is None:
            raise DimacsError("clause before problem line", lineno)
        fmt, n, _, top = header
        toks = [_int(t, lineno, "token") for t in line.split()]
        if toks[-1] != 0:
            raise DimacsError("clause line does not end with 0", lineno)
        toks.pop()
        weight = 1
        if fmt == "wcnf":
            if not toks:
                raise DimacsError("missing clause weight", lineno)
            weight = toks.pop(0)
            if weight <= 0:
                raise DimacsError(f"clause weight must be positive, got {weight}", lineno)
            if top is not None and weight >= top:
                raise DimacsError("hard clauses (weight >= top) are not supported", lineno)
        if 0 in toks:
            raise DimacsError("0 inside clause", lineno)
        if not toks:
            raise DimacsError("empty clause", lineno)
        if len(toks) > 2:
            raise DimacsError(f"clause has {len(toks)} literals; only 2-SAT is supported", lineno)
        for v in toks:
            if abs(v) > n:
                raise DimacsError(f"literal {v} exceeds variable count {n}", lineno)
        clauses.append(Clause.from_ints(toks, weight))
    if header is None:
        raise DimacsError("missing problem line 'p cnf N C'")
    _, n, c, _ = header
    if len(clauses) != c:
        raise DimacsError(f"header declares {c} clauses but {len(clauses)} were read")
    return Formula(n, tuple(clauses))


def emit_dimacs(f: Formula) -> str:
    """Canonical DIMACS text; WCNF (without ``top``) when any weight differs from 1."""
    weighted = f.is_weighted
    lines = [f"p {'wcnf' if weighted else 'cnf'} {f.num_vars} {f.num_clauses}"]
    for c in f.clauses:
        toks = ([c.weight] if weighted else []) + c.to_ints() + [0]
        lines.append(" ".join(map(str, toks)))
    return "\n".join(lines) + "\n"


def read_known_optimum(text: str) -> int | None:
    """Best satisfiable weight recorded in a ``c optimum <W>`` comment, if any."""
    for line in text.splitlines():
        toks = line.split()
        if len(toks) == 3 and toks[0] == "c" and toks[1] == "optimum":
            return int(toks[2])
    return None


def gen_random_2sat(num_vars: int, num_clauses: int, seed: int) -> Formula:
    """Uniform random MAX-2-SAT instance.

    Each clause picks two distinct variables uniformly and independent
    negation signs. The output is a pure function of the arguments.
    """
    if num_clauses < 0 or num_vars < 0:
        raise ValueError("counts must be non-negative")
    if num_clauses and num_vars < 2:
        # two distinct variables are needed per clause
        raise ValueError(f"cannot draw 2-variable clauses over {num_vars} variable(s)")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    clauses = []
    for _ in range(num_clauses):
        i, j = rng.choice(num_vars, size=2, replace=False)
        si, sj = rng.integers(0, 2, size=2)
        clauses.append(Clause((Literal(int(i), bool(si)), Literal(int(j), bool(sj)))))
    return Formula(num_vars, tuple(clauses))
