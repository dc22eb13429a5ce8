"""Reduction of MAX-2-SAT to QUBO, objective evaluation and the sparse QUBO text format.

A :class:`QuboProblem` stores an upper-triangular matrix ``Q`` plus a scalar
offset. Linear coefficients live on the diagonal (``x*x == x`` for binary x),
so the objective is ``offset + sum_i Q[i,i] x_i + sum_{i<j} Q[i,j] x_i x_j``.
For a reduced formula this equals the weight of the unsatisfied clauses.
"""
from __future__ import annotations

import numpy as np

from .formula import Formula, as_assignment


class QuboFormatError(ValueError):
    pass


class QuboProblem:
    """Upper-triangular QUBO matrix with a constant offset. Immutable."""

    __slots__ = ("matrix", "offset")

    def __init__(self, matrix, offset: float = 0.0):
        m = np.array(matrix, dtype=np.float64)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"QUBO matrix must be square, got shape {m.shape}")
        if np.any(np.tril(m, -1)):
            raise ValueError("QUBO matrix must be upper triangular")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "offset", float(offset))

    def __setattr__(self, name, value):
        raise AttributeError("QuboProblem is immutable")

    @classmethod
    def zeros(cls, n: int, offset: float = 0.0) -> "QuboProblem":
        return cls(np.zeros((n, n)), offset)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def nnz(self) -> int:
        return int(np.count_nonzero(self.matrix))

    def is_integral(self) -> bool:
        return bool(np.all(self.matrix == np.round(self.matrix))) and self.offset == round(self.offset)

    def max_abs_coefficient(self) -> float:
        return float(np.abs(self.matrix).max()) if self.size else 0.0

    def __eq__(self, other):
        if not isinstance(other, QuboProblem):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self.matrix, other.matrix)

    def __hash__(self):
        return hash((self.offset, self.matrix.tobytes()))

    def __repr__(self):
        return f"QuboProblem(size={self.size}, nnz={self.nnz}, offset={self.offset:g})"


def _add_clause_terms(Q: np.ndarray, const: list, a, b, w: int) -> None:
    # Mapping of a violated clause to a quadratic penalty:
    #   x_i v x_j    -> 1 - x_i - x_j + x_i x_j
    #   ~x_i v x_j   -> x_i - x_i x_j
    #   ~x_i v ~x_j  -> x_i x_j
    # x_i v ~x_j is the middle row with the literals commuted.
    if a.negated and not b.negated:
        neg, pos = a.variable, b.variable
        terms = ((neg,), 1), ((neg, pos), -1)
    elif b.negated and not a.negated:
        neg, pos = b.variable, a.variable
        terms = ((neg,), 1), ((neg, pos), -1)
    elif a.negated and b.negated:
        terms = (((a.variable, b.variable), 1),)
    else:
        i, j = a.variable, b.variable
        terms = ((), 1), ((i,), -1), ((j,), -1), ((i, j), 1)
    for vars_, coef in terms:
        if not vars_:
            const[0] += w * coef
        elif len(vars_) == 1:
            Q[vars_[0], vars_[0]] += w * coef
        else:
            i, j = min(vars_), max(vars_)
            # i == j folds onto the diagonal
            Q[i, j] += w * coef


def reduce_to_qubo(f: Formula) -> QuboProblem:
    """QUBO whose objective is the weight of clauses of ``f`` left unsatisfied.

    The matrix is ``num_vars x num_vars`` whatever the number of clauses.
    """
    n = f.num_vars
    Q = np.zeros((n, n), dtype=np.int64)
    const = [0]
    for c in f.clauses:
        a, b = c.literals[0], c.literals[-1]
        _add_clause_terms(Q, const, a, b, c.weight)
    return QuboProblem(Q.astype(np.float64), float(const[0]))


def qubo_objective(q: QuboProblem, bits) -> float:
    x = as_assignment(bits, q.size).astype(np.float64)
    return q.offset + float(x @ q.matrix @ x)


def qubo_objective_batch(q: QuboProblem, assignments: np.ndarray) -> np.ndarray:
    """Objective for each row of a (K, N) 0/1 matrix.

    Integral problems are evaluated in int64, so results are exact.
    """
    A = np.asarray(assignments)
    if A.ndim != 2 or A.shape[1] != q.size:
        raise ValueError(f"expected shape (K, {q.size}), got {A.shape}")
    if q.is_integral():
        M = q.matrix.astype(np.int64)
        X = A.astype(np.int64)
        return np.einsum("ki,ki->k", X @ M, X) + int(q.offset)
    X = A.astype(np.float64)
    return np.einsum("ki,ki->k", X @ q.matrix, X) + q.offset


# --- text format --------------------------------------------------------------

def _fmt(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    return repr(float(v))


def emit_qubo(q: QuboProblem) -> str:
    """Sparse text form: ``q <N> <offset>`` then ``i j value`` per nonzero.

    Diagonal (linear) entries come first ordered by i, followed by the
    off-diagonal entries ordered by (i, j).
    """
    lines = [f"q {q.size} {_fmt(q.offset)}"]
    M = q.matrix
    for i in range(q.size):
        if M[i, i] != 0:
            lines.append(f"{i} {i} {_fmt(M[i, i])}")
    rows, cols = np.nonzero(np.triu(M, 1))
    for i, j in zip(rows.tolist(), cols.tolist()):
        lines.append(f"{i} {j} {_fmt(M[i, j])}")
    return "\n".join(lines) + "\n"


def parse_qubo(text: str) -> QuboProblem:
    lines = [(k, ln.strip()) for k, ln in enumerate(text.splitlines(), start=1)]
    lines = [(k, ln) for k, ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise QuboFormatError("empty QUBO text")
    k0, head = lines[0]
    toks = head.split()
    if len(toks) != 3 or toks[0] != "q":
        raise QuboFormatError(f"line {k0}: malformed header {head!r}")
    try:
        n = int(toks[1])
        offset = float(toks[2])
    except ValueError:
        raise QuboFormatError(f"line {k0}: malformed header {head!r}") from None
    if n < 0:
        raise QuboFormatError(f"line {k0}: negative size")
    M = np.zeros((n, n))
    seen = set()
    for k, ln in lines[1:]:
        toks = ln.split()
        if len(toks) != 3:
            raise QuboFormatError(f"line {k}: expected 'i j value', got {ln!r}")
        try:
            i, j, v = int(toks[0]), int(toks[1]), float(toks[2])
        except ValueError:
            raise QuboFormatError(f"line {k}: expected 'i j value', got {ln!r}") from None
        if not (0 <= i < n and 0 <= j < n):
            raise QuboFormatError(f"line {k}: index ({i}, {j}) out of range for size {n}")
        if i > j:
            raise QuboFormatError(f"line {k}: lower-triangular entry ({i}, {j})")
        if (i, j) in seen:
            raise QuboFormatError(f"line {k}: duplicate entry ({i}, {j})")
        seen.add((i, j))
        M[i, j] = v
    return QuboProblem(M, offset)
