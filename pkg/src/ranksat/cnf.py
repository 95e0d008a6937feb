"""CNF instances and assignment scoring.

Conventions used throughout the package:

- DIMACS variables are 1-based; bit ``j`` (0-based) of an assignment holds
  the truth value of variable ``j + 1``.
- Clauses keep their 1-based file position ``index``; the divergence score
  weights an unsatisfied clause ``i`` by ``i**2``.
- An assignment may be any sequence of 0/1 values (list, tuple or numpy
  array) of length ``n``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Literal",
    "Clause",
    "CnfFormula",
    "CostParams",
    "DimacsError",
    "parse_dimacs",
    "parse_dimacs_file",
    "parse_json_instance",
    "load_instance_file",
    "to_dimacs",
    "eval_clause",
    "h_count",
    "divergence",
    "g_cost",
    "satisfied_weight",
    "default_params",
    "d_max",
    "ClauseArrays",
]


class DimacsError(ValueError):
    """Malformed instance input. The message names the offending line."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Literal:
    """A variable or its negation; ``variable`` is the 1-based DIMACS index."""

    variable: int
    negated: bool = False

    def __post_init__(self):
        if self.variable < 1:
            raise ValueError(f"variable index must be >= 1, got {self.variable}")

    @property
    def signed(self) -> int:
        return -self.variable if self.negated else self.variable

    @classmethod
    def from_signed(cls, lit: int) -> "Literal":
        if lit == 0:
            raise ValueError("0 is a clause terminator, not a literal")
        return cls(abs(lit), lit < 0)


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals at 1-based file position ``index``."""

    index: int
    literals: tuple[Literal, ...]
    weight: float = 1.0

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"clause index must be >= 1, got {self.index}")
        if not self.literals:
            raise ValueError(f"clause {self.index} is empty")
        if self.weight < 0:
            raise ValueError(f"clause {self.index} has negative weight {self.weight}")
        seen = set()
        for lit in self.literals:
            if lit.variable in seen:
                raise ValueError(
                    f"clause {self.index} mentions variable {lit.variable} twice"
                )
            seen.add(lit.variable)


@dataclass(frozen=True)
class CnfFormula:
    """An immutable CNF instance: ``n`` variables and clauses in file order."""

    n: int
    clauses: tuple[Clause, ...]

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"variable count must be >= 0, got {self.n}")
        for pos, clause in enumerate(self.clauses, start=1):
            if clause.index != pos:
                raise ValueError(
                    f"clause at position {pos} carries index {clause.index}; "
                    "indices must be exactly 1..m in order"
                )
            for lit in clause.literals:
                if lit.variable > self.n:
                    raise ValueError(
                        f"clause {pos} uses variable {lit.variable} > n={self.n}"
                    )

    @property
    def m(self) -> int:
        return len(self.clauses)

    @classmethod
    def from_signed(
        cls,
        n: int,
        clauses: Iterable[Iterable[int]],
        weights: Iterable[float] | None = None,
    ) -> "CnfFormula":
        """Build a formula from signed-integer clause lists."""
        lits = [tuple(Literal.from_signed(l) for l in cl) for cl in clauses]
        if weights is None:
            ws = [1.0] * len(lits)
        else:
            ws = [float(w) for w in weights]
            if len(ws) != len(lits):
                raise ValueError("one weight per clause required")
        built = tuple(
            Clause(index=i, literals=cl, weight=w)
            for i, (cl, w) in enumerate(zip(lits, ws), start=1)
        )
        return cls(n=n, clauses=built)


@dataclass(frozen=True)
class CostParams:
    """Weights for the hierarchical cost ``zeta*h + vartheta*d``.

    Lexicographic dominance of the unsatisfied-clause count over the
    divergence term requires ``zeta > vartheta * d_max(m)``; that condition
    depends on the formula and is enforced where a formula is at hand.
    """

    zeta: float
    vartheta: float

    def __post_init__(self):
        if self.zeta <= 0:
            raise ValueError(f"zeta must be positive, got {self.zeta}")
        if self.vartheta <= 0:
            raise ValueError(f"vartheta must be positive, got {self.vartheta}")

    def dominates(self, m: int) -> bool:
        """True iff h strictly dominates d for any formula with m clauses."""
        return self.zeta > self.vartheta * d_max(m)


def d_max(m: int) -> int:
    """Largest possible divergence for an m-clause formula: sum of i**2."""
    return m * (m + 1) * (2 * m + 1) // 6


def default_params(f: CnfFormula) -> CostParams:
    """Minimal integer weights giving lexicographic (h, d) ordering."""
    return CostParams(zeta=float(d_max(f.m) + 1), vartheta=1.0)


def _require_dominance(f: CnfFormula, params: CostParams) -> None:
    if not params.dominates(f.m):
        raise ValueError(
            f"cost params zeta={params.zeta}, vartheta={params.vartheta} do not "
            f"dominate: need zeta > vartheta * {d_max(f.m)} for m={f.m}"
        )


# ---------------------------------------------------------------------------
# Parsing

_SATLIB_EOF = "%"  # SATLIB benchmark files close with a '%' line and a stray 0


def parse_dimacs(text: str) -> CnfFormula:
    """Parse a DIMACS CNF document.

    Accepts 'c' comment lines, a single ``p cnf n m`` header, m clauses of
    whitespace-separated nonzero integers each terminated by 0 (clauses may
    span lines), and the SATLIB ``%`` end-of-file marker.
    """
    n = m = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    lineno = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith(_SATLIB_EOF):
            break
        if n is None:
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise DimacsError(
                    f"expected header 'p cnf <vars> <clauses>', got {line!r}", lineno
                )
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise DimacsError(f"non-integer counts in header {line!r}", lineno)
            if n < 0 or m < 0:
                raise DimacsError(f"negative counts in header {line!r}", lineno)
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise DimacsError(f"unexpected token {tok!r} in clause", lineno)
            if lit == 0:
                if not current:
                    raise DimacsError("empty clause (0 with no literals)", lineno)
                clauses.append(tuple(current))
                current = []
                continue
            if len(clauses) >= m:
                raise DimacsError(
                    f"clause count mismatch: header promises {m} clauses but more follow",
                    lineno,
                )
            var = abs(lit)
            if var > n:
                raise DimacsError(f"variable {var} out of range 1..{n}", lineno)
            if any(abs(prev) == var for prev in current):
                raise DimacsError(
                    f"duplicate variable {var} in clause {len(clauses) + 1}", lineno
                )
            current.append(lit)
    if n is None:
        raise DimacsError("missing 'p cnf' header", max(lineno, 1))
    if current:
        raise DimacsError("unterminated final clause (missing 0)", lineno)
    if len(clauses) != m:
        raise DimacsError(
            f"clause count mismatch: header promises {m}, found {len(clauses)}", lineno
        )
    return CnfFormula.from_signed(n, clauses)


def parse_dimacs_file(path: str) -> CnfFormula:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_dimacs(fh.read())


def parse_json_instance(text: str | dict) -> CnfFormula:
    """Parse the extended JSON instance format.

    Schema: ``{"n": int, "clauses": [{"lits": [±int, ...], "w": real}, ...]}``
    with ``w`` optional (default 1).
    """
    obj = json.loads(text) if isinstance(text, str) else text
    if not isinstance(obj, dict) or "n" not in obj or "clauses" not in obj:
        raise DimacsError("JSON instance must carry 'n' and 'clauses'")
    try:
        n = int(obj["n"])
        raw = list(obj["clauses"])
        lits = [tuple(int(l) for l in cl["lits"]) for cl in raw]
        weights = [float(cl.get("w", 1.0)) for cl in raw]
    except (TypeError, KeyError, ValueError) as exc:
        raise DimacsError(f"malformed JSON instance: {exc}")
    try:
        return CnfFormula.from_signed(n, lits, weights)
    except ValueError as exc:
        raise DimacsError(str(exc))


def load_instance_file(path: str) -> CnfFormula:
    """Load a DIMACS CNF or JSON instance, dispatching on extension."""
    if str(path).endswith(".json"):
        with open(path, "r", encoding="utf-8") as fh:
            return parse_json_instance(fh.read())
    return parse_dimacs_file(path)


def to_dimacs(f: CnfFormula) -> str:
    """Serialize back to DIMACS; re-parsing yields an identical formula."""
    lines = [f"p cnf {f.n} {f.m}"]
    for clause in f.clauses:
        lines.append(" ".join(str(lit.signed) for lit in clause.literals) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Scoring

def _check_length(f: CnfFormula, a: Sequence[int]) -> None:
    if len(a) != f.n:
        raise ValueError(f"assignment length {len(a)} != n={f.n}")


def eval_clause(clause: Clause, a: Sequence[int]) -> bool:
    """True iff at least one literal of the clause is satisfied by ``a``."""
    for lit in clause.literals:
        bit = a[lit.variable - 1]
        if (bit == 1) != lit.negated:
            return True
    return False


def h_count(f: CnfFormula, a: Sequence[int]) -> int:
    """Number of unsatisfied clauses."""
    _check_length(f, a)
    return sum(1 for clause in f.clauses if not eval_clause(clause, a))


def divergence(f: CnfFormula, a: Sequence[int]) -> int:
    """Sum of i**2 over unsatisfied clause positions i (1-based)."""
    _check_length(f, a)
    return sum(
        clause.index ** 2 for clause in f.clauses if not eval_clause(clause, a)
    )


def g_cost(f: CnfFormula, a: Sequence[int], params: CostParams) -> float:
    """Hierarchical cost ``zeta*h + vartheta*d``; 0 iff ``a`` satisfies ``f``."""
    _require_dominance(f, params)
    return params.zeta * h_count(f, a) + params.vartheta * divergence(f, a)


def satisfied_weight(f: CnfFormula, a: Sequence[int]) -> float:
    """Total weight of satisfied clauses; ``m - h_count`` under unit weights."""
    _check_length(f, a)
    return sum(clause.weight for clause in f.clauses if eval_clause(clause, a))


# ---------------------------------------------------------------------------
# Batch scoring

class ClauseArrays:
    """Padded literal tensors for scoring many assignments at once.

    ``bits`` arguments are (s, n) arrays of 0/1; all outputs are per-row.
    A clause is unsatisfied exactly when every literal sits on its failing
    bit value (0 for a positive literal, 1 for a negated one).
    """

    def __init__(self, f: CnfFormula):
        self.n = f.n
        self.m = f.m
        width = max((len(c.literals) for c in f.clauses), default=1)
        self._vars = np.zeros((self.m, width), dtype=np.int64)
        self._fails = np.zeros((self.m, width), dtype=np.uint8)
        self._pad = np.ones((self.m, width), dtype=bool)
        for i, clause in enumerate(f.clauses):
            for j, lit in enumerate(clause.literals):
                self._vars[i, j] = lit.variable - 1
                self._fails[i, j] = 1 if lit.negated else 0
                self._pad[i, j] = False
        self._sq_index = np.arange(1, self.m + 1, dtype=np.int64) ** 2
        self._weights = np.array([c.weight for c in f.clauses], dtype=np.float64)

    def unsat_matrix(self, bits: np.ndarray) -> np.ndarray:
        """(s, m) boolean matrix: clause i unsatisfied by row r."""
        bits = np.asarray(bits, dtype=np.uint8)
        if bits.ndim != 2 or bits.shape[1] != self.n:
            raise ValueError(f"expected (s, {self.n}) bit matrix, got {bits.shape}")
        if self.m == 0:
            return np.zeros((bits.shape[0], 0), dtype=bool)
        failing = bits[:, self._vars] == self._fails  # (s, m, width)
        failing |= self._pad
        return failing.all(axis=2)

    def h(self, bits: np.ndarray) -> np.ndarray:
        return self.unsat_matrix(bits).sum(axis=1, dtype=np.int64)

    def h_and_d(self, bits: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        unsat = self.unsat_matrix(bits)
        return unsat.sum(axis=1, dtype=np.int64), unsat @ self._sq_index

    def g(self, bits: np.ndarray, params: CostParams) -> np.ndarray:
        if not params.dominates(self.m):
            raise ValueError(
                f"cost params zeta={params.zeta}, vartheta={params.vartheta} do not "
                f"dominate: need zeta > vartheta * {d_max(self.m)} for m={self.m}"
            )
        h, d = self.h_and_d(bits)
        return params.zeta * h + params.vartheta * d

    def satisfied_weight(self, bits: np.ndarray) -> np.ndarray:
        unsat = self.unsat_matrix(bits)
        return self._weights.sum() - unsat @ self._weights
