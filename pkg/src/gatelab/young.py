"""Exact combinatorics of the tensor-power decomposition.

Young diagrams with at most d rows label the irreducible blocks of the
K-fold tensor power of C^d.  This module computes block dimensions and
multiplicities, the induced probability measure over diagrams, tail and
fidelity bounds, minimal ancilla dimensions and compression dimension
counts.  Everything runs in exact integer / rational arithmetic up to a
configurable size, then switches to log-space evaluation with lgamma and
compensated summation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

# Exact rationals are used up to this K; larger instances go through
# log-space evaluation (documented relative-error target 1e-9).
EXACT_K_LIMIT = 500


def _rows(diagram: "YoungDiagram | Sequence[int]") -> tuple[int, ...]:
    if isinstance(diagram, YoungDiagram):
        return diagram.rows
    return tuple(int(x) for x in diagram)


@dataclass(frozen=True)
class YoungDiagram:
    """A partition of K into at most d non-increasing row lengths."""

    rows: tuple[int, ...]

    def __post_init__(self) -> None:
        rows = tuple(int(x) for x in self.rows)
        object.__setattr__(self, "rows", rows)
        if not rows:
            raise ValueError("diagram needs at least one row (possibly zero)")
        if any(r < 0 for r in rows):
            raise ValueError(f"negative row length in {rows}")
        if any(rows[i] < rows[i + 1] for i in range(len(rows) - 1)):
            raise ValueError(f"row lengths must be non-increasing: {rows}")

    @property
    def K(self) -> int:
        return sum(self.rows)

    @property
    def d(self) -> int:
        return len(self.rows)

    def shifted(self, amount: int) -> "YoungDiagram":
        """Add `amount` boxes to every row (negative amounts remove)."""
        return YoungDiagram(tuple(r + amount for r in self.rows))

    def __iter__(self):
        return iter(self.rows)

    def __str__(self) -> str:
        return "(" + ",".join(str(r) for r in self.rows) + ")"


@dataclass(frozen=True)
class IrrepBlock:
    """One block of the decomposition: diagram, dimension, multiplicity, weight."""

    diagram: YoungDiagram
    dim_rep: int
    mult: int
    weight: Fraction


@dataclass(frozen=True)
class TruncationSet:
    """Diagrams of K boxes whose last row is no shorter than K/d - J."""

    K: int
    d: int
    J: Fraction
    members: tuple[YoungDiagram, ...]


@dataclass(frozen=True)
class CompressionDims:
    """Dimension bookkeeping for packing N gate uses into one small system."""

    system_a_dim: int
    qubit_count: int
    round_trip_qubits: int
    dimension_bound: int


def enumerate_diagrams(K: int, d: int) -> list[YoungDiagram]:
    """All partitions of K into at most d parts, in descending lexicographic order.

    This is the canonical diagram order inherited by every index map downstream.
    """
    if K < 0 or d < 1:
        raise ValueError(f"need K >= 0 and d >= 1, got K={K}, d={d}")

    out: list[YoungDiagram] = []

    def fill(remaining: int, max_part: int, prefix: list[int]) -> None:
        slots = d - len(prefix)
        if slots == 0:
            if remaining == 0:
                out.append(YoungDiagram(tuple(prefix)))
            return
        lo = -(-remaining // slots)  # ceil: rows below are no longer than this one
        for part in range(min(max_part, remaining), lo - 1, -1):
            fill(remaining - part, part, prefix + [part])

    fill(K, K, [])
    return out


def _betas(rows: tuple[int, ...]) -> tuple[int, ...]:
    d = len(rows)
    return tuple(rows[i] + d - 1 - i for i in range(d))


def dim_rep(diagram: YoungDiagram | Sequence[int]) -> int:
    """Exact dimension of the unitary-group irrep labelled by the diagram.

    Weyl's product formula via the strictly decreasing shifted row lengths
    l_i = rows_i + d - i:  dim = prod_{i<j} (l_i - l_j) / prod_{i<j} (j - i).
    """
    rows = _rows(diagram)
    betas = _betas(rows)
    d = len(rows)
    num = 1
    den = 1
    for i in range(d):
        for j in range(i + 1, d):
            num *= betas[i] - betas[j]
            den *= j - i
    q, r = divmod(num, den)
    assert r == 0
    return q


def multiplicity(diagram: YoungDiagram | Sequence[int]) -> int:
    """Exact multiplicity of the block: the number of standard tableaux.

    Frobenius form of the hook-length count, with l_i = rows_i + d - i:
    K! * prod_{i<j}(l_i - l_j) / prod_i l_i!.
    """
    rows = _rows(diagram)
    betas = _betas(rows)
    d = len(rows)
    K = sum(rows)
    num = math.factorial(K)
    for i in range(d):
        for j in range(i + 1, d):
            num *= betas[i] - betas[j]
    den = 1
    for b in betas:
        den *= math.factorial(b)
    q, r = divmod(num, den)
    assert r == 0
    return q


def qubit_multiplicity_formula(diagram: YoungDiagram | Sequence[int]) -> int:
    """Two-row closed form (2j+1)/(K/2+j+1) * C(K, K/2+j), on diagram data.

    With rows (a, b) this reads (a-b+1) * C(a+b, a) / (a+1); exact integer.
    """
    a, b = _rows(diagram)
    num = (a - b + 1) * math.comb(a + b, a)
    q, r = divmod(num, a + 1)
    assert r == 0
    return q


def log_dim_rep(diagram: YoungDiagram | Sequence[int]) -> float:
    rows = _rows(diagram)
    betas = _betas(rows)
    d = len(rows)
    out = 0.0
    for i in range(d):
        for j in range(i + 1, d):
            out += math.log(betas[i] - betas[j]) - math.log(j - i)
    return out


def log_multiplicity(diagram: YoungDiagram | Sequence[int]) -> float:
    rows = _rows(diagram)
    betas = _betas(rows)
    d = len(rows)
    K = sum(rows)
    out = math.lgamma(K + 1)
    for i in range(d):
        for j in range(i + 1, d):
            out += math.log(betas[i] - betas[j])
    for b in betas:
        out -= math.lgamma(b + 1)
    return out


def log_weight(diagram: YoungDiagram | Sequence[int], d: int | None = None) -> float:
    """log of the block weight d_lambda * m_lambda / d^K."""
    rows = _rows(diagram)
    if d is None:
        d = len(rows)
    K = sum(rows)
    return log_dim_rep(rows) + log_multiplicity(rows) - K * math.log(d)


def weight(diagram: YoungDiagram | Sequence[int], d: int | None = None) -> Fraction:
    rows = _rows(diagram)
    if d is None:
        d = len(rows)
    return Fraction(dim_rep(rows) * multiplicity(rows), d ** sum(rows))


def schur_weyl_measure(K: int, d: int) -> list[IrrepBlock]:
    """All blocks of the K-fold tensor power with exact rational weights."""
    if K < 1:
        raise ValueError("need K >= 1")
    denom = d**K
    blocks = []
    for lam in enumerate_diagrams(K, d):
        dr = dim_rep(lam)
        m = multiplicity(lam)
        blocks.append(IrrepBlock(lam, dr, m, Fraction(dr * m, denom)))
    return blocks


def _as_fraction(J) -> Fraction:
    if isinstance(J, Fraction):
        return J
    if isinstance(J, int):
        return Fraction(J)
    return Fraction(J)  # floats convert exactly (halves are what we meet)


def truncation_set(K: int, d: int, J) -> TruncationSet:
    """Diagrams with last row >= K/d - J.  For d=2 this is the usual j <= J cut."""
    Jf = _as_fraction(J)
    if Jf < 0:
        raise ValueError("J must be non-negative")
    threshold = Fraction(K, d) - Jf
    members = tuple(
        lam for lam in enumerate_diagrams(K, d) if lam.rows[-1] >= threshold
    )
    return TruncationSet(K, d, Jf, members)


def in_truncation_set(diagram: YoungDiagram | Sequence[int], J) -> bool:
    rows = _rows(diagram)
    return rows[-1] >= Fraction(sum(rows), len(rows)) - _as_fraction(J)


def tail_exact_fraction(K: int, d: int, J) -> Fraction:
    """Exact measure of the complement of the truncation set."""
    Jf = _as_fraction(J)
    threshold = Fraction(K, d) - Jf
    num = 0
    for lam in enumerate_diagrams(K, d):
        if lam.rows[-1] < threshold:
            num += dim_rep(lam) * multiplicity(lam)
    return Fraction(num, d**K)


def _tail_logspace(K: int, d: int, J) -> float:
    Jf = _as_fraction(J)
    threshold = Fraction(K, d) - Jf
    logs = [
        log_weight(lam, d)
        for lam in enumerate_diagrams(K, d)
        if lam.rows[-1] < threshold
    ]
    if not logs:
        return 0.0
    top = max(logs)
    total = math.fsum(math.exp(x - top) for x in logs)
    return math.exp(top) * total


def tail_exact(K: int, d: int, J, exact_limit: int = EXACT_K_LIMIT) -> float:
    """Measure of the rejected diagrams; exact rationals for K <= exact_limit,
    log-space with compensated summation beyond."""
    if K <= exact_limit:
        return float(tail_exact_fraction(K, d, J))
    return _tail_logspace(K, d, J)


def tail_bound(K: int, d: int, J) -> float:
    """Closed-form concentration bound (K+1)^{d(d-1)/2} * exp(-2 J^2 / K)."""
    Jf = _as_fraction(J)
    exponent = (d * (d - 1) // 2) * math.log(K + 1) - 2.0 * float(Jf) ** 2 / K
    return math.exp(exponent)


def entanglement_fidelity_exact(
    K: int, d: int, J, exact_limit: int = EXACT_K_LIMIT
) -> float:
    """(kept weight)^2: the exact entanglement fidelity of the truncating encoder."""
    if K <= exact_limit:
        return float((1 - tail_exact_fraction(K, d, J)) ** 2)
    return (1.0 - _tail_logspace(K, d, J)) ** 2


def entanglement_fidelity_fraction(K: int, d: int, J) -> Fraction:
    return (1 - tail_exact_fraction(K, d, J)) ** 2


def fidelity_lower_bound(K: int, d: int, J) -> float:
    """1 - 2 (K+1)^{d(d-1)/2} exp(-2 J^2/K); may be negative at small sizes."""
    return 1.0 - 2.0 * tail_bound(K, d, J)


def ancilla_ratio_table(
    N: int, M: int, J, d: int
) -> list[tuple[YoungDiagram, int, int, Fraction]]:
    """Per-diagram (diagram', mult_N, mult_M, ratio) over the N-side truncation set.

    diagram' runs over the truncation set for N; the M-side diagram is the
    shift by (M-N)/d boxes per row.
    """
    if N < 1 or M < N:
        raise ValueError(f"need M >= N >= 1, got N={N}, M={M}")
    if (M - N) % d != 0:
        raise ValueError(
            f"M - N = {M - N} is not a multiple of d = {d}; adjust M so the "
            "row shift (M-N)/d is an integer"
        )
    Jf = _as_fraction(J)
    if Jf > Fraction(N, d):
        raise ValueError(f"J = {J} exceeds N/d = {Fraction(N, d)}")
    shift = (M - N) // d
    table = []
    for lamp in truncation_set(N, d, Jf).members:
        lam = lamp.shifted(shift)
        m_small = multiplicity(lamp)
        m_big = multiplicity(lam)
        table.append((lamp, m_small, m_big, Fraction(m_big, m_small)))
    return table


def min_ancilla_dim(N: int, M: int, J, d: int) -> int:
    """Smallest ancilla dimension allowing the rotation-commuting embedding.

    ceil of the maximum multiplicity ratio m_(shifted)/m_(small) over the
    N-side truncation set; exact integer arithmetic throughout.
    """
    if M == N:
        return 1
    table = ancilla_ratio_table(N, M, J, d)
    best = max(ratio for _, _, _, ratio in table)
    return math.ceil(best)


def min_ancilla_closed_form(N: int, M: int, J) -> int:
    """Two-row closed form evaluated at the truncation edge j = J (d = 2)."""
    J2 = _as_fraction(J) * 2
    if J2.denominator != 1:
        raise ValueError("2J must be an integer for the two-row closed form")
    tw = int(J2)
    if (N + tw) % 2 != 0 or (M + tw) % 2 != 0:
        raise ValueError("J must have the same parity as N/2 and M/2")
    num = (N + tw + 2) * math.comb(M, (M + tw) // 2)
    den = (M + tw + 2) * math.comb(N, (N + tw) // 2)
    return math.ceil(Fraction(num, den))


def compression_dims(N: int, d: int, J=None) -> CompressionDims:
    """Dimension of the representation-only system A and its qubit cost.

    J=None keeps every block (exact compression); otherwise only the
    truncation set.  dimension_bound is the closed-form cap
    (N+1)^{(d-1)(d/2+1)}.
    """
    if N < 1:
        raise ValueError("need N >= 1")
    if J is None:
        diagrams: Iterable[YoungDiagram] = enumerate_diagrams(N, d)
    else:
        diagrams = truncation_set(N, d, J).members
    da = sum(dim_rep(lam) for lam in diagrams)
    qubits = max(1, math.ceil(math.log2(da))) if da > 1 else 0
    bound = (N + 1) ** ((d - 1) * (d + 2) // 2)
    return CompressionDims(
        system_a_dim=da,
        qubit_count=qubits,
        round_trip_qubits=2 * qubits,
        dimension_bound=bound,
    )


def j_rule_sqrt(K: int, alpha: float) -> int:
    """Truncation from the square-root convention: ceil(sqrt(K^(1-alpha/4)))."""
    return math.ceil(math.sqrt(K ** (1.0 - alpha / 4.0)))


def j_rule_linear(K: int, alpha: float) -> int:
    """Truncation from the power-law convention: ceil(K^(1-alpha/4))."""
    return math.ceil(K ** (1.0 - alpha / 4.0))


@lru_cache(maxsize=64)
def _tail_numerators_by_last_row(K: int, d: int) -> tuple[tuple[int, int], ...]:
    """Total weight numerator (over d^K) grouped by last-row length."""
    acc: dict[int, int] = {}
    for lam in enumerate_diagrams(K, d):
        acc[lam.rows[-1]] = acc.get(lam.rows[-1], 0) + dim_rep(lam) * multiplicity(lam)
    return tuple(sorted(acc.items()))


def tail_exact_all_j(K: int, d: int) -> dict[int, Fraction]:
    """Exact tail for every integer J from 0 up to the first J with empty complement."""
    grouped = _tail_numerators_by_last_row(K, d)
    denom = d**K
    out: dict[int, Fraction] = {}
    J = 0
    while True:
        threshold = Fraction(K, d) - J
        num = sum(n for last, n in grouped if last < threshold)
        out[J] = Fraction(num, denom)
        if num == 0:
            break
        J += 1
    return out
