"""Explicit block-diagonalizing bases for tensor powers.

Two constructions: deterministic sequential angular-momentum coupling for
qubits, and symmetric-group character projectors followed by a
double-commutant factorization for general local dimension.  Both produce a
dense unitary whose columns are indexed by (diagram, r, m): r runs over the
rotation block, m over its multiplicity copies.
"""

from __future__ import annotations

import itertools
import json
import math
import os
import struct
from dataclasses import dataclass
from functools import lru_cache
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .tensorcore import ResourceGuardError, haar_unitary, kron_power, substream
from .young import YoungDiagram, dim_rep, enumerate_diagrams, multiplicity

# Permutation sums touch d^K * K! scattered entries; constructions beyond
# this budget are refused rather than silently thrashing.
DEFAULT_GROUP_BUDGET = 30_000_000

MAX_CHARACTER_N = 8
MAX_QUBIT_K = 12

CACHE_ENV_VAR = "GATELAB_SCHUR_CACHE"
_CACHE_MAGIC = b"GLSB1\x00"


class DegenerateSpectrumError(RuntimeError):
    """Random spectra collided beyond the retry budget."""


@dataclass(frozen=True, eq=False)
class BlockInfo:
    diagram: YoungDiagram
    dim: int
    mult: int
    offset: int

    @property
    def size(self) -> int:
        return self.dim * self.mult


@dataclass(frozen=True, eq=False)
class SchurBasis:
    """Unitary change of basis with the (diagram, r, m) -> column index map.

    Column layout inside a block is r * mult + m, so conjugating a tensor
    power of a gate produces blocks of the form U_block (x) identity.
    """

    K: int
    d: int
    matrix: np.ndarray
    blocks: tuple[BlockInfo, ...]

    def __post_init__(self) -> None:
        m = np.asarray(self.matrix)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def block(self, diagram) -> BlockInfo:
        rows = tuple(diagram.rows) if isinstance(diagram, YoungDiagram) else tuple(diagram)
        for b in self.blocks:
            if b.diagram.rows == rows:
                return b
        raise KeyError(f"no block for diagram {rows}")

    def index(self, diagram, r: int, m: int) -> int:
        b = self.block(diagram)
        if not (0 <= r < b.dim and 0 <= m < b.mult):
            raise IndexError(f"(r={r}, m={m}) outside block ({b.dim}, {b.mult})")
        return b.offset + r * b.mult + m

    def column(self, diagram, r: int, m: int) -> np.ndarray:
        return self.matrix[:, self.index(diagram, r, m)]

    def block_slice(self, diagram) -> slice:
        b = self.block(diagram)
        return slice(b.offset, b.offset + b.size)

    def block_columns(self, diagram) -> np.ndarray:
        return self.matrix[:, self.block_slice(diagram)]


@dataclass(frozen=True, eq=False)
class IsotypicProjector:
    """Projector onto the full (rotation x multiplicity) component of one diagram."""

    diagram: YoungDiagram
    matrix: np.ndarray


# ---------------------------------------------------------------------------
# qubit construction: sequential spin-1/2 coupling


def _couple_up(mat: np.ndarray, twoj: int) -> np.ndarray:
    """Couple one extra spin-1/2, raising twoj by one.

    Columns are ordered by the magnetic number descending; the new factor is
    appended as the least significant tensor slot.
    """
    dim = mat.shape[0]
    out = np.zeros((2 * dim, twoj + 2))
    t = np.arange(twoj + 1)
    cu = np.sqrt((twoj + 1 - t) / (twoj + 1))
    cd = np.sqrt((t + 1.0) / (twoj + 1))
    out[0::2, : twoj + 1] = mat * cu[np.newaxis, :]
    out[1::2, 1:] = mat * cd[np.newaxis, :]
    return out


def _couple_down(mat: np.ndarray, twoj: int) -> np.ndarray:
    """Couple one extra spin-1/2, lowering twoj by one (Condon-Shortley signs)."""
    dim = mat.shape[0]
    out = np.zeros((2 * dim, twoj))
    t = np.arange(twoj)
    cu = -np.sqrt((t + 1.0) / (twoj + 1))
    cd = np.sqrt((twoj - t) / (twoj + 1.0))
    out[0::2, :] = mat[:, 1:] * cu[np.newaxis, :]
    out[1::2, :] = mat[:, :twoj] * cd[np.newaxis, :]
    return out


@lru_cache(maxsize=None)
def qubit_schur_basis(K: int) -> SchurBasis:
    """Total-angular-momentum basis for K qubits by iterated coupling.

    Blocks follow the canonical diagram order (descending lexicographic, so
    descending j); within a block r indexes the magnetic number descending
    from +j and m enumerates coupling paths in lexicographic order.
    """
    if not (1 <= K <= MAX_QUBIT_K):
        raise ValueError(f"K={K} outside the supported range 1..{MAX_QUBIT_K}")
    paths: list[tuple[tuple[int, ...], np.ndarray]] = [((1,), np.eye(2))]
    for _ in range(K - 1):
        nxt = []
        for path, mat in paths:
            twoj = path[-1]
            nxt.append((path + (twoj + 1,), _couple_up(mat, twoj)))
            if twoj >= 1:
                nxt.append((path + (twoj - 1,), _couple_down(mat, twoj)))
        paths = nxt

    by_twoj: dict[int, list[tuple[tuple[int, ...], np.ndarray]]] = {}
    for path, mat in paths:
        by_twoj.setdefault(path[-1], []).append((path, mat))

    dim = 2**K
    basis = np.zeros((dim, dim))
    blocks = []
    offset = 0
    for lam in enumerate_diagrams(K, 2):
        twoj = lam.rows[0] - lam.rows[1]
        entries = sorted(by_twoj[twoj], key=lambda pm: pm[0])
        d_rep = twoj + 1
        mult = len(entries)
        for m_idx, (_, mat) in enumerate(entries):
            for r in range(d_rep):
                basis[:, offset + r * mult + m_idx] = mat[:, r]
        blocks.append(BlockInfo(lam, d_rep, mult, offset))
        offset += d_rep * mult
    assert offset == dim
    result = SchurBasis(K, 2, basis.astype(complex), tuple(blocks))
    err = np.max(np.abs(result.matrix.conj().T @ result.matrix - np.eye(dim)))
    if err > 1e-12:
        raise RuntimeError(f"coupling produced a non-unitary basis (err {err:.2e})")
    return result


# ---------------------------------------------------------------------------
# symmetric group characters (border-strip recursion on shifted row lengths)


def _trim(rows) -> tuple[int, ...]:
    return tuple(r for r in rows if r > 0)


@lru_cache(maxsize=None)
def _character(lam: tuple[int, ...], alpha: tuple[int, ...]) -> int:
    if not alpha:
        return 1
    t = alpha[0]
    rest = alpha[1:]
    r = len(lam)
    betas = [lam[i] + r - 1 - i for i in range(r)]
    bset = set(betas)
    total = 0
    for b in betas:
        nb = b - t
        if nb < 0 or nb in bset:
            continue
        height = sum(1 for bb in betas if nb < bb < b)
        new = sorted((bb for bb in betas if bb != b), reverse=True)
        new = sorted(new + [nb], reverse=True)
        new_lam = _trim(new[i] - (r - 1 - i) for i in range(r))
        total += (-1) ** height * _character(new_lam, rest)
    return total


def character_value(partition: Sequence[int], cycle_type: Sequence[int]) -> int:
    """Exact character of the symmetric-group irrep at the given cycle type."""
    lam = _trim(sorted(partition, reverse=True))
    alpha = _trim(sorted(cycle_type, reverse=True))
    if sum(lam) != sum(alpha):
        raise ValueError("partition and cycle type must have the same size")
    return _character(lam, alpha)


def class_size(cycle_type: Sequence[int]) -> int:
    """Number of permutations with the given cycle type."""
    alpha = _trim(sorted(cycle_type, reverse=True))
    n = sum(alpha)
    z = 1
    for k in set(alpha):
        mk = alpha.count(k)
        z *= k**mk * math.factorial(mk)
    return math.factorial(n) // z


@dataclass(frozen=True, eq=False)
class CharacterTable:
    n: int
    partitions: tuple[tuple[int, ...], ...]
    class_sizes: Mapping[tuple[int, ...], int]
    values: Mapping[tuple[tuple[int, ...], tuple[int, ...]], int]

    def chi(self, partition, cycle_type) -> int:
        return self.values[(_trim(tuple(partition)), _trim(tuple(cycle_type)))]


@lru_cache(maxsize=None)
def sn_character_table(n: int) -> CharacterTable:
    """Full character table of the symmetric group on n letters."""
    if not (1 <= n <= MAX_CHARACTER_N):
        raise ValueError(f"character table supported for 1 <= n <= {MAX_CHARACTER_N}")
    partitions = tuple(_trim(lam.rows) for lam in enumerate_diagrams(n, n))
    sizes = {alpha: class_size(alpha) for alpha in partitions}
    values = {
        (lam, alpha): _character(lam, alpha)
        for lam in partitions
        for alpha in partitions
    }
    return CharacterTable(
        n, partitions, MappingProxyType(sizes), MappingProxyType(values)
    )


# ---------------------------------------------------------------------------
# permutation action on tensor indices


def _digit_table(d: int, K: int) -> np.ndarray:
    idx = np.arange(d**K)
    digits = np.empty((K, d**K), dtype=np.int64)
    for a in range(K):
        digits[a] = (idx // d ** (K - 1 - a)) % d
    return digits


def _cycle_type_of(perm: Sequence[int]) -> tuple[int, ...]:
    seen = [False] * len(perm)
    parts = []
    for i in range(len(perm)):
        if seen[i]:
            continue
        length = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
            length += 1
        parts.append(length)
    return tuple(sorted(parts, reverse=True))


def permutation_operator(perm: Sequence[int], d: int) -> np.ndarray:
    """Matrix moving the vector in tensor slot a to slot perm[a]."""
    K = len(perm)
    D = d**K
    digits = _digit_table(d, K)
    place = d ** np.arange(K - 1, -1, -1)
    rows = place[np.asarray(perm)] @ digits
    out = np.zeros((D, D))
    out[rows, np.arange(D)] = 1.0
    return out


def _check_group_budget(d: int, K: int, budget: int) -> None:
    cost = d**K * math.factorial(K)
    if cost > budget:
        raise ResourceGuardError(
            f"permutation sum needs {cost:.2e} scattered writes, over the "
            f"budget {budget:.2e}; lower K or raise the budget"
        )


def _sum_over_permutations(d: int, K: int, coeff_rows: np.ndarray) -> list[np.ndarray]:
    """Dense matrices sum_sigma c[i, sigma] P(sigma), one per coefficient row."""
    D = d**K
    digits = _digit_table(d, K)
    place = d ** np.arange(K - 1, -1, -1)
    cols = np.arange(D)
    accs = [np.zeros((D, D)) for _ in range(coeff_rows.shape[0])]
    for p_idx, perm in enumerate(itertools.permutations(range(K))):
        rows = place[np.asarray(perm)] @ digits
        for i, acc in enumerate(accs):
            acc[rows, cols] += coeff_rows[i, p_idx]
    return accs


@lru_cache(maxsize=3)
def isotypic_projectors(
    d: int, K: int, budget: int = DEFAULT_GROUP_BUDGET
) -> Mapping[YoungDiagram, np.ndarray]:
    """All isotypic projectors of the K-fold tensor power of C^d at once."""
    _check_group_budget(d, K, budget)
    table = sn_character_table(K)
    diagrams = enumerate_diagrams(K, d)
    nperm = math.factorial(K)
    coeffs = np.empty((len(diagrams), nperm))
    chi_cache: dict[tuple[int, ...], list[int]] = {}
    for p_idx, perm in enumerate(itertools.permutations(range(K))):
        ct = _cycle_type_of(perm)
        if ct not in chi_cache:
            chi_cache[ct] = [table.chi(_trim(lam.rows), ct) for lam in diagrams]
        coeffs[:, p_idx] = chi_cache[ct]
    mats = _sum_over_permutations(d, K, coeffs)
    out = {}
    for lam, mat in zip(diagrams, mats):
        f_lam = multiplicity(lam)
        proj = mat * (f_lam / nperm)
        proj.setflags(write=False)
        out[lam] = proj
    return MappingProxyType(out)


def isotypic_projector(
    diagram, d: int, K: int, budget: int = DEFAULT_GROUP_BUDGET
) -> IsotypicProjector:
    """Projector for one diagram; zero when it has more than d nonzero rows."""
    rows = tuple(diagram.rows) if isinstance(diagram, YoungDiagram) else tuple(diagram)
    if sum(rows) != K:
        raise ValueError(f"diagram has {sum(rows)} boxes, expected {K}")
    trimmed = _trim(rows)
    if len(trimmed) > d:
        zero = np.zeros((d**K, d**K))
        zero.setflags(write=False)
        return IsotypicProjector(YoungDiagram(rows), zero)
    padded = YoungDiagram(trimmed + (0,) * (d - len(trimmed)))
    return IsotypicProjector(padded, isotypic_projectors(d, K, budget)[padded])


# ---------------------------------------------------------------------------
# double-commutant factorization


def _group_eigenvalues(vals: np.ndarray, group_dim: int, count: int) -> list[np.ndarray]:
    """Split sorted eigenvalues into `count` clusters of exactly group_dim."""
    spread = max(vals[-1] - vals[0], 1.0)
    gaps = np.diff(vals)
    boundaries = [i for i, g in enumerate(gaps) if g > 1e-6 * spread]
    groups = []
    start = 0
    for b in boundaries:
        groups.append(np.arange(start, b + 1))
        start = b + 1
    groups.append(np.arange(start, len(vals)))
    if len(groups) != count or any(len(g) != group_dim for g in groups):
        raise DegenerateSpectrumError(
            f"eigenvalue clusters {[len(g) for g in groups]} do not match "
            f"{count} copies of dimension {group_dim}"
        )
    return groups


def _factor_once(
    d: int,
    K: int,
    projectors: Mapping[YoungDiagram, np.ndarray],
    rng: np.random.Generator,
) -> SchurBasis:
    D = d**K
    nperm = math.factorial(K)
    coeffs = rng.standard_normal((2, nperm))
    raw_h, raw_x = _sum_over_permutations(d, K, coeffs)
    H = (raw_h + raw_h.T) / 2.0

    A = np.zeros((D, D), dtype=complex)
    for _ in range(3):
        u = haar_unitary(d, rng)
        c = rng.standard_normal() + 1j * rng.standard_normal()
        A += c * kron_power(u, K)
    A = A + A.conj().T

    basis = np.zeros((D, D), dtype=complex)
    blocks = []
    offset = 0
    for lam in enumerate_diagrams(K, d):
        P = projectors[lam]
        d_rep = dim_rep(lam)
        mult = multiplicity(lam)
        size = d_rep * mult
        vals, vecs = np.linalg.eigh(P)
        if vals[-size] < 0.5 or (D > size and vals[-size - 1] > 0.5):
            raise RuntimeError(f"projector rank mismatch for {lam}")
        Q = vecs[:, -size:]

        hvals, hvecs = np.linalg.eigh(Q.T @ H @ Q)
        groups = _group_eigenvalues(hvals, d_rep, mult)

        Ab = Q.T @ A @ Q
        E0 = hvecs[:, groups[0]]
        avals, avecs = np.linalg.eigh(E0.T @ Ab @ E0)
        if d_rep > 1:
            aspread = max(avals[-1] - avals[0], 1.0)
            if np.diff(avals).min() < 1e-6 * aspread:
                raise DegenerateSpectrumError("gate-algebra spectrum too degenerate")
        V0 = E0 @ avecs

        Xb = Q.T @ raw_x @ Q
        copies = [V0]
        for g in groups[1:]:
            Ek = hvecs[:, g]
            Wk = Ek @ (Ek.T @ (Xb @ V0))
            norms = np.linalg.norm(Wk, axis=0)
            if norms.min() < 1e-8:
                raise DegenerateSpectrumError("multiplicity intertwiner nearly vanishes")
            copies.append(Wk / norms[np.newaxis, :])

        for m_idx, W in enumerate(copies):
            cols = Q @ W
            for r in range(d_rep):
                basis[:, offset + r * mult + m_idx] = cols[:, r]
        blocks.append(BlockInfo(lam, d_rep, mult, offset))
        offset += size
    assert offset == D

    err = np.max(np.abs(basis.conj().T @ basis - np.eye(D)))
    if err > 1e-9:
        raise DegenerateSpectrumError(f"assembled basis not unitary (err {err:.2e})")
    return SchurBasis(K, d, basis, tuple(blocks))


def factor_isotypic(
    d: int,
    K: int,
    *,
    seed: int = 0,
    projectors: Mapping[YoungDiagram, np.ndarray] | None = None,
    budget: int = DEFAULT_GROUP_BUDGET,
    max_retries: int = 6,
) -> SchurBasis:
    """Factor every isotypic block into rotation x multiplicity using generic
    commutant elements; deterministic given the seed."""
    if projectors is None:
        projectors = isotypic_projectors(d, K, budget)
    last: Exception | None = None
    for attempt in range(max_retries):
        rng = substream(seed, 0x5C, d, K, attempt)
        try:
            return _factor_once(d, K, projectors, rng)
        except DegenerateSpectrumError as exc:
            last = exc
    raise DegenerateSpectrumError(
        f"no usable spectrum after {max_retries} attempts: {last}"
    )


# ---------------------------------------------------------------------------
# dispatch and disk cache


def save_basis(basis: SchurBasis, path: str) -> None:
    """Binary layout: magic, uint64-LE header length, JSON header, then the
    matrix as little-endian complex128 in C (row-major) order."""
    header = {
        "version": 1,
        "K": basis.K,
        "d": basis.d,
        "blocks": [
            [list(b.diagram.rows), b.dim, b.mult, b.offset] for b in basis.blocks
        ],
        "dtype": "<c16",
        "order": "C",
    }
    payload = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(struct.pack("<Q", len(payload)))
        fh.write(payload)
        fh.write(np.ascontiguousarray(basis.matrix, dtype="<c16").tobytes())


def load_basis(path: str) -> SchurBasis:
    with open(path, "rb") as fh:
        magic = fh.read(len(_CACHE_MAGIC))
        if magic != _CACHE_MAGIC:
            raise ValueError(f"{path} is not a basis cache file")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        dim = header["d"] ** header["K"]
        raw = fh.read(dim * dim * 16)
    matrix = np.frombuffer(raw, dtype="<c16").reshape(dim, dim).astype(complex)
    blocks = tuple(
        BlockInfo(YoungDiagram(tuple(rows)), bdim, mult, off)
        for rows, bdim, mult, off in header["blocks"]
    )
    return SchurBasis(header["K"], header["d"], matrix, blocks)


def _cache_path(cache_dir: str, K: int, d: int) -> str:
    return os.path.join(cache_dir, f"schur_d{d}_K{K}_v1.gsb")


@lru_cache(maxsize=8)
def schur_basis(K: int, d: int, seed: int = 0, cache_dir: str | None = None) -> SchurBasis:
    """Basis for (K, d) from the coupling construction (d=2) or the
    factorization (d>=3), with an optional on-disk cache."""
    if cache_dir is None:
        cache_dir = os.environ.get(CACHE_ENV_VAR)
    if cache_dir:
        path = _cache_path(cache_dir, K, d)
        if os.path.exists(path):
            return load_basis(path)
    basis = qubit_schur_basis(K) if d == 2 else factor_isotypic(d, K, seed=seed)
    if cache_dir:
        os.makedirs(cache_dir, exist_ok=True)
        save_basis(basis, _cache_path(cache_dir, K, d))
    return basis


# ---------------------------------------------------------------------------
# diagnostics shared by tests and the CLI


def conjugate_power(basis: SchurBasis, u_single: np.ndarray) -> np.ndarray:
    """The tensor power of a single-system gate, expressed in the basis."""
    return basis.matrix.conj().T @ kron_power(u_single, basis.K) @ basis.matrix


def offblock_norm(basis: SchurBasis, conjugated: np.ndarray) -> float:
    """Frobenius norm of everything outside the block-diagonal pattern."""
    leak = conjugated.copy()
    for b in basis.blocks:
        s = slice(b.offset, b.offset + b.size)
        leak[s, s] = 0.0
    return float(np.linalg.norm(leak))


def block_matrix(
    basis: SchurBasis, conjugated: np.ndarray, diagram, m: int = 0
) -> np.ndarray:
    """The rotation-block matrix read off at multiplicity slot m."""
    b = basis.block(diagram)
    idx = [b.offset + r * b.mult + m for r in range(b.dim)]
    return conjugated[np.ix_(idx, idx)]


def multiplicity_consistency(
    basis: SchurBasis, conjugated: np.ndarray, diagram
) -> float:
    """Max deviation of the per-m rotation blocks from the m=0 copy."""
    b = basis.block(diagram)
    ref = block_matrix(basis, conjugated, diagram, 0)
    worst = 0.0
    for m in range(1, b.mult):
        dev = np.max(np.abs(block_matrix(basis, conjugated, diagram, m) - ref))
        worst = max(worst, float(dev))
    return worst
