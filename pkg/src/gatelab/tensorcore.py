"""Dense complex linear algebra for multi-system states, gates and channels.

Everything is complex double precision numpy.  Values are immutable after
construction and all randomness flows through explicit generator streams, so
any operation may be called concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

# Default construction tolerances (overridable per call where it matters).
NORM_ATOL = 1e-12
UNITARY_ATOL = 1e-12
HERM_ATOL = 1e-12
EIG_ATOL = 1e-10
TP_ATOL = 1e-10
ISOMETRY_ATOL = 1e-10

PAULI_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
PAULI_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
PAULI_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class ResourceGuardError(RuntimeError):
    """A requested construction exceeds the configured size budget."""


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent child generator for (seed, key).

    Derivation is counter-based through SeedSequence spawn keys, so per-sample
    streams are reproducible and independent of evaluation order.
    """
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalized complex amplitude vector."""

    amplitudes: np.ndarray

    def __post_init__(self) -> None:
        amps = _frozen(np.asarray(self.amplitudes).reshape(-1))
        if abs(np.linalg.norm(amps) - 1.0) > 1e-10:
            raise ValueError("state vector is not normalized")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def density(self) -> "DensityMatrix":
        return DensityMatrix(np.outer(self.amplitudes, self.amplitudes.conj()))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite matrix."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        m = _frozen(np.asarray(self.matrix))
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(m - m.conj().T)) > HERM_ATOL * max(1.0, np.max(np.abs(m))):
            raise ValueError("density matrix is not Hermitian")
        if abs(np.trace(m).real - 1.0) > 1e-10:
            raise ValueError(f"trace is {np.trace(m).real}, expected 1")
        if np.linalg.eigvalsh(m).min() < -EIG_ATOL:
            raise ValueError("density matrix has a significantly negative eigenvalue")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class GateParams:
    """A point of the unitary group: explicit matrix, plus (theta, axis) for d=2."""

    d: int
    matrix: np.ndarray
    theta: float | None = None
    axis: np.ndarray | None = None

    def __post_init__(self) -> None:
        u = _frozen(np.asarray(self.matrix))
        if u.shape != (self.d, self.d):
            raise ValueError(f"expected {self.d}x{self.d} matrix")
        if np.max(np.abs(u.conj().T @ u - np.eye(self.d))) > 1e-11:
            raise ValueError("gate matrix is not unitary")
        if abs(abs(np.linalg.det(u)) - 1.0) > 1e-10:
            raise ValueError("gate determinant must have unit modulus")
        object.__setattr__(self, "matrix", u)
        if self.axis is not None:
            ax = np.asarray(self.axis, dtype=float)
            if abs(np.linalg.norm(ax) - 1.0) > NORM_ATOL * 10:
                raise ValueError("rotation axis must be a unit vector")
            ax.setflags(write=False)
            object.__setattr__(self, "axis", ax)

    @classmethod
    def from_matrix(cls, u: np.ndarray) -> "GateParams":
        u = np.asarray(u)
        return cls(d=u.shape[0], matrix=u)

    @classmethod
    def from_rotation(cls, theta: float, axis: Sequence[float]) -> "GateParams":
        """exp(-i theta n.sigma/2): rotation by theta around the unit axis n."""
        ax = np.asarray(axis, dtype=float)
        ax = ax / np.linalg.norm(ax)
        ns = ax[0] * PAULI_X + ax[1] * PAULI_Y + ax[2] * PAULI_Z
        u = math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * ns
        return cls(d=2, matrix=u, theta=float(theta), axis=ax)

    @classmethod
    def phase_gate(cls, *phases: float) -> "GateParams":
        """diag(1, e^{-i theta_1}, ..., e^{-i theta_{d-1}})."""
        diag = np.concatenate(([1.0], np.exp(-1j * np.asarray(phases, dtype=float))))
        return cls(d=diag.size, matrix=np.diag(diag))


@dataclass(frozen=True, eq=False)
class KrausChannel:
    """Completely positive trace-preserving map given by its Kraus operators."""

    in_dim: int
    out_dim: int
    kraus_ops: tuple[np.ndarray, ...]

    def __post_init__(self) -> None:
        ops = tuple(_frozen(k) for k in self.kraus_ops)
        if not ops:
            raise ValueError("need at least one Kraus operator")
        for k in ops:
            if k.shape != (self.out_dim, self.in_dim):
                raise ValueError(
                    f"Kraus operator shape {k.shape} != ({self.out_dim}, {self.in_dim})"
                )
        total = sum(k.conj().T @ k for k in ops)
        if np.max(np.abs(total - np.eye(self.in_dim))) > TP_ATOL:
            raise ValueError("Kraus operators do not preserve trace")
        object.__setattr__(self, "kraus_ops", ops)

    @classmethod
    def identity(cls, dim: int) -> "KrausChannel":
        return cls(dim, dim, (np.eye(dim, dtype=complex),))

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "KrausChannel":
        u = np.asarray(u, dtype=complex)
        return cls(u.shape[1], u.shape[0], (u,))


@dataclass(frozen=True, eq=False)
class Isometry:
    """Inner-product preserving embedding V: C^in -> C^out."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        v = _frozen(np.asarray(self.matrix))
        if v.ndim != 2 or v.shape[0] < v.shape[1]:
            raise ValueError("isometry needs out_dim >= in_dim")
        if np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1]))) > ISOMETRY_ATOL:
            raise ValueError("columns are not orthonormal")
        object.__setattr__(self, "matrix", v)

    @property
    def in_dim(self) -> int:
        return self.matrix.shape[1]

    @property
    def out_dim(self) -> int:
        return self.matrix.shape[0]


# ---------------------------------------------------------------------------
# elementary operations


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return np.kron(np.asarray(a), np.asarray(b))


def kron_all(mats: Sequence[np.ndarray]) -> np.ndarray:
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = np.kron(out, np.asarray(m))
    return out


def kron_power(a: np.ndarray, k: int) -> np.ndarray:
    if k < 1:
        raise ValueError("need k >= 1")
    return kron_all([a] * k)


def apply_channel(c: KrausChannel, rho: DensityMatrix) -> DensityMatrix:
    if rho.dim != c.in_dim:
        raise ValueError(f"state dim {rho.dim} != channel input dim {c.in_dim}")
    out = np.zeros((c.out_dim, c.out_dim), dtype=complex)
    for k in c.kraus_ops:
        out += k @ rho.matrix @ k.conj().T
    return DensityMatrix(out)


def apply_channel_to_pure(c: KrausChannel, psi: PureState) -> DensityMatrix:
    """Channel output for a pure input, via Kraus action on the vector."""
    if psi.dim != c.in_dim:
        raise ValueError("dimension mismatch")
    out = np.zeros((c.out_dim, c.out_dim), dtype=complex)
    for k in c.kraus_ops:
        v = k @ psi.amplitudes
        out += np.outer(v, v.conj())
    return DensityMatrix(out)


def _partial_trace_array(
    m: np.ndarray, dims: Sequence[int], keep: Sequence[int]
) -> np.ndarray:
    dims = list(dims)
    n = len(dims)
    if int(np.prod(dims)) != m.shape[0]:
        raise ValueError(f"factor dims {dims} do not multiply to {m.shape[0]}")
    keep = sorted(set(keep))
    if any(i < 0 or i >= n for i in keep):
        raise ValueError("keep indices out of range")
    t = m.reshape(dims + dims)
    traced = [i for i in range(n) if i not in keep]
    for count, ax in enumerate(sorted(traced)):
        eff = ax - count  # axes already removed shift everything left
        rem = t.ndim // 2
        t = np.trace(t, axis1=eff, axis2=eff + rem)
    dkeep = int(np.prod([dims[i] for i in keep])) if keep else 1
    return t.reshape(dkeep, dkeep)


def partial_trace(
    rho: DensityMatrix, dims: Sequence[int], keep: Sequence[int]
) -> DensityMatrix:
    """Reduced state on the kept tensor factors (factor 0 is the leftmost)."""
    return DensityMatrix(_partial_trace_array(rho.matrix, dims, keep))


def permute_factors(
    m: np.ndarray, dims: Sequence[int], perm: Sequence[int]
) -> np.ndarray:
    """Reorder tensor factors of a matrix: new slot i holds old factor perm[i]."""
    dims = list(dims)
    n = len(dims)
    perm = list(perm)
    t = m.reshape(dims + dims)
    t = np.transpose(t, perm + [n + p for p in perm])
    dtot = int(np.prod(dims))
    return t.reshape(dtot, dtot)


def permute_vector_factors(
    v: np.ndarray, dims: Sequence[int], perm: Sequence[int]
) -> np.ndarray:
    t = v.reshape(list(dims))
    return np.transpose(t, list(perm)).reshape(-1)


# ---------------------------------------------------------------------------
# sampling


def haar_state(dim: int, rng: np.random.Generator) -> PureState:
    """Uniformly random pure state from a normalized complex Gaussian vector."""
    z = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return PureState(z / np.linalg.norm(z))


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary: QR of a complex Gaussian matrix with the
    diagonal phase correction that makes the distribution exactly uniform."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases[np.newaxis, :]


def random_su2(rng: np.random.Generator) -> GateParams:
    """Haar-random SU(2) element with its rotation angle and axis extracted."""
    u = haar_unitary(2, rng)
    det = np.linalg.det(u)
    u = u * np.exp(-0.5j * np.angle(det))
    alpha = float(np.clip(np.trace(u).real / 2.0, -1.0, 1.0))
    theta = 2.0 * math.acos(alpha)
    s = math.sin(theta / 2.0)
    if s < 1e-12:
        axis = np.array([0.0, 0.0, 1.0])
    else:
        axis = np.array(
            [
                (1j * np.trace(PAULI_X @ u) / (2 * s)).real,
                (1j * np.trace(PAULI_Y @ u) / (2 * s)).real,
                (1j * np.trace(PAULI_Z @ u) / (2 * s)).real,
            ]
        )
        axis = axis / np.linalg.norm(axis)
    return GateParams(d=2, matrix=u, theta=theta, axis=axis)


def haar_gate(d: int, rng: np.random.Generator) -> GateParams:
    """Haar-random gate of dimension d (SU(2) parameters attached when d=2)."""
    if d == 2:
        return random_su2(rng)
    return GateParams.from_matrix(haar_unitary(d, rng))


# ---------------------------------------------------------------------------
# metrics


def fidelity(psi: PureState, rho: DensityMatrix) -> float:
    if psi.dim != rho.dim:
        raise ValueError("dimension mismatch")
    val = (psi.amplitudes.conj() @ rho.matrix @ psi.amplitudes).real
    return float(min(1.0, max(0.0, val)))


def trace_distance(a: DensityMatrix, b: DensityMatrix) -> float:
    if a.dim != b.dim:
        raise ValueError("dimension mismatch")
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(a.matrix - b.matrix))))


def max_entangled(dim: int) -> PureState:
    """(1/sqrt(dim)) sum_i |i>|i>."""
    v = np.zeros(dim * dim, dtype=complex)
    v[:: dim + 1] = 1.0 / math.sqrt(dim)
    return PureState(v)


def choi_state(c: KrausChannel) -> DensityMatrix:
    """(channel x identity) applied to the maximally entangled input.

    Output factor order: (channel output, untouched copy).
    """
    d = c.in_dim
    out = np.zeros((c.out_dim * d, c.out_dim * d), dtype=complex)
    for k in c.kraus_ops:
        v = k.reshape(-1) / math.sqrt(d)  # (K x I)|Phi> in row-major layout
        out += np.outer(v, v.conj())
    return DensityMatrix(out)


def choi_distance(c1: KrausChannel, c2: KrausChannel) -> float:
    if (c1.in_dim, c1.out_dim) != (c2.in_dim, c2.out_dim):
        raise ValueError("channels must share input and output dimensions")
    return trace_distance(choi_state(c1), choi_state(c2))


def entanglement_fidelity(c: KrausChannel) -> float:
    """Overlap of the channel's output on half a maximally entangled state
    with the input: sum_k |tr K_k|^2 / dim^2."""
    if c.in_dim != c.out_dim:
        raise ValueError("entanglement fidelity needs equal input/output dims")
    d = c.in_dim
    total = sum(abs(np.trace(k)) ** 2 for k in c.kraus_ops)
    return float(total) / d**2


def average_fidelity_from_entanglement(fe: float, dim: int) -> float:
    """Haar-average pure-state fidelity of a channel from its entanglement
    fidelity: (dim*Fe + 1)/(dim + 1)."""
    return (dim * fe + 1.0) / (dim + 1.0)


# ---------------------------------------------------------------------------
# composition


def choi_matrix(c: KrausChannel) -> np.ndarray:
    """Unnormalized Choi matrix sum_k vec(K_k) vec(K_k)^dag (row-major vec)."""
    n = c.out_dim * c.in_dim
    choi = np.zeros((n, n), dtype=complex)
    for k in c.kraus_ops:
        v = k.reshape(-1)
        choi += np.outer(v, v.conj())
    return choi


def kraus_from_choi(
    choi: np.ndarray, in_dim: int, out_dim: int, tol: float = 1e-12
) -> tuple[np.ndarray, ...]:
    vals, vecs = np.linalg.eigh(choi)
    cut = tol * max(float(vals.max()), 1.0)
    return tuple(
        (vecs[:, i] * math.sqrt(vals[i])).reshape(out_dim, in_dim)
        for i in range(len(vals))
        if vals[i] > cut
    )


def kraus_to_super(c: KrausChannel) -> np.ndarray:
    """Matrix acting on row-major vectorized density matrices."""
    n_out = c.out_dim**2
    n_in = c.in_dim**2
    s = np.zeros((n_out, n_in), dtype=complex)
    for k in c.kraus_ops:
        s += np.kron(k, k.conj())
    return s


def _super_to_choi(s: np.ndarray, in_dim: int, out_dim: int) -> np.ndarray:
    t = s.reshape(out_dim, out_dim, in_dim, in_dim)
    return t.transpose(0, 2, 1, 3).reshape(out_dim * in_dim, out_dim * in_dim)


def compress_kraus(c: KrausChannel, tol: float = 1e-12) -> KrausChannel:
    """Minimal Kraus representation via the eigendecomposition of the Choi matrix."""
    ops = kraus_from_choi(choi_matrix(c), c.in_dim, c.out_dim, tol)
    return KrausChannel(c.in_dim, c.out_dim, ops)


def compose(
    second: KrausChannel, first: KrausChannel, auto_compress: bool = True
) -> KrausChannel:
    """Channel running `first` then `second`.

    Small products multiply Kraus lists directly; large ones go through the
    superoperator representation, then back to a minimal Kraus list.
    """
    if first.out_dim != second.in_dim:
        raise ValueError(
            f"cannot compose: first outputs dim {first.out_dim}, "
            f"second expects {second.in_dim}"
        )
    n_prod = len(first.kraus_ops) * len(second.kraus_ops)
    if n_prod > max(4096, 4 * first.in_dim * second.out_dim):
        s = kraus_to_super(second) @ kraus_to_super(first)
        choi = _super_to_choi(s, first.in_dim, second.out_dim)
        ops = kraus_from_choi(choi, first.in_dim, second.out_dim)
        return KrausChannel(first.in_dim, second.out_dim, ops)
    ops = tuple(k2 @ k1 for k2 in second.kraus_ops for k1 in first.kraus_ops)
    out = KrausChannel(first.in_dim, second.out_dim, ops)
    if auto_compress and len(ops) > first.in_dim * second.out_dim:
        out = compress_kraus(out)
    return out


def conjugate_channel(c: KrausChannel, u_after: np.ndarray) -> KrausChannel:
    """Channel followed by the unitary u_after."""
    ops = tuple(u_after @ k for k in c.kraus_ops)
    return KrausChannel(c.in_dim, c.out_dim, ops)
