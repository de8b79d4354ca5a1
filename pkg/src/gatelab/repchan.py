"""Channels and isometries of the replication and compression networks.

The truncating encoder keeps the high-weight blocks of the tensor-power
decomposition and dumps the rest onto a fixed reset state; the embedding
isometry carries the kept blocks of M systems into N systems plus an
ancilla while commuting with every simultaneous rotation; composing the two
with the gate sandwiched in between yields the replication network.  The
compression records pack the same block structure into a representation-only
system exchanged between the gate holder and the gate user.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from . import tensorcore as tc
from . import young
from .schur import SchurBasis, block_matrix, conjugate_power, schur_basis
from .tensorcore import (
    DensityMatrix,
    GateParams,
    KrausChannel,
    PureState,
    ResourceGuardError,
    substream,
)
from .young import YoungDiagram, multiplicity, truncation_set

# Materializing a Kraus list costs ops * out_dim * in_dim complex entries.
DEFAULT_KRAUS_ENTRY_BUDGET = 20_000_000


def _as_array(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho)


@dataclass(frozen=True, eq=False)
class ProjectiveReturnChannel:
    """rho -> T^dag rho T + tr[(1 - T T^dag) rho] * rho0.

    T maps the small space into the big one with T T^dag a projector; the
    channel runs big -> small.  Covers the truncating encoder (T = projector),
    the network decoder and the inverse halves of the compression records.
    """

    t_matrix: np.ndarray
    rho0: np.ndarray
    complement: np.ndarray  # orthonormal columns spanning ker(T^dag)

    def __post_init__(self) -> None:
        t = np.asarray(self.t_matrix, dtype=complex)
        proj = t @ t.conj().T
        if np.max(np.abs(proj @ proj - proj)) > 1e-9:
            raise ValueError("T T^dag is not a projector")
        object.__setattr__(self, "t_matrix", t)

    @property
    def in_dim(self) -> int:
        return self.t_matrix.shape[0]

    @property
    def out_dim(self) -> int:
        return self.t_matrix.shape[1]

    def apply_array(self, rho: np.ndarray) -> np.ndarray:
        t = self.t_matrix
        kept = t.conj().T @ rho @ t
        weight = np.trace(rho).real - np.trace(kept).real
        return kept + weight * self.rho0

    def apply(self, rho: DensityMatrix | np.ndarray) -> DensityMatrix:
        return DensityMatrix(self.apply_array(_as_array(rho)))

    def kraus_channel(
        self, entry_budget: int = DEFAULT_KRAUS_ENTRY_BUDGET
    ) -> KrausChannel:
        vals, vecs = np.linalg.eigh(self.rho0)
        keep = vals > 1e-14
        n_ops = 1 + int(keep.sum()) * self.complement.shape[1]
        if n_ops * self.in_dim * self.out_dim > entry_budget:
            raise ResourceGuardError(
                f"{n_ops} Kraus operators of shape "
                f"({self.out_dim}, {self.in_dim}) exceed the entry budget; "
                "use .apply for state evolution"
            )
        ops = [self.t_matrix.conj().T]
        for a in np.nonzero(keep)[0]:
            phi = vecs[:, a] * math.sqrt(vals[a])
            for i in range(self.complement.shape[1]):
                ops.append(np.outer(phi, self.complement[:, i].conj()))
        return KrausChannel(self.in_dim, self.out_dim, tuple(ops))


def _complement_from_projector(proj: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(proj)
    return vecs[:, vals < 0.5]


# ---------------------------------------------------------------------------
# truncating encoder


@dataclass(frozen=True, eq=False)
class TruncatedEncoder:
    """Projects onto the truncated block sum, resetting rejected weight to rho0."""

    K: int
    d: int
    J: Fraction
    projector: np.ndarray
    rho0: np.ndarray
    kept: tuple[YoungDiagram, ...]
    _channel: ProjectiveReturnChannel

    @property
    def dim(self) -> int:
        return self.projector.shape[0]

    @property
    def is_identity(self) -> bool:
        return self._channel.complement.shape[1] == 0

    @property
    def kept_dim(self) -> int:
        return int(round(np.trace(self.projector).real))

    def apply(self, rho: DensityMatrix | np.ndarray) -> DensityMatrix:
        return self._channel.apply(rho)

    def apply_array(self, rho: np.ndarray) -> np.ndarray:
        return self._channel.apply_array(rho)

    def state_fidelity(self, psi: PureState | np.ndarray) -> float:
        """Overlap of a pure state with its encoded version."""
        v = psi.amplitudes if isinstance(psi, PureState) else np.asarray(psi)
        p = float((v.conj() @ self.projector @ v).real)
        q = float((v.conj() @ self.rho0 @ v).real)
        return min(1.0, max(0.0, p * p + (1.0 - p) * q))

    def kraus_channel(
        self, entry_budget: int = DEFAULT_KRAUS_ENTRY_BUDGET
    ) -> KrausChannel:
        if self.kept_dim == self.dim:
            return KrausChannel.identity(self.dim)
        return self._channel.kraus_channel(entry_budget)

    def entanglement_fidelity(self) -> float:
        """Sum of |tr K|^2 over the Kraus set, divided by dim^2.

        The trace of each reset operator is sqrt(p_a) <e_i|phi_a>, which
        vanishes whenever rho0 is supported inside the kept subspace.
        """
        tr_p = np.trace(self.projector).real
        vals, vecs = np.linalg.eigh(self.rho0)
        comp = self._channel.complement
        cross = 0.0
        for a in np.nonzero(vals > 1e-14)[0]:
            overlaps = comp.conj().T @ vecs[:, a]
            cross += vals[a] * float(np.sum(np.abs(overlaps) ** 2))
        return float((tr_p**2 + cross) / self.dim**2)


def build_encoder(
    K: int,
    d: int,
    J,
    rho0: DensityMatrix | np.ndarray | None = None,
    basis: SchurBasis | None = None,
    seed: int = 0,
) -> TruncatedEncoder:
    """Truncating encoder for K systems of dimension d at cutoff J.

    rho0 defaults to the maximally mixed state on the kept subspace, which
    makes the channel exactly covariant under simultaneous rotations.
    """
    Jf = young._as_fraction(J)
    if basis is None:
        basis = schur_basis(K, d, seed)
    kept = truncation_set(K, d, Jf).members
    kept_cols = [basis.block_columns(lam) for lam in kept]
    if not kept_cols:
        raise ValueError(f"truncation at J={J} keeps nothing (K={K}, d={d})")
    b_kept = np.hstack(kept_cols)
    dim = basis.dim
    projector = b_kept @ b_kept.conj().T
    rejected = [lam for lam in (b.diagram for b in basis.blocks) if lam not in kept]
    if rejected:
        comp = np.hstack([basis.block_columns(lam) for lam in rejected])
    else:
        comp = np.zeros((dim, 0), dtype=complex)
    if rho0 is None:
        rho0_arr = projector / np.trace(projector).real
    else:
        rho0_arr = _as_array(rho0).astype(complex)
        leak = rho0_arr - projector @ rho0_arr @ projector
        if np.max(np.abs(leak)) > 1e-10:
            raise ValueError("rho0 must be supported inside the kept subspace")
    chan = ProjectiveReturnChannel(projector, rho0_arr, comp)
    return TruncatedEncoder(K, d, Jf, projector, rho0_arr, kept, chan)


# ---------------------------------------------------------------------------
# rotation-commuting embedding


def _irrep_intertwiner(
    basis_m: SchurBasis,
    basis_n: SchurBasis,
    lam_m: YoungDiagram,
    lam_n: YoungDiagram,
    seed: int,
    samples: int = 6,
) -> np.ndarray:
    """Unitary G with U_n G = G U_m between two copies of the same irrep.

    Fixed point of the averaged kron(U_n, conj(U_m)), unitarized by polar
    decomposition; the intertwiner is unique up to phase.
    """
    d_rep = basis_m.block(lam_m).dim
    rng = substream(seed, 0x17, *lam_m.rows)
    t_avg = np.zeros((d_rep**2, d_rep**2), dtype=complex)
    gs = [tc.haar_unitary(basis_m.d, rng) for _ in range(samples)]
    blocks_m = [block_matrix(basis_m, conjugate_power(basis_m, g), lam_m) for g in gs]
    blocks_n = [block_matrix(basis_n, conjugate_power(basis_n, g), lam_n) for g in gs]
    for u_m, u_n in zip(blocks_m, blocks_n):
        t_avg += np.kron(u_n, u_m.conj())
    t_avg /= samples
    _, svals, vh = np.linalg.svd(t_avg - np.eye(d_rep**2))
    g_raw = vh[-1].conj().reshape(d_rep, d_rep)
    uu, _, vv = np.linalg.svd(g_raw)
    g = uu @ vv
    worst = max(
        float(np.max(np.abs(u_n @ g - g @ u_m)))
        for u_m, u_n in zip(blocks_m, blocks_n)
    )
    if worst > 1e-9:
        raise RuntimeError(
            f"intertwiner residual {worst:.2e} for block {lam_m}: bases do not "
            "carry equivalent irreps"
        )
    return g


@dataclass(frozen=True, eq=False)
class EmbeddingIsometry:
    """Rotation-commuting isometry from the truncated M-system blocks into
    N systems plus an ancilla, acting as a mixed-radix relabeling of the
    multiplicity index."""

    N: int
    M: int
    J: Fraction
    d: int
    ancilla_dim: int
    isometry: tc.Isometry  # (d^N * ancilla_dim) x kept_dim
    domain_columns: np.ndarray  # d^M x kept_dim, the kept Schur columns
    basis_m: SchurBasis
    basis_n: SchurBasis
    kept: tuple[YoungDiagram, ...]

    @property
    def kept_dim(self) -> int:
        return self.isometry.in_dim

    @property
    def out_dim(self) -> int:
        return self.isometry.out_dim

    @cached_property
    def vtilde(self) -> np.ndarray:
        """The isometry precomposed with the projection from the full M-system
        space: an (d^N d_A) x d^M matrix, isometric on the kept subspace."""
        return self.isometry.matrix @ self.domain_columns.conj().T

    def encode_channel(self, encoder: TruncatedEncoder) -> KrausChannel:
        """Encoder followed by the embedding, as one trace-preserving channel."""
        if encoder.dim != self.d**self.M:
            raise ValueError("encoder acts on the wrong space")
        enc = encoder.kraus_channel()
        ops = tuple(self.vtilde @ k for k in enc.kraus_ops)
        return KrausChannel(self.d**self.M, self.out_dim, ops)

    def decoder(self, rho0: np.ndarray | None = None) -> ProjectiveReturnChannel:
        """Inverse of the embedding, resetting anything outside its range."""
        if rho0 is None:
            t = self.domain_columns.shape[1]
            rho0 = (self.domain_columns @ self.domain_columns.conj().T) / t
        comp = _complement_from_projector(
            self.isometry.matrix @ self.isometry.matrix.conj().T
        )
        return ProjectiveReturnChannel(self.vtilde, rho0, comp)


def build_embedding(
    N: int,
    M: int,
    J,
    d: int,
    ancilla_dim: int | None = None,
    seed: int = 0,
    basis_m: SchurBasis | None = None,
    basis_n: SchurBasis | None = None,
) -> EmbeddingIsometry:
    """Embed the truncated M-system blocks into N systems plus an ancilla.

    Block by block the representation factor is carried by a unitary
    isomorphism and the multiplicity index m is split into
    (m mod mult_N, m div mult_N) across the N-system multiplicity space and
    the ancilla.
    """
    Jf = young._as_fraction(J)
    if (M - N) % d != 0:
        raise ValueError(
            f"M - N = {M - N} is not a multiple of d = {d}; adjust M so the "
            "per-row shift is an integer"
        )
    if Jf > Fraction(N, d):
        raise ValueError(f"J = {J} exceeds N/d = {Fraction(N, d)}")
    if basis_m is None:
        basis_m = schur_basis(M, d, seed)
    if basis_n is None:
        basis_n = schur_basis(N, d, seed)
    shift = (M - N) // d
    kept = truncation_set(M, d, Jf).members
    d_a_min = young.min_ancilla_dim(N, M, Jf, d)
    d_a = d_a_min if ancilla_dim is None else ancilla_dim
    if d_a < d_a_min:
        raise ValueError(f"ancilla dimension {d_a} below the minimum {d_a_min}")

    dim_n = d**N
    t_dim = sum(basis_m.block(lam).size for lam in kept)
    v = np.zeros((dim_n * d_a, t_dim), dtype=complex)
    dom = np.zeros((d**M, t_dim), dtype=complex)
    col = 0
    for lam in kept:
        lamp = lam.shifted(-shift)
        b_m = basis_m.block(lam)
        b_n = basis_n.block(lamp)
        if d == 2:
            g = np.eye(b_m.dim)  # both couplings share one convention
        else:
            g = _irrep_intertwiner(basis_m, basis_n, lam, lamp, seed)
        n_cols = np.array(
            [
                [basis_n.column(lamp, rp, mm) for mm in range(b_n.mult)]
                for rp in range(b_n.dim)
            ]
        )  # (d_rep, mult_n, dim_n)
        for r in range(b_m.dim):
            carried = np.tensordot(g[:, r], n_cols, axes=(0, 0))  # (mult_n, dim_n)
            for m in range(b_m.mult):
                anc = m // b_n.mult
                target = np.zeros((dim_n, d_a), dtype=complex)
                target[:, anc] = carried[m % b_n.mult]
                v[:, col + r * b_m.mult + m] = target.reshape(-1)
        for r in range(b_m.dim):
            for m in range(b_m.mult):
                dom[:, col + r * b_m.mult + m] = basis_m.column(lam, r, m)
        col += b_m.size
    assert col == t_dim
    return EmbeddingIsometry(
        N, M, Jf, d, d_a, tc.Isometry(v), dom, basis_m, basis_n, kept
    )


# ---------------------------------------------------------------------------
# the replication network


@dataclass(frozen=True, eq=False)
class ReplicationNetwork:
    """Simulates M parallel gate uses from N actual uses plus an ancilla."""

    N: int
    M: int
    J: Fraction
    d: int
    encoder: TruncatedEncoder
    embedding: EmbeddingIsometry

    @property
    def ancilla_dim(self) -> int:
        return self.embedding.ancilla_dim

    def _gate_on_carriers(self, gate: GateParams) -> np.ndarray:
        return tc.kron(
            tc.kron_power(gate.matrix, self.N), np.eye(self.ancilla_dim)
        )

    def channel(self, gate: GateParams) -> KrausChannel:
        """The end-to-end channel on the M-system space for one gate value."""
        c1 = self.embedding.encode_channel(self.encoder)
        mid = tc.conjugate_channel(c1, self._gate_on_carriers(gate))
        return tc.compose(self.embedding.decoder().kraus_channel(), mid)

    def apply(self, gate: GateParams, rho: DensityMatrix | np.ndarray) -> DensityMatrix:
        """Structural evolution, avoiding Kraus materialization."""
        sigma = self.encoder.apply_array(_as_array(rho))
        vt = self.embedding.vtilde
        sigma = vt @ sigma @ vt.conj().T
        g = self._gate_on_carriers(gate)
        sigma = g @ sigma @ g.conj().T
        return self.embedding.decoder().apply(sigma)

    def output_for_pure(self, gate: GateParams, psi: PureState) -> DensityMatrix:
        return self.apply(gate, psi.density())

    def fidelity(self, gate: GateParams, psi: PureState) -> float:
        """Overlap of the network output with the ideal M-fold gate action."""
        target = tc.kron_power(gate.matrix, self.M) @ psi.amplitudes
        out = self.apply(gate, psi.density())
        return tc.fidelity(PureState(target), out)

    def target_output(self, gate: GateParams, rho: DensityMatrix) -> DensityMatrix:
        """The ideal-network identity: rotated encoder output."""
        u = tc.kron_power(gate.matrix, self.M)
        enc = self.encoder.apply_array(_as_array(rho))
        return DensityMatrix(u @ enc @ u.conj().T)


def build_network(N: int, M: int, J, d: int, seed: int = 0) -> ReplicationNetwork:
    embedding = build_embedding(N, M, J, d, seed=seed)
    encoder = build_encoder(M, d, J, basis=embedding.basis_m)
    return ReplicationNetwork(N, M, young._as_fraction(J), d, encoder, embedding)


def replication_network(N: int, M: int, J, d: int, gate: GateParams, seed: int = 0) -> KrausChannel:
    """One-shot construction of the network channel for a fixed gate."""
    return build_network(N, M, J, d, seed=seed).channel(gate)


# ---------------------------------------------------------------------------
# gate compression


@dataclass(frozen=True, eq=False)
class CompressionProtocol:
    """Both halves of the compression scheme.

    The gate holder conjugates the N-fold gate into a block-direct-sum gate on
    the representation-only system A; the gate user encodes the input across A
    and a multiplicity memory B, lets the compressed gate act on A and decodes.
    J=None is the lossless variant; otherwise the user's encoder truncates
    first and A shrinks to the kept blocks.
    """

    N: int
    d: int
    J: Fraction | None
    basis: SchurBasis
    a_dim: int  # dimension of the (possibly truncated) gate-carrying system
    a_dim_full: int
    b_dim: int
    v_matrix: np.ndarray  # d^N x a_dim isometry used by the gate holder
    w_matrix: np.ndarray  # (a_dim_full * b_dim) x d^N isometry used by the user
    kept: tuple[YoungDiagram, ...]
    encoder: TruncatedEncoder | None  # present in the truncated variant

    @property
    def n_dim(self) -> int:
        return self.d**self.N

    # -- gate holder side ---------------------------------------------------

    def compressed_gate(self, gate: GateParams) -> np.ndarray:
        """The block-direct-sum gate on system A."""
        up = tc.kron_power(gate.matrix, self.N)
        return self.v_matrix.conj().T @ up @ self.v_matrix

    def embedded_gate(self, gate: GateParams) -> np.ndarray:
        """Compressed gate extended by the identity to the full A space."""
        small = self.compressed_gate(gate)
        if self.a_dim == self.a_dim_full:
            return small
        out = np.eye(self.a_dim_full, dtype=complex)
        out[: self.a_dim, : self.a_dim] = small
        return out

    def alice_encode(self) -> KrausChannel:
        return KrausChannel(self.a_dim, self.n_dim, (self.v_matrix,))

    def alice_decode(self) -> ProjectiveReturnChannel:
        alpha0 = np.eye(self.a_dim, dtype=complex) / self.a_dim
        comp = _complement_from_projector(self.v_matrix @ self.v_matrix.conj().T)
        return ProjectiveReturnChannel(self.v_matrix, alpha0, comp)

    # -- gate user side -----------------------------------------------------

    def bob_encode(self) -> KrausChannel:
        """W alone (lossless) or W after the truncating encoder."""
        iso = KrausChannel(self.n_dim, self.a_dim_full * self.b_dim, (self.w_matrix,))
        if self.encoder is None:
            return iso
        return tc.compose(iso, self.encoder.kraus_channel(), auto_compress=False)

    def bob_decode(self) -> ProjectiveReturnChannel:
        beta0 = np.eye(self.n_dim, dtype=complex) / self.n_dim
        comp = _complement_from_projector(self.w_matrix @ self.w_matrix.conj().T)
        return ProjectiveReturnChannel(self.w_matrix, beta0, comp)

    def simulate(self, gate: GateParams, rho: DensityMatrix | np.ndarray) -> DensityMatrix:
        """Run the user's pipeline with the compressed gate in the middle."""
        sigma = _as_array(rho)
        if self.encoder is not None:
            sigma = self.encoder.apply_array(sigma)
        sigma = self.w_matrix @ sigma @ self.w_matrix.conj().T
        u = tc.kron(self.embedded_gate(gate), np.eye(self.b_dim))
        sigma = u @ sigma @ u.conj().T
        return self.bob_decode().apply(sigma)

    def retrieval_channel(self, gate: GateParams) -> KrausChannel:
        """The user's pipeline as one channel on the N systems."""
        u = tc.kron(self.embedded_gate(gate), np.eye(self.b_dim))
        mid = tc.conjugate_channel(self.bob_encode(), u)
        return tc.compose(self.bob_decode().kraus_channel(), mid)

    def alice_roundtrip_channel(self, gate: GateParams) -> KrausChannel:
        """Holder side composition: decode after the N-fold gate after encode."""
        mid = tc.conjugate_channel(self.alice_encode(), tc.kron_power(gate.matrix, self.N))
        return tc.compose(self.alice_decode().kraus_channel(), mid)


def _build_compression(
    N: int, d: int, J, seed: int
) -> CompressionProtocol:
    basis = schur_basis(N, d, seed)
    all_blocks = [b.diagram for b in basis.blocks]
    if J is None:
        kept = tuple(all_blocks)
        encoder = None
        Jf = None
    else:
        Jf = young._as_fraction(J)
        kept = truncation_set(N, d, Jf).members
        encoder = build_encoder(N, d, Jf, basis=basis)

    a_dim_full = sum(basis.block(lam).dim for lam in all_blocks)
    b_dim = max(basis.block(lam).mult for lam in all_blocks)
    n_dim = d**N

    # A-space layout: kept blocks first (in canonical order), then the rest,
    # so the truncated gate occupies the leading a_dim x a_dim corner.
    ordering = list(kept) + [lam for lam in all_blocks if lam not in kept]
    a_dim = sum(basis.block(lam).dim for lam in kept)

    v_full = np.zeros((n_dim, a_dim_full), dtype=complex)
    w = np.zeros((a_dim_full * b_dim, n_dim), dtype=complex)
    pos = 0
    for lam in ordering:
        b = basis.block(lam)
        for r in range(b.dim):
            v_full[:, pos + r] = basis.column(lam, r, 0)  # first multiplicity vector
            for m in range(b.mult):
                w[(pos + r) * b_dim + m, :] = basis.column(lam, r, m).conj()
        pos += b.dim
    v = v_full[:, :a_dim]
    return CompressionProtocol(
        N=N,
        d=d,
        J=Jf,
        basis=basis,
        a_dim=a_dim,
        a_dim_full=a_dim_full,
        b_dim=b_dim,
        v_matrix=v,
        w_matrix=w,
        kept=kept,
        encoder=encoder,
    )


def compression_exact(N: int, d: int, seed: int = 0) -> CompressionProtocol:
    """Lossless compression of N parallel gate uses onto the block sum space."""
    return _build_compression(N, d, None, seed)


def compression_approx(N: int, d: int, J, seed: int = 0) -> CompressionProtocol:
    """Truncated variant: the user's encoder cuts to the kept blocks first."""
    return _build_compression(N, d, J, seed)
