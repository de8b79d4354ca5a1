"""Schur bases, characters and projectors against group-theory oracles."""

import itertools
import math

import numpy as np
import pytest

from gatelab import schur, tensorcore as tc, young


def conj_offblock(basis, g):
    return schur.offblock_norm(basis, schur.conjugate_power(basis, g))


# ---------------------------------------------------------------------------
# qubit coupling basis


def test_k2_singlet_column():
    basis = schur.qubit_schur_basis(2)
    col = basis.column((1, 1), 0, 0)
    target = np.array([0, 1, -1, 0]) / np.sqrt(2)
    # unique antisymmetric state, up to a global phase
    overlap = abs(np.vdot(target, col))
    assert overlap == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(col, target, atol=1e-12)  # our convention is exact


def test_k4_block_structure():
    basis = schur.qubit_schur_basis(4)
    got = [(b.diagram.rows, b.dim, b.mult) for b in basis.blocks]
    assert got == [((4, 0), 5, 1), ((3, 1), 3, 3), ((2, 2), 1, 2)]
    assert sum(b.dim * b.mult for b in basis.blocks) == 16


def test_unitarity_up_to_k8():
    for K in range(1, 9):
        b = schur.qubit_schur_basis(K)
        err = np.max(np.abs(b.matrix.conj().T @ b.matrix - np.eye(2**K)))
        assert err < 1e-12


@pytest.mark.parametrize("K", [2, 3, 4, 5, 6])
def test_qubit_basis_block_diagonalizes(K):
    basis = schur.qubit_schur_basis(K)
    for i in range(5):
        g = tc.random_su2(tc.substream(31, K, i))
        conj = schur.conjugate_power(basis, g.matrix)
        assert schur.offblock_norm(basis, conj) < 1e-10
        for b in basis.blocks:
            assert schur.multiplicity_consistency(basis, conj, b.diagram) < 1e-10


def test_qubit_block_traces_give_weights():
    K = 5
    basis = schur.qubit_schur_basis(K)
    for b in basis.blocks:
        w = b.dim * b.mult / 2**K
        assert float(young.weight(b.diagram)) == pytest.approx(w)


def test_index_map_layout():
    basis = schur.qubit_schur_basis(4)
    b = basis.block((3, 1))
    assert basis.index((3, 1), 0, 0) == b.offset
    assert basis.index((3, 1), 1, 2) == b.offset + 1 * b.mult + 2
    with pytest.raises(IndexError):
        basis.index((3, 1), 3, 0)


# ---------------------------------------------------------------------------
# characters


def test_characters_k2():
    assert schur.character_value((2,), (1, 1)) == 1
    assert schur.character_value((2,), (2,)) == 1
    assert schur.character_value((1, 1), (1, 1)) == 1
    assert schur.character_value((1, 1), (2,)) == -1


def test_character_at_identity_is_tableau_count():
    for n in range(1, 8):
        for lam in young.enumerate_diagrams(n, n):
            trimmed = tuple(r for r in lam.rows if r > 0)
            assert schur.character_value(trimmed, (1,) * n) == young.multiplicity(lam)


def brute_class_sizes(n):
    sizes = {}
    for perm in itertools.permutations(range(n)):
        ct = schur._cycle_type_of(perm)
        sizes[ct] = sizes.get(ct, 0) + 1
    return sizes


def test_class_sizes_against_enumeration():
    for n in (3, 4, 5):
        brute = brute_class_sizes(n)
        for ct, size in brute.items():
            assert schur.class_size(ct) == size
        assert sum(brute.values()) == math.factorial(n)


def test_character_orthogonality_k4():
    table = schur.sn_character_table(4)
    brute = brute_class_sizes(4)
    # rows: sum_c |chi(c)|^2 * |c| = n!
    for lam in table.partitions:
        total = sum(table.chi(lam, ct) ** 2 * brute[ct] for ct in brute)
        assert total == 24
    # columns: sum_lam chi_lam(c) chi_lam(c') = 0 for c != c'
    cts = list(brute)
    for c1 in cts:
        for c2 in cts:
            dot = sum(table.chi(lam, c1) * table.chi(lam, c2) for lam in table.partitions)
            if c1 == c2:
                assert dot == 24 // brute[c1]
            else:
                assert dot == 0


# ---------------------------------------------------------------------------
# permutation operators and projectors


def test_permutation_operator_is_representation():
    rng = np.random.default_rng(3)
    d, K = 2, 4
    perms = list(itertools.permutations(range(K)))
    for _ in range(10):
        sigma = perms[rng.integers(len(perms))]
        tau = perms[rng.integers(len(perms))]
        comp = tuple(sigma[tau[a]] for a in range(K))
        lhs = schur.permutation_operator(sigma, d) @ schur.permutation_operator(tau, d)
        np.testing.assert_allclose(lhs, schur.permutation_operator(comp, d), atol=0)


def test_permutation_operator_action():
    # swap of two qubits exchanges |01> and |10>
    swap = schur.permutation_operator((1, 0), 2)
    v = np.zeros(4)
    v[1] = 1.0  # |01>
    np.testing.assert_allclose(swap @ v, np.eye(4)[2])


def test_projector_singlet_rank_one():
    proj = schur.isotypic_projector((1, 1), 2, 2)
    assert np.linalg.matrix_rank(proj.matrix) == 1
    target = np.array([0, 1, -1, 0]) / np.sqrt(2)
    np.testing.assert_allclose(proj.matrix, np.outer(target, target), atol=1e-12)


def test_projector_traces_d3_K3():
    projs = schur.isotypic_projectors(3, 3)
    traces = {lam.rows: round(np.trace(m).real) for lam, m in projs.items()}
    assert traces == {(3, 0, 0): 10, (2, 1, 0): 16, (1, 1, 1): 1}


def test_projectors_idempotent_orthogonal_complete():
    d, K = 3, 4
    projs = schur.isotypic_projectors(d, K)
    total = np.zeros((d**K, d**K))
    mats = list(projs.values())
    for i, p in enumerate(mats):
        np.testing.assert_allclose(p @ p, p, atol=1e-10)
        np.testing.assert_allclose(p, p.T, atol=1e-12)
        for q in mats[i + 1 :]:
            assert np.max(np.abs(p @ q)) < 1e-10
        total += p
    np.testing.assert_allclose(total, np.eye(d**K), atol=1e-10)


def test_projectors_commute_with_tensor_power():
    d, K = 3, 3
    projs = schur.isotypic_projectors(d, K)
    for i in range(3):
        u = tc.haar_unitary(d, tc.substream(17, i))
        up = tc.kron_power(u, K)
        for p in projs.values():
            assert np.max(np.abs(p @ up - up @ p)) < 1e-9


def test_projector_trace_matches_weight():
    for d, K in [(2, 4), (3, 3), (2, 6)]:
        projs = schur.isotypic_projectors(d, K)
        for lam, p in projs.items():
            expect = float(young.weight(lam, d))
            assert np.trace(p).real / d**K == pytest.approx(expect, abs=1e-8)


def test_projector_more_rows_than_d_is_zero():
    proj = schur.isotypic_projector((1, 1, 1), 2, 3)
    assert np.max(np.abs(proj.matrix)) == 0.0


def test_group_budget_guard():
    with pytest.raises(tc.ResourceGuardError):
        schur.isotypic_projectors(3, 8, budget=1000)


# ---------------------------------------------------------------------------
# factorization


def test_factor_d3_K2_shapes():
    basis = schur.factor_isotypic(3, 2)
    got = [(b.dim, b.mult) for b in basis.blocks]
    assert got == [(6, 1), (3, 1)]


def test_factor_d3_K3_shapes_and_blockdiag():
    basis = schur.factor_isotypic(3, 3)
    got = [(b.diagram.rows, b.dim, b.mult) for b in basis.blocks]
    assert got == [((3, 0, 0), 10, 1), ((2, 1, 0), 8, 2), ((1, 1, 1), 1, 1)]
    for i in range(5):
        u = tc.haar_unitary(3, tc.substream(51, i))
        conj = schur.conjugate_power(basis, u)
        assert schur.offblock_norm(basis, conj) < 1e-9
        for b in basis.blocks:
            assert schur.multiplicity_consistency(basis, conj, b.diagram) < 1e-9


def test_factor_d2_matches_coupling_weights():
    K = 4
    factored = schur.factor_isotypic(2, K)
    coupled = schur.qubit_schur_basis(K)
    assert [(b.diagram.rows, b.dim, b.mult) for b in factored.blocks] == [
        (b.diagram.rows, b.dim, b.mult) for b in coupled.blocks
    ]
    # same gate, both bases: identical rotation blocks up to the gauge freedom,
    # so their traces (block characters) must agree
    g = tc.random_su2(tc.substream(8, 0))
    cf = schur.conjugate_power(factored, g.matrix)
    cc = schur.conjugate_power(coupled, g.matrix)
    assert schur.offblock_norm(factored, cf) < 1e-9
    for b in factored.blocks:
        t1 = np.trace(schur.block_matrix(factored, cf, b.diagram))
        t2 = np.trace(schur.block_matrix(coupled, cc, b.diagram))
        assert abs(t1 - t2) < 1e-9


def test_factor_is_deterministic():
    b1 = schur.factor_isotypic(3, 2, seed=5)
    b2 = schur.factor_isotypic(3, 2, seed=5)
    assert np.array_equal(b1.matrix, b2.matrix)


def test_permutations_act_trivially_on_rotation_factor():
    # conjugated permutation operators must stay block diagonal and act as
    # identity on the rotation index: blocks are I (x) pi(sigma)
    d, K = 2, 4
    basis = schur.qubit_schur_basis(K)
    for sigma in [(1, 0, 2, 3), (1, 2, 3, 0), (3, 2, 1, 0)]:
        pop = schur.permutation_operator(sigma, d)
        conj = basis.matrix.conj().T @ pop @ basis.matrix
        assert schur.offblock_norm(basis, conj) < 1e-10
        for b in basis.blocks:
            blk = conj[basis.block_slice(b.diagram), basis.block_slice(b.diagram)]
            blk = blk.reshape(b.dim, b.mult, b.dim, b.mult)
            # off-diagonal in the rotation index vanishes
            for r in range(b.dim):
                for rp in range(b.dim):
                    if r != rp:
                        assert np.max(np.abs(blk[r, :, rp, :])) < 1e-8
            # diagonal copies all equal the r=0 copy
            for r in range(1, b.dim):
                assert np.max(np.abs(blk[r, :, r, :] - blk[0, :, 0, :])) < 1e-8


# ---------------------------------------------------------------------------
# disk cache


def test_cache_roundtrip(tmp_path):
    basis = schur.qubit_schur_basis(3)
    path = tmp_path / "basis.gsb"
    schur.save_basis(basis, str(path))
    loaded = schur.load_basis(str(path))
    assert loaded.K == 3 and loaded.d == 2
    assert np.array_equal(loaded.matrix, basis.matrix)
    assert [(b.diagram.rows, b.dim, b.mult, b.offset) for b in loaded.blocks] == [
        (b.diagram.rows, b.dim, b.mult, b.offset) for b in basis.blocks
    ]


def test_schur_basis_uses_cache_dir(tmp_path):
    schur.schur_basis.cache_clear()
    b1 = schur.schur_basis(3, 2, cache_dir=str(tmp_path))
    assert (tmp_path / "schur_d2_K3_v1.gsb").exists()
    schur.schur_basis.cache_clear()
    b2 = schur.schur_basis(3, 2, cache_dir=str(tmp_path))
    assert np.array_equal(b1.matrix, b2.matrix)


def test_load_rejects_other_files(tmp_path):
    p = tmp_path / "junk.gsb"
    p.write_bytes(b"not a basis")
    with pytest.raises(ValueError, match="not a basis cache"):
        schur.load_basis(str(p))
