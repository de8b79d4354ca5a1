"""Diagram combinatorics against brute-force oracles."""

import math
from fractions import Fraction
from itertools import product

import pytest

from gatelab import young
from gatelab.young import YoungDiagram


# ---------------------------------------------------------------------------
# oracles (independent routes, kept deliberately naive)


def brute_partitions(K, d):
    """Every d-tuple that is non-increasing and sums to K."""
    found = set()
    for combo in product(range(K + 1), repeat=d):
        if sum(combo) == K and all(combo[i] >= combo[i + 1] for i in range(d - 1)):
            found.add(combo)
    return found


def count_semistandard(rows, d):
    """Fillings with entries 1..d, weakly increasing rows, strictly increasing columns."""
    cells = [(i, j) for i, r in enumerate(rows) for j in range(r)]

    def extend(filling):
        if len(filling) == len(cells):
            return 1
        i, j = cells[len(filling)]
        total = 0
        for v in range(1, d + 1):
            if j > 0 and filling[(i, j - 1)] > v:
                continue
            if i > 0 and filling[(i - 1, j)] >= v:
                continue
            filling[(i, j)] = v
            total += extend(filling)
            del filling[(i, j)]
        return total

    return extend({})


def count_standard(rows):
    """Standard fillings with 1..K, increasing along rows and columns."""
    K = sum(rows)
    d = len(rows)

    def extend(profile, n):
        if n == K:
            return 1
        total = 0
        for i in range(d):
            if profile[i] < rows[i] and (i == 0 or profile[i - 1] > profile[i]):
                total += extend(profile[:i] + (profile[i] + 1,) + profile[i + 1 :], n + 1)
        return total

    return extend((0,) * d, 0)


def spin_coupling_multiplicities(K):
    """Iterated two-level coupling: returns {2j: multiplicity} after K factors."""
    counts = {1: 1}
    for _ in range(K - 1):
        nxt = {}
        for twoj, c in counts.items():
            for t in (twoj + 1, twoj - 1):
                if t >= 0:
                    nxt[t] = nxt.get(t, 0) + c
        counts = nxt
    return counts


# ---------------------------------------------------------------------------
# enumeration


def test_enumerate_small_by_hand():
    assert [lam.rows for lam in young.enumerate_diagrams(2, 2)] == [(2, 0), (1, 1)]
    assert [lam.rows for lam in young.enumerate_diagrams(3, 3)] == [
        (3, 0, 0),
        (2, 1, 0),
        (1, 1, 1),
    ]


def test_enumerate_matches_brute_force():
    for K, d in [(10, 2), (6, 3), (7, 4), (0, 3), (5, 1)]:
        got = [lam.rows for lam in young.enumerate_diagrams(K, d)]
        assert set(got) == brute_partitions(K, d)
        assert got == sorted(got, reverse=True)  # descending lexicographic
    assert len(young.enumerate_diagrams(10, 2)) == 6


def test_diagram_validation():
    with pytest.raises(ValueError):
        YoungDiagram((1, 2))
    with pytest.raises(ValueError):
        YoungDiagram((2, -1))


# ---------------------------------------------------------------------------
# dimensions and multiplicities


def test_dim_rep_semistandard_oracle():
    assert young.dim_rep((2, 1, 0)) == count_semistandard((2, 1, 0), 3) == 8
    for rows, d in [((3, 1, 0), 3), ((2, 2, 0), 3), ((2, 1, 1), 3), ((3, 2, 1, 0), 4)]:
        assert young.dim_rep(rows) == count_semistandard(rows, d)


def test_dim_rep_closed_cases():
    for K in range(0, 9):
        assert young.dim_rep((K, 0)) == K + 1
    assert young.dim_rep((1, 1, 1)) == 1
    assert young.dim_rep((4, 4, 4)) == 1


def test_multiplicity_standard_tableaux_oracle():
    for rows in [(3, 1), (2, 2), (4, 0), (2, 1, 0), (3, 2, 1), (2, 2, 1, 1)]:
        assert young.multiplicity(rows) == count_standard(rows)


def test_multiplicity_qubit_coupling_oracle():
    mult = spin_coupling_multiplicities(4)
    # j = 0, 1, 2 -> diagrams (2,2), (3,1), (4,0)
    assert young.multiplicity((2, 2)) == mult[0] == 2
    assert young.multiplicity((3, 1)) == mult[2] == 3
    assert young.multiplicity((4, 0)) == mult[4] == 1


def test_symmetric_block_multiplicity_free():
    assert young.multiplicity((7, 0)) == 1
    assert young.multiplicity((5, 0, 0)) == 1


def test_completeness_d3_K3():
    blocks = young.schur_weyl_measure(3, 3)
    assert sum(b.dim_rep * b.mult for b in blocks) == 27
    assert [(b.dim_rep, b.mult) for b in blocks] == [(10, 1), (8, 2), (1, 1)]


def test_completeness_sweep():
    for d in (2, 3, 4):
        for K in range(1, 11):
            total = sum(
                young.dim_rep(lam) * young.multiplicity(lam)
                for lam in young.enumerate_diagrams(K, d)
            )
            assert total == d**K


def test_qubit_closed_form_matches_hooks():
    for K in range(1, 31):
        for lam in young.enumerate_diagrams(K, 2):
            assert young.qubit_multiplicity_formula(lam) == young.multiplicity(lam)


def test_dimension_and_multiplicity_bounds():
    # d_lam <= (K+1)^{d(d-1)/2};  multinomial/(K+1)^{d(d-1)/2} <= m_lam <= multinomial
    for d in (2, 3, 4):
        for K in range(1, 11):
            cap = Fraction((K + 1) ** (d * (d - 1) // 2))
            for lam in young.enumerate_diagrams(K, d):
                multinomial = math.factorial(K)
                for r in lam.rows:
                    multinomial //= math.factorial(r)
                m = young.multiplicity(lam)
                assert young.dim_rep(lam) <= cap
                assert m <= multinomial
                assert Fraction(multinomial) / cap <= m


# ---------------------------------------------------------------------------
# measure and tails


def test_measure_K4_d2():
    blocks = {b.diagram.rows: b.weight for b in young.schur_weyl_measure(4, 2)}
    assert blocks[(2, 2)] == Fraction(2, 16)
    assert blocks[(3, 1)] == Fraction(9, 16)
    assert blocks[(4, 0)] == Fraction(5, 16)


def test_measure_degenerate_and_K2():
    (b,) = young.schur_weyl_measure(1, 5)
    assert b.diagram.rows == (1, 0, 0, 0, 0) and b.weight == 1
    blocks = {b.diagram.rows: b.weight for b in young.schur_weyl_measure(2, 2)}
    assert blocks[(2, 0)] == Fraction(3, 4)
    assert blocks[(1, 1)] == Fraction(1, 4)


def test_measure_sums_to_one():
    for K, d in [(6, 2), (5, 3), (4, 4)]:
        assert sum(b.weight for b in young.schur_weyl_measure(K, d)) == 1


def test_truncation_set_qubit_matches_j_cut():
    ts = young.truncation_set(4, 2, 1)
    assert [lam.rows for lam in ts.members] == [(3, 1), (2, 2)]
    full = young.truncation_set(4, 2, 2)
    assert len(full.members) == 3


def test_tail_trivial_and_exact_values():
    assert young.tail_exact_fraction(8, 2, 4) == 0
    assert young.tail_exact_fraction(9, 3, 6) == 0
    assert young.tail_exact_fraction(4, 2, 1) == Fraction(5, 16)


def test_tail_bound_value_K100():
    bound = young.tail_bound(100, 2, 30)
    assert bound == pytest.approx(101 * math.exp(-18), rel=1e-12)
    assert young.tail_exact(100, 2, 30) <= bound


def test_tail_exact_below_bound_sweep():
    for K in range(1, 61):
        for d in (2, 3):
            tails = young.tail_exact_all_j(K, d)
            for J, t in tails.items():
                assert float(t) <= young.tail_bound(K, d, J) + 1e-15


def test_logspace_agrees_with_exact():
    for K, d, J in [(40, 2, 3), (80, 2, 6), (30, 3, 4), (120, 2, 5)]:
        exact = float(young.tail_exact_fraction(K, d, J))
        logsp = young._tail_logspace(K, d, J)
        assert logsp == pytest.approx(exact, rel=1e-9)


def test_entanglement_fidelity_values():
    assert young.entanglement_fidelity_fraction(4, 2, 1) == Fraction(121, 256)
    assert young.entanglement_fidelity_exact(4, 2, 2) == 1.0
    assert young.entanglement_fidelity_exact(100, 2, 30) >= 1 - 2 * 101 * math.exp(-18)


def test_entanglement_fidelity_monotone_in_J():
    for K, d in [(10, 2), (7, 3)]:
        vals = [young.entanglement_fidelity_exact(K, d, J) for J in range(0, K)]
        assert all(a <= b + 1e-15 for a, b in zip(vals, vals[1:]))


def test_fidelity_lower_bound_direction():
    for K, d, J in [(60, 2, 12), (100, 2, 25), (40, 3, 15)]:
        lb = young.fidelity_lower_bound(K, d, J)
        assert young.entanglement_fidelity_exact(K, d, J) >= lb


# ---------------------------------------------------------------------------
# ancilla and compression dimensions


def test_min_ancilla_example():
    table = young.ancilla_ratio_table(2, 4, 1, 2)
    ratios = {lamp.rows: ratio for lamp, _, _, ratio in table}
    assert ratios[(1, 1)] == 2  # j = 0
    assert ratios[(2, 0)] == 3  # j = 1
    assert young.min_ancilla_dim(2, 4, 1, 2) == 3
    assert young.min_ancilla_closed_form(2, 4, 1) == 3


def test_min_ancilla_degenerate():
    assert young.min_ancilla_dim(3, 3, 1, 2) == 1


def test_min_ancilla_errors():
    with pytest.raises(ValueError, match="multiple of d"):
        young.min_ancilla_dim(2, 5, 1, 2)
    with pytest.raises(ValueError, match="exceeds N/d"):
        young.min_ancilla_dim(2, 4, 2, 2)


def test_min_ancilla_closed_form_matches_max():
    for N in range(1, 11):
        for M in range(N + 2, 41, 2):
            for twoJ in range(N % 2, N + 1, 2):
                J = Fraction(twoJ, 2)
                assert young.min_ancilla_dim(N, M, J, 2) == young.min_ancilla_closed_form(
                    N, M, J
                )


def test_compression_dims_qubits():
    assert young.compression_dims(2, 2).system_a_dim == 4
    assert young.compression_dims(4, 2).system_a_dim == 9
    for N in range(2, 13, 2):
        assert young.compression_dims(N, 2).system_a_dim == (N // 2 + 1) ** 2


def test_compression_dims_qudit_and_bound():
    dims = young.compression_dims(3, 3)
    assert dims.system_a_dim == 19
    assert dims.dimension_bound == 4**5 == 1024
    assert dims.system_a_dim < dims.dimension_bound


def test_compression_dims_truncated():
    dims = young.compression_dims(6, 2, J=1)
    assert dims.system_a_dim == 4
    assert dims.qubit_count == 2
    assert dims.round_trip_qubits == 4


def test_j_rules():
    assert young.j_rule_sqrt(100, 1.0) == math.ceil(math.sqrt(100**0.75))
    assert young.j_rule_linear(100, 1.0) == math.ceil(100**0.75)
    assert young.j_rule_linear(100, 1.0) >= young.j_rule_sqrt(100, 1.0)
