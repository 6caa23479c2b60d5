"""Qutrit/qudit Toffoli-sign constructions against brute-force oracles."""

import numpy as np
import pytest

from qudit_toffoli.qudits import (
    CircuitDescription,
    PureState,
    WireDims,
    basis_index,
    circuit_unitary,
    embed_gate,
)
from qudit_toffoli.toffoli import (
    build_n_ts_circuit,
    build_ts_circuit,
    expected_flipped_component,
    gate_cnot_embedded,
    gate_cs_embedded,
    gate_h_padded,
    gate_level_swap,
    gate_x_padded,
    gate_xa,
    gate_xb,
    oracle_n_toffoli_sign,
    qubit_subspace_leakage,
    restrict_to_qubit_subspace,
    toffoli_truth_table,
    verify_decomposition,
)


# ---------------------------------------------------------------------------
# gate library
# ---------------------------------------------------------------------------

def test_xa_swaps_levels_0_and_2():
    xa = gate_xa(3).matrix
    zero, one, two = np.eye(3)
    assert np.allclose(xa @ zero, two)
    assert np.allclose(xa @ two, zero)
    assert np.allclose(xa @ one, one)


def test_xa_is_involution():
    xa = gate_xa(3).matrix
    assert np.allclose(xa @ xa, np.eye(3))


def test_xa_requires_three_levels():
    with pytest.raises(ValueError):
        gate_xa(2)


def test_xb_flips_ququit_between_1_and_3():
    xb = gate_xb(4).matrix
    levels = np.eye(4)
    assert np.allclose(xb @ levels[1], levels[3])
    assert np.allclose(xb @ levels[3], levels[1])
    assert np.allclose(xb @ levels[0], levels[0])


def test_level_swap_matches_xa():
    assert np.allclose(gate_level_swap(0, 2, 3).matrix, gate_xa(3).matrix)


def test_level_swap_squares_to_identity():
    m = gate_level_swap(2, 4, 5).matrix
    assert np.allclose(m @ m, np.eye(5))


def test_level_swap_rejects_bad_levels():
    with pytest.raises(ValueError):
        gate_level_swap(0, 4, 3)
    with pytest.raises(ValueError):
        gate_level_swap(1, 1, 3)


def test_cs_embedded_standard_qubit_block():
    assert np.allclose(gate_cs_embedded(2, 2).matrix, np.diag([1, 1, 1, -1]))


def test_cs_embedded_identity_on_qutrit_level():
    cs = gate_cs_embedded(2, 3)
    idx = basis_index((1, 2), WireDims((2, 3)))
    column = cs.matrix[:, idx]
    expected = np.zeros(6)
    expected[idx] = 1.0
    assert np.allclose(column, expected)


def test_cs_embedded_flips_one_one():
    cs = gate_cs_embedded(2, 3)
    idx = basis_index((1, 1), WireDims((2, 3)))
    assert cs.matrix[idx, idx] == -1.0


def test_cnot_embedded_flips_target():
    cnot = gate_cnot_embedded(2, 3)
    dims = WireDims((2, 3))
    src = basis_index((1, 0), dims)
    dst = basis_index((1, 1), dims)
    assert cnot.matrix[dst, src] == 1.0


def test_cnot_embedded_identity_on_qutrit_level():
    cnot = gate_cnot_embedded(2, 3)
    idx = basis_index((1, 2), WireDims((2, 3)))
    assert cnot.matrix[idx, idx] == 1.0


def test_cnot_is_hadamard_conjugated_cs():
    # controlled-NOT from controlled-sign between a pair of Hadamards
    for dt in (2, 3, 4):
        h = np.kron(np.eye(2), gate_h_padded(dt).matrix)
        product = h @ gate_cs_embedded(2, dt).matrix @ h
        assert np.max(np.abs(product - gate_cnot_embedded(2, dt).matrix)) < 1e-12


# ---------------------------------------------------------------------------
# the three-gate circuit, step by step
# ---------------------------------------------------------------------------

def _arbitrary_three_qubit_state(rng=None):
    """Input state with every qubit component populated; the target starts
    in its qubit levels only."""
    dims = WireDims((2, 2, 3))
    if rng is None:
        alphas = np.full((2, 2, 2), 1 / np.sqrt(8), dtype=complex)
    else:
        alphas = rng.normal(size=(2, 2, 2)) + 1j * rng.normal(size=(2, 2, 2))
        alphas /= np.linalg.norm(alphas)
    amps = np.zeros(dims.total_dim, dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                amps[basis_index((i, j, k), dims)] = alphas[i, j, k]
    return PureState(dims, amps), alphas


def test_ts_circuit_intermediate_states():
    """Trace the circuit through its first gates: after X_A the target's 0
    amplitude sits in level 2; after the first CNOT the (j=1, k=1) amplitude
    has moved to target level 0; after the CS only the (1,0,1) component has
    flipped sign."""
    rng = np.random.default_rng(11)
    circ = build_ts_circuit()
    state, a = _arbitrary_three_qubit_state(rng)

    after_xa = circ.apply(state, upto=1)
    for i in range(2):
        for j in range(2):
            assert abs(after_xa.amplitude((i, j, 2)) - a[i, j, 0]) < 1e-14
            assert abs(after_xa.amplitude((i, j, 1)) - a[i, j, 1]) < 1e-14
            assert abs(after_xa.amplitude((i, j, 0))) < 1e-14

    after_cnot = circ.apply(state, upto=2)
    for i in range(2):
        assert abs(after_cnot.amplitude((i, 0, 2)) - a[i, 0, 0]) < 1e-14
        assert abs(after_cnot.amplitude((i, 0, 1)) - a[i, 0, 1]) < 1e-14
        assert abs(after_cnot.amplitude((i, 1, 2)) - a[i, 1, 0]) < 1e-14
        assert abs(after_cnot.amplitude((i, 1, 0)) - a[i, 1, 1]) < 1e-14

    after_cs = circ.apply(state, upto=3)
    assert abs(after_cs.amplitude((1, 0, 1)) + a[1, 0, 1]) < 1e-14
    assert abs(after_cs.amplitude((0, 0, 1)) - a[0, 0, 1]) < 1e-14


def test_ts_circuit_flips_101_component_only():
    circ = build_ts_circuit()
    state, a = _arbitrary_three_qubit_state()
    out = circ.apply(state)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                expected = -a[i, j, k] if (i, j, k) == (1, 0, 1) else a[i, j, k]
                assert abs(out.amplitude((i, j, k)) - expected) < 1e-13
            assert abs(out.amplitude((i, j, 2))) < 1e-13


def test_ts_circuit_has_three_two_qudit_gates():
    assert build_ts_circuit().two_qudit_gate_count() == 3


def test_hadamard_conjugation_gives_toffoli_up_to_bit_flip():
    """H on the target before and after turns the T-S into a Toffoli; ours
    flips on (1,0,1) so it matches the brute-force Toffoli conjugated by a
    bit flip on the middle wire."""
    from qudit_toffoli.toffoli import qubit_subspace_indices

    circ = build_ts_circuit()
    dims = circ.dims
    h_full = embed_gate(gate_h_padded(3), (2,), dims)
    u = h_full @ circuit_unitary(circ).matrix @ h_full
    idx = qubit_subspace_indices(dims)
    restricted = u[np.ix_(idx, idx)]

    qdims = WireDims((2, 2, 2))
    flip_b = embed_gate(gate_x_padded(2), (1,), qdims)
    expected = flip_b @ toffoli_truth_table(2).matrix @ flip_b
    assert np.max(np.abs(restricted - expected)) < 1e-10


# ---------------------------------------------------------------------------
# n-control generalization
# ---------------------------------------------------------------------------

def test_n2_reproduces_ts_circuit():
    a = build_ts_circuit()
    b = build_n_ts_circuit(2)
    assert a.dims == b.dims
    assert [(s.name, s.wires) for s in a.steps] == [(s.name, s.wires) for s in b.steps]


def test_n3_five_gates_flip_on_all_ones():
    circ = build_n_ts_circuit(3)
    assert circ.two_qudit_gate_count() == 5
    oracle = oracle_n_toffoli_sign(3, (1, 1, 1, 1))
    report = verify_decomposition(circ, oracle, 3)
    assert abs(report.fidelity_to_oracle - 1.0) < 1e-10
    assert report.flipped_component == (1, 1, 1, 1)


def test_n5_needs_nine_gates():
    circ = build_n_ts_circuit(5)
    assert circ.two_qudit_gate_count() == 9


def test_rejects_fewer_than_two_controls():
    with pytest.raises(ValueError):
        build_n_ts_circuit(1)


@pytest.mark.parametrize("n", range(2, 7))
def test_scaling_and_fidelity(n):
    circ = build_n_ts_circuit(n)
    oracle = oracle_n_toffoli_sign(n, expected_flipped_component(n))
    report = verify_decomposition(circ, oracle, n)
    assert report.two_qudit_gate_count == 2 * n - 1
    assert abs(report.fidelity_to_oracle - 1.0) < 1e-10
    assert report.locally_equivalent_to_all_ones
    assert report.passed


@pytest.mark.parametrize("n", range(2, 7))
def test_qubit_subspace_closure(n):
    # borrowed levels are only transient: nothing remains above level 1
    circ = build_n_ts_circuit(n)
    u = circuit_unitary(circ)
    assert qubit_subspace_leakage(u, circ.dims) < 1e-12


@pytest.mark.parametrize("n", range(2, 6))
def test_full_unitary_involutive_on_qubit_subspace(n):
    circ = build_n_ts_circuit(n)
    u = circuit_unitary(circ)
    r = restrict_to_qubit_subspace(u, circ.dims)
    assert np.max(np.abs(r @ r - np.eye(2 ** (n + 1)))) < 1e-10


def test_max_level_used_matches_construction():
    for n in (2, 3, 4):
        report = verify_decomposition(
            build_n_ts_circuit(n), oracle_n_toffoli_sign(n, expected_flipped_component(n)), n)
        assert report.max_level_used == n


# ---------------------------------------------------------------------------
# oracle and verification
# ---------------------------------------------------------------------------

def test_oracle_n2_component_101_at_index_5():
    oracle = oracle_n_toffoli_sign(2, (1, 0, 1))
    diag = np.diagonal(oracle.matrix).real
    assert diag[5] == -1.0
    assert np.sum(diag < 0) == 1


def test_oracle_is_involution():
    oracle = oracle_n_toffoli_sign(3, 11)
    assert np.allclose(oracle.matrix @ oracle.matrix, np.eye(16))


def test_oracle_n3_all_ones_at_index_15():
    oracle = oracle_n_toffoli_sign(3, (1, 1, 1, 1))
    assert oracle.matrix[15, 15] == -1.0


def test_oracle_rejects_out_of_range_component():
    with pytest.raises(ValueError):
        oracle_n_toffoli_sign(2, 8)


def test_verify_reports_counts_and_references():
    report = verify_decomposition(
        build_ts_circuit(), oracle_n_toffoli_sign(2, (1, 0, 1)), 2)
    assert report.two_qudit_gate_count == 3
    assert report.reference_counts["cs_gates_qubit_only_3toffoli"] == 6
    assert report.reference_counts["two_qubit_gates_qubit_only_5toffoli"] == 64
    assert "PASS" in report.to_text()


def test_corrupted_circuit_reports_low_fidelity_without_raising():
    circ = build_ts_circuit()
    corrupted = CircuitDescription(circ.dims, circ.steps[:3] + circ.steps[4:])  # drop a CNOT
    report = verify_decomposition(corrupted, oracle_n_toffoli_sign(2, (1, 0, 1)), 2)
    assert report.fidelity_to_oracle < 1.0 - 1e-6
    assert not report.passed
