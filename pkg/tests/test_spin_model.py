"""Chain model, sparse action, Trotter blocks and schedules."""

import numpy as np
import pytest
import scipy.linalg

from nnquench import (
    NumericError,
    block_generator,
    block_unitary,
    bond_durations,
    bond_term,
    build_model,
    configuration_index,
    connected_elements,
    diagonal_energy,
    embed_operator,
    enumerate_configurations,
    trotter_schedule,
)
from nnquench.oracle import dense_hamiltonian

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SZ = np.diag([1.0, -1.0]).astype(complex)


def schedule_unitary(model, span, dt):
    sched = trotter_schedule(model, span, dt)
    u = np.eye(2**model.L, dtype=complex)
    for blk in sched.blocks:
        u = embed_operator(blk.unitary, model.L, blk.start) @ u
    return u


def test_build_model_pure_zz_eigenvalues():
    m = build_model(2, J=1.0, h_x=0.0, h_z=0.0)
    evals = np.sort(np.linalg.eigvalsh(dense_hamiltonian(m)))
    np.testing.assert_allclose(evals, [-1, -1, 1, 1], atol=1e-14)


def test_build_model_quench_couplings():
    m = build_model(14, J=1.0, h_x=0.5, h_z=0.5)
    assert (m.L, m.J, m.h_x, m.h_z) == (14, 1.0, 0.5, 0.5)
    np.testing.assert_allclose(m.boundary_weights, [1.0] + [0.5] * 12 + [1.0])


def test_build_model_l2_ground_energy_fixture():
    # independent 4x4 assembly: H = J sz sz - hx (sx1 + sx2) - hz (sz1 + sz2)
    h = (
        np.kron(SZ, SZ)
        - 0.5 * (np.kron(SX, np.eye(2)) + np.kron(np.eye(2), SX))
        - 0.5 * (np.kron(SZ, np.eye(2)) + np.kron(np.eye(2), SZ))
    )
    expected = np.linalg.eigvalsh(h)[0]
    m = build_model(2, 1.0, 0.5, 0.5)
    got = np.linalg.eigvalsh(dense_hamiltonian(m))[0]
    np.testing.assert_allclose(got, expected, atol=1e-14)


def test_build_model_rejects_short_chain():
    with pytest.raises(ValueError):
        build_model(1)


def test_connected_elements_aligned_no_field():
    m = build_model(3, J=1.0, h_x=0.0, h_z=0.0)
    elems = connected_elements(m, np.array([1, 1, 1], dtype=np.int8))
    assert len(elems) == 1
    np.testing.assert_allclose(elems[0][1], 2.0)


def test_connected_elements_with_transverse_field():
    m = build_model(3, J=1.0, h_x=0.5, h_z=0.0)
    elems = connected_elements(m, np.array([1, 1, 1], dtype=np.int8))
    assert len(elems) == 4
    np.testing.assert_allclose(elems[0][1], 2.0)
    for y, val in elems[1:]:
        np.testing.assert_allclose(val, -0.5)
        assert np.sum(y != 1) == 1


@pytest.mark.parametrize("L", [2, 5, 8, 10])
def test_connected_elements_match_dense(L, rng):
    m = build_model(L, J=1.0, h_x=0.5, h_z=0.5)
    dim = 2**L
    h_sparse = np.zeros((dim, dim), dtype=complex)
    configs = enumerate_configurations(L)
    for col in range(dim):
        for y, val in connected_elements(m, configs[col]):
            h_sparse[configuration_index(y), col] += val
    h_bonds = sum(
        embed_operator(bond_term(m, l), L, l) for l in range(1, L)
    )
    np.testing.assert_allclose(h_sparse, h_bonds, atol=1e-12)
    np.testing.assert_allclose(h_sparse, dense_hamiltonian(m), atol=1e-12)


def test_diagonal_energy_batched():
    m = build_model(3, J=1.0, h_x=0.3, h_z=0.2)
    configs = enumerate_configurations(3)
    vals = diagonal_energy(m, configs)
    for c, v in zip(configs, vals):
        np.testing.assert_allclose(float(diagonal_energy(m, c)), v)


def test_block_generator_interior_zz_diagonal():
    m = build_model(5, J=1.3, h_x=0.0, h_z=0.0)
    gen = block_generator(m, 2, 2)
    np.testing.assert_allclose(gen, np.diag([1.3, -1.3, -1.3, 1.3]), atol=1e-14)


def test_block_generator_boundary_weights():
    m = build_model(3, J=0.0, h_x=0.5, h_z=0.0)
    gen = block_generator(m, 1, 2)
    expected = -0.5 * (1.0 * np.kron(SX, np.eye(2)) + 0.5 * np.kron(np.eye(2), SX))
    np.testing.assert_allclose(gen, expected, atol=1e-14)


def test_block_generator_hermitian_d6():
    m = build_model(14, 1.0, 0.5, 0.5)
    gen = block_generator(m, 1, 6)
    assert np.max(np.abs(gen - gen.conj().T)) <= 1e-12


def test_block_generator_range_error():
    m = build_model(5, 1.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        block_generator(m, 3, 4)


def test_block_unitary_zero_time():
    gen = block_generator(build_model(4, 1.0, 0.5, 0.5), 1, 2)
    np.testing.assert_allclose(block_unitary(gen, 0.0), np.eye(4), atol=1e-14)


def test_block_unitary_diagonal_exponential():
    gen = np.diag([1.0, -1.0, -1.0, 1.0]).astype(complex)
    tau = 0.37
    u = block_unitary(gen, tau)
    np.testing.assert_allclose(
        u, np.diag(np.exp(-1j * np.array([1, -1, -1, 1]) * tau)), atol=1e-13
    )


def test_block_unitary_is_unitary_d6():
    m = build_model(14, 1.0, 0.5, 0.5)
    u = block_unitary(block_generator(m, 1, 6), 0.05)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(64), atol=1e-12)


def test_block_unitary_rejects_non_hermitian():
    bad = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
    with pytest.raises(NumericError):
        block_unitary(bad, 0.1)


def test_schedule_d2_sequence():
    m = build_model(14, 1.0, 0.5, 0.5)
    sched = trotter_schedule(m, 2, 0.1)
    starts = [b.start for b in sched.blocks]
    assert starts == list(range(1, 14)) + list(range(13, 0, -1))
    assert all(b.duration == 0.05 for b in sched.blocks)


def test_schedule_d6_tiling():
    m = build_model(14, 1.0, 0.5, 0.5)
    sched = trotter_schedule(m, 6, 0.1)
    assert [(b.start, b.span) for b in sched.blocks] == [
        (1, 6),
        (6, 6),
        (11, 4),
        (11, 4),
        (6, 6),
        (1, 6),
    ]


def test_schedule_bond_coverage():
    for L, span in [(14, 2), (14, 6), (10, 6), (7, 3), (2, 2)]:
        m = build_model(L, 1.0, 0.5, 0.5)
        sched = trotter_schedule(m, span, 0.1)
        np.testing.assert_allclose(bond_durations(sched, L), 0.1)


def test_schedule_span_too_large():
    with pytest.raises(ValueError):
        trotter_schedule(build_model(4, 1.0, 0.5, 0.5), 5, 0.1)


@pytest.mark.parametrize("dt", [0.05, 0.2, 0.7])
def test_schedule_exact_for_single_bond(dt):
    m = build_model(2, 1.0, 0.5, 0.5)
    u = schedule_unitary(m, 2, dt)
    u_exact = scipy.linalg.expm(-1j * dense_hamiltonian(m) * dt)
    assert np.max(np.abs(u - u_exact)) <= 1e-12


def test_schedule_second_order_scaling():
    m = build_model(8, 1.0, 0.5, 0.5)
    h = dense_hamiltonian(m)

    def one_step_error(dt):
        diff = schedule_unitary(m, 2, dt) - scipy.linalg.expm(-1j * h * dt)
        return np.max(np.abs(diff))

    ratio = one_step_error(0.1) / one_step_error(0.05)
    assert 6.0 <= ratio <= 10.0


def test_all_block_unitaries_unitary():
    for L, span in [(6, 2), (10, 6), (14, 6)]:
        m = build_model(L, 1.0, 0.5, 0.5)
        for blk in trotter_schedule(m, span, 0.1).blocks:
            dim = 2**blk.span
            assert np.max(np.abs(blk.unitary.conj().T @ blk.unitary - np.eye(dim))) <= 1e-12


def test_enumerate_and_index_roundtrip():
    configs = enumerate_configurations(5)
    assert configs.shape == (32, 5)
    np.testing.assert_array_equal(configuration_index(configs), np.arange(32))
    assert configuration_index(configs[7]) == 7
