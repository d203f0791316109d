import numpy as np
import pytest

from qgrad.encoding import encode
from qgrad.grad_operator import make_operator
from qgrad.truncation import (
    CE_matrix,
    E_matrix,
    K_matrix,
    apply_K_projector,
    apply_K_via_circuit,
    compose_gate_set,
    gate_set_basis_table,
    is_trap_state,
    toffoli_decompose_CE,
)


@pytest.mark.parametrize("dim", [2, 4, 8])
def test_K_from_E(dim):
    assert np.array_equal((np.eye(dim) + E_matrix(dim)) / 2, K_matrix(dim))


def test_CE_blocks():
    ce = CE_matrix(2)
    assert np.array_equal(ce[:4, :4], np.eye(4))
    assert np.array_equal(ce[4:, 4:], E_matrix(4))


@pytest.mark.parametrize("n_v", [1, 2, 3, 4])
def test_decomposition_is_bit_exact(n_v):
    gs = toffoli_decompose_CE(n_v)
    assert gs.toffoli_count == 2 * (n_v - 1)
    assert gs.ancilla_count == max(0, n_v - 1)
    U = compose_gate_set(gs)
    # keep work qubits (least significant) in |0>
    keep = np.arange(2 ** (1 + n_v)) << gs.ancilla_count
    assert np.array_equal(U[np.ix_(keep, keep)], CE_matrix(n_v))
    for idx, sign, out in gate_set_basis_table(gs):
        assert out == idx
        assert sign == (-1 if idx == 2**n_v else 1)


def test_circuit_K_equals_projector(rng):
    for n_v in (1, 2, 3):
        for _ in range(20):
            psi = rng.normal(size=2**n_v) + 1j * rng.normal(size=2**n_v)
            p1, a = apply_K_via_circuit(psi)
            p2, b = apply_K_projector(psi)
            assert abs(p1 - p2) < 1e-12
            assert np.abs(a - b).max() < 1e-12
    with pytest.raises(ValueError):
        apply_K_via_circuit(np.ones(3))


def test_trap_detection():
    op = make_operator(np.diag([0.2, -0.1]))
    assert is_trap_state(encode([0.0]), op, 1e-9)
    assert not is_trap_state(encode([1.0]), op, 1e-9)
