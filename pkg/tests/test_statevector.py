import numpy as np
import pytest

from qgrad.statevector import (
    MAX_QUBITS,
    RegisterLayout,
    StateVector,
    apply_gate,
    apply_register_unitary,
    hadamard_all,
    inverse_qft,
    marginal,
    post_select,
    product_state,
    protocol_layout,
    qft,
    register_amplitudes,
)
from qgrad.errors import ZeroBranch

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)
X = np.array([[0, 1], [1, 0]])


def rand_state(layout, rng):
    a = rng.normal(size=2**layout.n_qubits) + 1j * rng.normal(size=2**layout.n_qubits)
    return StateVector(a / np.linalg.norm(a), layout)


def test_layout_bits():
    L = protocol_layout(3, 2)
    assert L.n_qubits == 8
    assert L.bits("v") == [0, 1]
    assert L.bits("e") == [2, 3, 4]
    assert L.bits("k") == [7]
    with pytest.raises(KeyError):
        L.axis("zz")
    with pytest.raises(ValueError):
        RegisterLayout((("a", 1), ("a", 2)))
    with pytest.raises(ValueError, match="cap"):
        RegisterLayout((("a", MAX_QUBITS + 1),))


def test_product_state_index():
    L = RegisterLayout((("a", 1), ("b", 2)))
    s = product_state(L, {"a": 1, "b": 2})
    assert np.argmax(np.abs(s.amps)) == 0b110


def test_register_unitary_matches_kron(rng):
    L = RegisterLayout((("a", 1), ("b", 2), ("c", 1)))
    s = rand_state(L, rng)
    Q, _ = np.linalg.qr(rng.normal(size=(4, 4)))
    out = apply_register_unitary(s, Q, "b")
    assert np.allclose(out.amps, np.kron(np.kron(np.eye(2), Q), np.eye(2)) @ s.amps)


def test_controlled_register_unitary(rng):
    L = RegisterLayout((("a", 1), ("b", 1)))
    s = rand_state(L, rng)
    out = apply_register_unitary(s, X, "b", controls=[("a", 1)])
    CNOT = np.eye(4)[[0, 1, 3, 2]]
    assert np.allclose(out.amps, CNOT @ s.amps)
    with pytest.raises(ValueError):
        apply_register_unitary(s, X, "b", controls=[("b", 1)])
    with pytest.raises(ValueError, match="unitary"):
        apply_register_unitary(s, np.ones((2, 2)), "b")


def test_apply_gate_open_control(rng):
    L = RegisterLayout((("q1", 1), ("q0", 1)))
    s = rand_state(L, rng)
    out = apply_gate(s, X, [0], [(1, 0)])
    assert np.allclose(out.amps, np.eye(4)[[1, 0, 2, 3]] @ s.amps)
    with pytest.raises(ValueError):
        apply_gate(s, X, [0], [(0, 1)])


def test_hadamard_all_matches_dense(rng):
    L = RegisterLayout((("a", 1), ("e", 3), ("v", 2)))
    s = rand_state(L, rng)
    H3 = np.kron(np.kron(H, H), H)
    assert np.allclose(hadamard_all(s, "e").amps, apply_register_unitary(s, H3, "e").amps)


def test_qft_inverse_and_kernel(rng):
    L = RegisterLayout((("e", 4), ("v", 1)))
    s = rand_state(L, rng)
    assert np.allclose(inverse_qft(qft(s, "e"), "e").amps, s.amps)
    N = 16
    plane = product_state(RegisterLayout((("e", 4),)), {"e": np.exp(-2j * np.pi * 5 * np.arange(N) / N) / 4})
    assert np.argmax(np.abs(inverse_qft(plane, "e").amps)) == 5


def test_post_select_and_marginal(rng):
    L = RegisterLayout((("a", 1), ("v", 2)))
    s = rand_state(L, rng)
    m = marginal(s, "a")
    assert m.sum() == pytest.approx(1.0)
    prob, sel = post_select(s, {"a": 0})
    assert prob == pytest.approx(m[0])
    assert sel.norm() == pytest.approx(1.0)
    v = register_amplitudes(sel, {"a": 0}, "v")
    assert np.allclose(v, s.amps[:4] / np.sqrt(prob))
    z = product_state(L, {"a": 1})
    with pytest.raises(ZeroBranch):
        post_select(z, {"a": 0})
    with pytest.raises(ValueError):
        register_amplitudes(s, {}, "v")
