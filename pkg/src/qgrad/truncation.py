"""The projector K = diag(0, 1, ..., 1) via one ancilla and post-selection.

H_a C_E H_a |0>_a|psi> = |0>_a (I+E)/2 |psi> + |1>_a (I-E)/2 |psi> with
E = diag(-1, 1, ..., 1), and (I+E)/2 = K, so keeping ancilla |0> leaves K|psi>.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .encoding import DressedState
from .grad_operator import GradientOperator
from .statevector import (
    RegisterLayout,
    StateVector,
    apply_gate,
    apply_register_unitary,
    post_select,
    product_state,
    register_amplitudes,
)

_X = np.array([[0.0, 1.0], [1.0, 0.0]])
_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
_Z = np.diag([1.0, -1.0])


def E_matrix(dim: int) -> np.ndarray:
    E = np.eye(dim)
    E[0, 0] = -1.0
    return E


def K_matrix(dim: int) -> np.ndarray:
    K = np.eye(dim)
    K[0, 0] = 0.0
    return K


def CE_matrix(n_v: int) -> np.ndarray:
    """|0><0|_a (x) I + |1><1|_a (x) E with the ancilla most significant."""
    dim = 2**n_v
    out = np.eye(2 * dim)
    out[dim:, dim:] = E_matrix(dim)
    return out


def apply_K_via_circuit(psi) -> tuple[float, np.ndarray]:
    """Post-selected K on a vector; returns (probability, normalized K psi)."""
    psi = np.asarray(psi, dtype=complex).ravel()
    n_v = int(np.log2(psi.size))
    if 2**n_v != psi.size:
        raise ValueError("vector length must be a power of two")
    layout = RegisterLayout((("a", 1), ("v", n_v)))
    st = product_state(layout, {"v": psi / np.linalg.norm(psi)})
    st = apply_register_unitary(st, _H, "a", check=False)
    st = apply_register_unitary(st, E_matrix(2**n_v), "v", controls=[("a", 1)], check=False)
    st = apply_register_unitary(st, _H, "a", check=False)
    prob, st = post_select(st, {"a": 0})
    return prob, register_amplitudes(st, {"a": 0}, "v")


def apply_K_projector(psi) -> tuple[float, np.ndarray]:
    """Same as :func:`apply_K_via_circuit` by direct projection."""
    psi = np.asarray(psi, dtype=complex).ravel()
    psi = psi / np.linalg.norm(psi)
    out = psi.copy()
    out[0] = 0.0
    prob = float(np.vdot(out, out).real)
    return prob, out / np.sqrt(prob) if prob > 0 else out


class Gate(NamedTuple):
    name: str  # "x", "cz" or "ccx"
    qubits: tuple[int, ...]  # controls first, target last


@dataclass(frozen=True)
class TruncationGateSet:
    """Elementary-gate realization of C_E.

    Qubit 0 is the ancilla a, qubits 1..n_v hold v (qubit 1 + i is bit i of
    v), and the remaining ``ancilla_count`` qubits are work qubits that
    start and end in |0>.
    """

    n_v: int
    E: np.ndarray
    CE_gate_list: tuple[Gate, ...]
    ancilla_count: int

    @property
    def n_qubits(self) -> int:
        return 1 + self.n_v + self.ancilla_count

    @property
    def toffoli_count(self) -> int:
        return sum(1 for g in self.CE_gate_list if g.name == "ccx")


def toffoli_decompose_CE(n_v: int) -> TruncationGateSet:
    """X-conjugated multi-controlled Z with a Toffoli V-chain over n_v - 1 work qubits."""
    if n_v < 1:
        raise ValueError("n_v must be >= 1")
    v = [1 + i for i in range(n_v)]
    work = [1 + n_v + i for i in range(n_v - 1)]
    flips = [Gate("x", (q,)) for q in v]
    chain = []
    if n_v > 1:
        chain.append(Gate("ccx", (v[0], v[1], work[0])))
        for i in range(2, n_v):
            chain.append(Gate("ccx", (work[i - 2], v[i], work[i - 1])))
        last = work[-1]
    else:
        last = v[0]
    gates = flips + chain + [Gate("cz", (0, last))] + chain[::-1] + flips
    return TruncationGateSet(n_v=n_v, E=E_matrix(2**n_v), CE_gate_list=tuple(gates), ancilla_count=len(work))


def _apply_to_basis(gates, bits: list[int]) -> tuple[int, list[int]]:
    """Classical simulation of a basis state; returns (sign, output bits)."""
    bits = list(bits)
    sign = 1
    for g in gates:
        if g.name == "x":
            bits[g.qubits[0]] ^= 1
        elif g.name == "ccx":
            c1, c2, t = g.qubits
            bits[t] ^= bits[c1] & bits[c2]
        elif g.name == "cz":
            c, t = g.qubits
            if bits[c] and bits[t]:
                sign = -sign
        else:
            raise ValueError(f"unknown gate {g.name!r}")
    return sign, bits


def gate_set_basis_table(gs: TruncationGateSet) -> list[tuple[int, int, int]]:
    """(input index, sign, output index) for every basis input with work qubits in |0>.

    Index convention: ancilla is the most significant bit, then v's bits.
    """
    rows = []
    n = 1 + gs.n_v
    for idx in range(2**n):
        a = idx >> gs.n_v
        vbits = [(idx >> i) & 1 for i in range(gs.n_v)]
        sign, out = _apply_to_basis(gs.CE_gate_list, [a] + vbits + [0] * gs.ancilla_count)
        if any(out[1 + gs.n_v :]):
            raise AssertionError(f"work qubits not restored for input {idx}")
        out_idx = (out[0] << gs.n_v) | sum(b << i for i, b in enumerate(out[1 : 1 + gs.n_v]))
        rows.append((idx, sign, out_idx))
    return rows


def compose_gate_set(gs: TruncationGateSet) -> np.ndarray:
    """Full unitary of the gate list on all 1 + n_v + ancilla_count qubits.

    The global index puts qubit 0 (ancilla) most significant, then v's bit
    n_v-1 down to bit 0, then the work qubits.
    """
    n = gs.n_qubits
    layout = RegisterLayout(tuple((f"q{i}", 1) for i in range(n)))

    def pos(q: int) -> int:
        # qubit order in the index: a, v[n_v-1], ..., v[0], work...
        if q == 0:
            return n - 1
        if q <= gs.n_v:
            return n - 1 - (gs.n_v - (q - 1))
        return n - 1 - q

    cols = []
    for col in range(2**n):
        amps = np.zeros(2**n, dtype=complex)
        amps[col] = 1.0
        st = StateVector(amps, layout)
        for g in gs.CE_gate_list:
            if g.name == "x":
                st = apply_gate(st, _X, [pos(g.qubits[0])])
            elif g.name == "ccx":
                c1, c2, t = g.qubits
                st = apply_gate(st, _X, [pos(t)], [(pos(c1), 1), (pos(c2), 1)])
            elif g.name == "cz":
                c, t = g.qubits
                st = apply_gate(st, _Z, [pos(t)], [(pos(c), 1)])
        cols.append(st.amps)
    return np.array(cols).T


def is_trap_state(state: DressedState, opD: GradientOperator, tol: float) -> bool:
    """True when |X> is an approximate eigenvector of D: ||D|X> - <X|D|X>|X>|| < tol."""
    X = state.amps
    DX = opD.D @ X
    return bool(np.linalg.norm(DX - (X @ DX) * X) < tol)
