"""Dense statevector engine with named registers.

Registers are listed most-significant first. A register of width w holds
an integer value whose bit i sits at global bit position ``offset + i``;
the last register occupies the least-significant bits. The protocol
layout is ``k, up, d, e, v`` so ``v`` is least significant.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ZeroBranch

UNITARY_TOL = 1e-10
ZERO_BRANCH_TOL = 1e-14
MAX_QUBITS = 24


@dataclass(frozen=True)
class RegisterLayout:
    registers: tuple[tuple[str, int], ...]

    def __post_init__(self):
        names = [n for n, _ in self.registers]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate register names in {names}")
        if any(w < 1 for _, w in self.registers):
            raise ValueError("register widths must be >= 1")
        if self.n_qubits > MAX_QUBITS:
            raise ValueError(f"{self.n_qubits} qubits exceeds the dense-simulation cap of {MAX_QUBITS}")

    @property
    def n_qubits(self) -> int:
        return sum(w for _, w in self.registers)

    @property
    def names(self) -> list[str]:
        return [n for n, _ in self.registers]

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(2**w for _, w in self.registers)

    def width(self, name: str) -> int:
        return self.registers[self.axis(name)][1]

    def axis(self, name: str) -> int:
        for i, (n, _) in enumerate(self.registers):
            if n == name:
                return i
        raise KeyError(f"no register named {name!r}")

    def offset(self, name: str) -> int:
        ax = self.axis(name)
        return sum(w for _, w in self.registers[ax + 1 :])

    def bits(self, name: str) -> list[int]:
        """Global bit positions of a register, least-significant first."""
        off = self.offset(name)
        return list(range(off, off + self.width(name)))


def protocol_layout(chi: int, n_v: int) -> RegisterLayout:
    return RegisterLayout((("k", 1), ("up", 1), ("d", 1), ("e", chi), ("v", n_v)))


@dataclass
class StateVector:
    amps: np.ndarray
    layout: RegisterLayout

    def __post_init__(self):
        if self.amps.shape != (2**self.layout.n_qubits,):
            raise ValueError(f"amplitude vector has shape {self.amps.shape}, layout needs {2**self.layout.n_qubits}")

    def tensor(self) -> np.ndarray:
        """View with one axis per register."""
        return self.amps.reshape(self.layout.shape)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amps))

    def copy(self) -> "StateVector":
        return StateVector(self.amps.copy(), self.layout)


def product_state(layout: RegisterLayout, values: dict | None = None) -> StateVector:
    """Product state with each register either a basis value (int) or an amplitude vector."""
    values = values or {}
    unknown = set(values) - set(layout.names)
    if unknown:
        raise KeyError(f"unknown registers {sorted(unknown)}")
    out = np.ones(1, dtype=complex)
    for name, w in layout.registers:
        v = values.get(name, 0)
        if isinstance(v, (int, np.integer)):
            vec = np.zeros(2**w, dtype=complex)
            vec[v] = 1.0
        else:
            vec = np.asarray(v, dtype=complex).ravel()
            if vec.size != 2**w:
                raise ValueError(f"register {name!r} needs {2**w} amplitudes, got {vec.size}")
        out = np.kron(out, vec)
    return StateVector(out, layout)


def _check_unitary(U: np.ndarray, tol: float = UNITARY_TOL) -> None:
    if U.ndim != 2 or U.shape[0] != U.shape[1]:
        raise ValueError(f"gate must be square, got {U.shape}")
    if np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))) > tol:
        raise ValueError("gate is not unitary")


def apply_gate(
    state: StateVector,
    gate: np.ndarray,
    targets: Sequence[int],
    controls: Iterable[tuple[int, int]] = (),
) -> StateVector:
    """Apply a 2^k x 2^k gate to bit positions ``targets``.

    ``controls`` lists ``(bit, polarity)``; polarity 0 is an open control.
    The first target is the most significant bit of the gate's index.
    """
    gate = np.asarray(gate, dtype=complex)
    targets = list(targets)
    controls = list(controls)
    if gate.shape != (2 ** len(targets),) * 2:
        raise ValueError(f"gate of shape {gate.shape} does not fit {len(targets)} targets")
    _check_unitary(gate, 1e-12)
    used = targets + [b for b, _ in controls]
    if len(set(used)) != len(used):
        raise ValueError("target and control bits overlap")
    n = state.layout.n_qubits
    if any(not 0 <= b < n for b in used):
        raise ValueError("bit position out of range")

    psi = state.amps.reshape((2,) * n).copy()
    sel = [slice(None)] * n
    for b, pol in controls:
        sel[n - 1 - b] = pol
    sel = tuple(sel)
    # axes of the sub-block that remain after fixing control bits
    remaining = [ax for ax in range(n) if not isinstance(sel[ax], int)]
    t_axes = [remaining.index(n - 1 - b) for b in targets]
    block = psi[sel]
    g = gate.reshape((2,) * (2 * len(targets)))
    k = len(targets)
    moved = np.tensordot(g, block, axes=(list(range(k, 2 * k)), t_axes))
    block_new = np.moveaxis(moved, list(range(k)), t_axes)
    psi[sel] = block_new
    return StateVector(psi.reshape(-1), state.layout)


def _control_index(state: StateVector, controls) -> tuple:
    idx = [slice(None)] * len(state.layout.registers)
    for name, value in controls:
        idx[state.layout.axis(name)] = value
    return tuple(idx)


def apply_register_unitary(
    state: StateVector,
    U: np.ndarray,
    register: str,
    controls: Iterable[tuple[str, int]] = (),
    check: bool = True,
) -> StateVector:
    """Apply a dense unitary to one register, optionally conditioned on other registers' values."""
    U = np.asarray(U, dtype=complex)
    dim = 2 ** state.layout.width(register)
    if U.shape != (dim, dim):
        raise ValueError(f"unitary of shape {U.shape} does not fit register {register!r} of dimension {dim}")
    if check:
        _check_unitary(U)
    controls = list(controls)
    if any(name == register for name, _ in controls):
        raise ValueError("a register cannot control itself")
    if not controls:
        layout = state.layout
        ax = layout.axis(register)
        pre = int(np.prod(layout.shape[:ax]))
        out = np.matmul(U, state.amps.reshape(pre, dim, -1))
        return StateVector(out.reshape(-1), layout)
    psi = state.tensor().copy()
    idx = _control_index(state, controls)
    block = psi[idx]
    # the target axis shifts left by the number of fixed axes before it
    ax = state.layout.axis(register)
    ax -= sum(1 for name, _ in controls if state.layout.axis(name) < ax)
    block = np.moveaxis(np.tensordot(U, block, axes=([1], [ax])), 0, ax)
    psi[idx] = block
    return StateVector(psi.reshape(-1), state.layout)


def _fourier(state: StateVector, register: str, inverse: bool) -> StateVector:
    ax = state.layout.axis(register)
    psi = state.tensor()
    out = np.fft.ifft(psi, axis=ax, norm="ortho") if inverse else np.fft.fft(psi, axis=ax, norm="ortho")
    return StateVector(out.reshape(-1), state.layout)


def qft(state: StateVector, register: str) -> StateVector:
    """Discrete Fourier transform with kernel exp(-2 pi i j k / N) on one register."""
    return _fourier(state, register, inverse=False)


def inverse_qft(state: StateVector, register: str) -> StateVector:
    """Inverse of :func:`qft`; maps sum_j exp(-2 pi i j k/N)|j>/sqrt(N) to |k>."""
    return _fourier(state, register, inverse=True)


def hadamard_all(state: StateVector, register: str) -> StateVector:
    """H on every qubit of a register, as an in-place Walsh-Hadamard butterfly."""
    layout = state.layout
    ax = layout.axis(register)
    N = 2 ** layout.width(register)
    pre = int(np.prod(layout.shape[:ax]))
    post = int(np.prod(layout.shape[ax + 1 :]))
    psi = state.amps.reshape(pre, N, post).copy()
    h = 1
    while h < N:
        view = psi.reshape(pre, N // (2 * h), 2, h, post)
        lo = view[:, :, 0].copy()
        hi = view[:, :, 1]
        view[:, :, 0] += hi
        np.subtract(lo, hi, out=hi)
        h *= 2
    psi *= 1.0 / np.sqrt(N)
    return StateVector(psi.reshape(-1), layout)


def post_select(state: StateVector, pattern) -> tuple[float, StateVector]:
    """Project onto register values ``pattern`` (dict or list of (register, value)).

    Returns the branch probability and the renormalized projected state.
    """
    items = list(pattern.items()) if isinstance(pattern, dict) else list(pattern)
    names = [n for n, _ in items]
    if len(set(names)) != len(names):
        raise ValueError("pattern names a register twice")
    mask = np.zeros(state.layout.shape, dtype=bool)
    mask[_control_index(state, items)] = True
    kept = np.where(mask.reshape(-1), state.amps, 0.0)
    prob = float(np.vdot(kept, kept).real)
    if prob < ZERO_BRANCH_TOL:
        raise ZeroBranch(f"selected branch {dict(items)} has probability {prob:.3e}")
    return prob, StateVector(kept / np.sqrt(prob), state.layout)


def register_amplitudes(state: StateVector, fixed: dict, register: str) -> np.ndarray:
    """Amplitudes of ``register`` with every other register pinned to the values in ``fixed``."""
    missing = set(state.layout.names) - set(fixed) - {register}
    if missing:
        raise ValueError(f"registers {sorted(missing)} are not pinned")
    return state.tensor()[_control_index(state, fixed.items())].copy()


def marginal(state: StateVector, register: str) -> np.ndarray:
    """Measurement distribution of one register."""
    ax = state.layout.axis(register)
    p = np.abs(state.tensor()) ** 2
    others = tuple(i for i in range(p.ndim) if i != ax)
    return p.sum(axis=others)


def dump_state(state: StateVector, path) -> None:
    """Write ``index real imag`` per line; a debugging aid, not a stable format."""
    with open(path, "w") as fh:
        for i, a in enumerate(state.amps):
            fh.write(f"{i} {a.real:.17g} {a.imag:.17g}\n")
