"""Apply the non-unitary D to the variable register by phase estimation.

The middle of one iteration: rotate ``up``, estimate D's eigenphases into
``e``, rotate ``d`` by the signed eigenvalue (only on the up=1 branch),
then uncompute the estimate. On exit

    cos(eta)|0>_up|0>_d|X> + sin(eta)|1>_up(|0>_d D|X> + |1>_d D_perp|X>)

with ``e`` back in |0> up to phase-estimation truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .encoding import DressedState
from .grad_operator import GradientOperator, apply_controlled_U_D
from .statevector import (
    RegisterLayout,
    StateVector,
    apply_register_unitary,
    hadamard_all,
    inverse_qft,
    marginal,
    product_state,
    protocol_layout,
    qft,
)


@dataclass(frozen=True)
class PhaseEstimateConfig:
    chi: int
    n_p: int | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.chi < 1:
            raise ValueError(f"e register needs at least one qubit, got chi={self.chi}")

    @classmethod
    def from_precision(cls, n_p: int, delta: float) -> "PhaseEstimateConfig":
        """Register width for precision 2**-n_p with failure probability at most delta."""
        if n_p < 1 or not 0 < delta < 1:
            raise ValueError("need n_p >= 1 and 0 < delta < 1")
        return cls(chi=n_p + math.ceil(math.log2(2 + 1 / (2 * delta))), n_p=n_p, delta=delta)


def rx(angle: float) -> np.ndarray:
    """Real rotation |0> -> cos a|0> + sin a|1>, |1> -> -sin a|0> + cos a|1>."""
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[c, -s], [s, c]])


def signed_readout(j, chi: int):
    """Map e-register value j to an eigenvalue in [-1/2, 1/2); j = 2**(chi-1) reads as -1/2."""
    N = 2**chi
    j_arr = np.asarray(j)
    if np.any(j_arr < 0) or np.any(j_arr >= N):
        raise ValueError(f"register value out of range 0..{N - 1}")
    frac = j_arr / N
    out = np.where(frac < 0.5, frac, frac - 1.0)
    return float(out) if out.ndim == 0 else out


def conditional_rotation(state: StateVector, e: str = "e", d: str = "d", up: str = "up") -> StateVector:
    """On the up=1 branch rotate d so that |0>_d -> l|0>_d + sqrt(1-l^2)|1>_d for each e bin value l."""
    layout = state.layout
    chi = layout.width(e)
    lam = signed_readout(np.arange(2**chi), chi)
    if np.any(np.abs(lam) > 1):
        raise ValueError("eigenvalue bins outside [-1, 1]")
    s = np.sqrt(1.0 - lam**2)
    psi = state.tensor().copy()
    ax_up, ax_d, ax_e = layout.axis(up), layout.axis(d), layout.axis(e)
    shape = [1] * psi.ndim
    shape[ax_e] = lam.size
    lam_b, s_b = lam.reshape(shape), s.reshape(shape)

    def sl(up_val, d_val):
        idx = [slice(None)] * psi.ndim
        idx[ax_up], idx[ax_d] = up_val, d_val
        return tuple(idx)

    # keep singleton axes so the e axis broadcasts in place
    a0 = psi[sl(slice(1, 2), slice(0, 1))].copy()
    a1 = psi[sl(slice(1, 2), slice(1, 2))].copy()
    psi[sl(slice(1, 2), slice(0, 1))] = lam_b * a0 - s_b * a1
    psi[sl(slice(1, 2), slice(1, 2))] = s_b * a0 + lam_b * a1
    return StateVector(psi.reshape(-1), layout)


def prepare_state(dressed: DressedState, chi: int) -> StateVector:
    """|0>_k|0>_up|0>_d|0>_e|X>_v."""
    return product_state(protocol_layout(chi, dressed.n_v), {"v": dressed.amps})


def apply_gradient_branch(
    state: StateVector, opD: GradientOperator, eta: float, config: PhaseEstimateConfig
) -> StateVector:
    if state.layout.width("e") != config.chi:
        raise ValueError("e register width does not match the phase-estimation config")
    if np.max(np.abs(opD.eig[0])) > opD.window + 1e-12:
        raise ValueError("gradient operator spectrum is outside the admissible window")
    psi = apply_register_unitary(state, rx(eta), "up", check=False)
    psi = hadamard_all(psi, "e")
    psi = apply_controlled_U_D(psi, opD)
    psi = inverse_qft(psi, "e")
    psi = conditional_rotation(psi)
    psi = qft(psi, "e")
    psi = apply_controlled_U_D(psi, opD, inverse=True)
    return hadamard_all(psi, "e")


def phase_estimation_distribution(opD: GradientOperator, v_amps, chi: int) -> np.ndarray:
    """Outcome distribution of the e register after the forward half of phase estimation."""
    n_v = int(np.log2(opD.D.shape[0]))
    layout = RegisterLayout((("e", chi), ("v", n_v)))
    psi = product_state(layout, {"v": np.asarray(v_amps, dtype=complex) / np.linalg.norm(v_amps)})
    psi = hadamard_all(psi, "e")
    psi = apply_controlled_U_D(psi, opD)
    psi = inverse_qft(psi, "e")
    return marginal(psi, "e")


def estimate_eigenvalue(opD: GradientOperator, v_amps, chi: int) -> float:
    """Signed readout of the most probable e-register outcome."""
    dist = phase_estimation_distribution(opD, v_amps, chi)
    return signed_readout(int(np.argmax(dist)), chi)
