"""Dressed amplitude encoding of an augmented point X = (1, x)."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TrapState

TRAP_TOLERANCE = 1e-9


def n_qubits_for(d: int) -> int:
    """Width of the variable register holding d + 1 amplitudes."""
    return max(1, int(np.ceil(np.log2(d + 1))))


def padded_dim(d: int) -> int:
    return 2 ** n_qubits_for(d)


@dataclass(frozen=True)
class DressedState:
    amps: np.ndarray
    cos_gamma: float
    d: int

    @property
    def n_v(self) -> int:
        return n_qubits_for(self.d)

    @property
    def logical(self) -> np.ndarray:
        """Amplitudes on the d + 1 meaningful basis states."""
        return self.amps[: self.d + 1]


def encode(x) -> DressedState:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("cannot encode an empty point (d = 0)")
    if not np.all(np.isfinite(x)):
        raise ValueError("point has non-finite entries")
    d = x.size
    cos_gamma = 1.0 / np.sqrt(1.0 + float(x @ x))
    amps = np.zeros(padded_dim(d))
    amps[0] = cos_gamma
    amps[1 : d + 1] = cos_gamma * x
    return DressedState(amps=amps, cos_gamma=cos_gamma, d=d)


def from_amplitudes(amps, d: int) -> DressedState:
    """Wrap an arbitrary real amplitude vector, normalizing and fixing the sign of amps[0].

    Entries at padding indices must already be zero.
    """
    a = np.asarray(amps, dtype=float).ravel()
    if a.size != padded_dim(d):
        raise ValueError(f"expected {padded_dim(d)} amplitudes for d={d}, got {a.size}")
    if np.any(a[d + 1 :] != 0.0):
        raise ValueError("padding amplitudes must be zero")
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise ValueError("zero amplitude vector")
    a = a / norm
    if a[0] < 0:
        a = -a
    return DressedState(amps=a, cos_gamma=float(a[0]), d=d)


def decode(state: DressedState, trap_tolerance: float = TRAP_TOLERANCE) -> np.ndarray:
    a0 = state.amps[0]
    if abs(a0) <= trap_tolerance:
        raise TrapState(f"|0> amplitude {a0:.3e} is below {trap_tolerance:.1e}")
    return state.amps[1 : state.d + 1] / a0


def estimate_cos_gamma(state: DressedState, shots: int, rng: np.random.Generator) -> float:
    """Estimate cos(gamma) from computational-basis samples of the state.

    The relative error shrinks like 1/sqrt(shots).
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    p0 = min(1.0, float(state.amps[0] ** 2))
    hits = rng.binomial(shots, p0)
    return float(np.sqrt(hits / shots))
