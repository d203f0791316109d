"""The state-dependent gradient operator D and its evolutions.

D = Tr_{2..p}[(I (x) rho^{(x)p-1}) M] with rho = |X><X| the dressed state.
Its spectrum is rescaled into a window strictly inside (-1/2, 1/2) so that
phase estimation with the unit evolution exp(-2 pi i D) reads every
eigenvalue without wrap-around. The rescaling factor is part of the
effective learning rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoding import DressedState, padded_dim
from .poly_core import PolynomialProblem, contract_tail, max_norm, permutation_matrix
from .statevector import StateVector

MARGIN = 1.0 / 32


@dataclass(frozen=True)
class GradientOperator:
    D: np.ndarray
    spectral_radius: float
    prescale: float
    margin: float = MARGIN
    logical_dim: int | None = None
    _eig: tuple | None = field(default=None, repr=False, compare=False)

    @property
    def window(self) -> float:
        return 0.5 - self.margin

    @property
    def eig(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            w, V = np.linalg.eigh(self.D)
            object.__setattr__(self, "_eig", (w, V))
        return self._eig


def hermitian_part(D: np.ndarray) -> np.ndarray:
    return 0.5 * (D + D.conj().T)


def make_operator(
    D: np.ndarray, margin: float = MARGIN, prescale: float = 1.0, logical_dim: int | None = None
) -> GradientOperator:
    """Wrap a symmetric matrix, shrinking it into the admissible spectral window if needed.

    ``prescale`` is a factor already applied upstream; the returned operator
    records the product.
    """
    D = hermitian_part(np.asarray(D, dtype=float))
    w = np.linalg.eigvalsh(D)
    radius = float(np.max(np.abs(w))) if w.size else 0.0
    window = 0.5 - margin
    factor = 1.0 if radius <= window else window / radius
    return GradientOperator(
        D=D * factor, spectral_radius=radius, prescale=prescale * factor, margin=margin, logical_dim=logical_dim
    )


def raw_D(problem: PolynomialProblem, X: np.ndarray) -> np.ndarray:
    """Unscaled D on the logical (d+1)-dimensional space for unit vector X."""
    return contract_tail(problem.M, X, X, problem.p, problem.dim)


def build_D_exact(problem: PolynomialProblem, state: DressedState, margin: float = MARGIN) -> GradientOperator:
    if state.d != problem.d:
        raise ValueError(f"state has d={state.d}, problem has d={problem.d}")
    n = padded_dim(problem.d)
    D = np.zeros((n, n))
    D[: problem.dim, : problem.dim] = raw_D(problem, state.logical)
    return make_operator(D, margin, logical_dim=problem.dim)


def evolution(opD: GradientOperator | np.ndarray, t: float) -> np.ndarray:
    """exp(-i D t) through the eigendecomposition."""
    if isinstance(opD, GradientOperator):
        w, V = opD.eig
    else:
        w, V = np.linalg.eigh(hermitian_part(np.asarray(opD)))
    return (V * np.exp(-1j * w * t)) @ V.conj().T


def controlled_U_D_matrix(opD: GradientOperator, chi: int) -> np.ndarray:
    """Dense sum_j |j><j| (x) exp(-2 pi i D j) on (e, v); for small chi only."""
    n = opD.D.shape[0]
    N = 2**chi
    out = np.zeros((N * n, N * n), dtype=complex)
    for j in range(N):
        out[j * n : (j + 1) * n, j * n : (j + 1) * n] = evolution(opD, 2 * np.pi * j)
    return out


def apply_controlled_U_D(
    state: StateVector, opD: GradientOperator, inverse: bool = False, e: str = "e", v: str = "v"
) -> StateVector:
    """Apply exp(-+2 pi i D j) to ``v`` for each value j of register ``e``.

    One full period of the e register corresponds to eigenphase 1, so a
    register value j reads as the eigenvalue j / 2**chi.
    """
    layout = state.layout
    ax_e, ax_v = layout.axis(e), layout.axis(v)
    if ax_e >= ax_v:
        raise ValueError("expected register e to be more significant than v")
    w, V = opD.eig
    N = 2 ** layout.width(e)
    sign = 1.0 if inverse else -1.0
    phases = np.exp(sign * 2j * np.pi * np.outer(np.arange(N), w))  # (j, eigen index)
    psi = state.tensor()
    # rotate v into the eigenbasis, phase by (j, k), rotate back
    psi = np.moveaxis(np.tensordot(V.conj().T, psi, axes=([1], [ax_v])), 0, ax_v)
    shape = [1] * psi.ndim
    shape[ax_e], shape[ax_v] = N, w.size
    psi = psi * phases.reshape(shape)
    psi = np.moveaxis(np.tensordot(V, psi, axes=([1], [ax_v])), 0, ax_v)
    return StateVector(psi.reshape(-1), layout)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitian_part(a - b)))))


def _check_density(rho: np.ndarray, name: str) -> None:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix")
    if np.max(np.abs(rho - rho.conj().T)) > 1e-10:
        raise ValueError(f"{name} is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > 1e-10:
        raise ValueError(f"{name} does not have unit trace")
    if np.min(np.linalg.eigvalsh(hermitian_part(rho))) < -1e-10:
        raise ValueError(f"{name} is not positive semidefinite")


def _partial_trace_tail(big: np.ndarray, dim: int, p: int) -> np.ndarray:
    rest = dim ** (p - 1)
    return np.einsum("aibi->ab", big.reshape(dim, rest, dim, rest))


def _qpca_apply(sigma, rho_tail, U, dim, p):
    big = U @ np.kron(sigma, rho_tail) @ U.conj().T
    return _partial_trace_tail(big, dim, p)


def qpca_step(sigma: np.ndarray, rho: np.ndarray, M: np.ndarray, dt: float) -> np.ndarray:
    """One qPCA step: trace out slots 2..p of exp(-i M dt)(sigma (x) rho^{(x)p-1})exp(i M dt)."""
    _check_density(sigma, "sigma")
    _check_density(rho, "rho")
    dim = sigma.shape[0]
    p = int(round(np.log(M.shape[0]) / np.log(dim)))
    if dim**p != M.shape[0] or rho.shape != sigma.shape:
        raise ValueError("M does not act on a tensor power of the state space")
    if p == 1:
        U = evolution(M, dt)
        return U @ sigma @ U.conj().T
    tail = np.ones((1, 1))
    for _ in range(p - 1):
        tail = np.kron(tail, rho)
    return _qpca_apply(sigma, tail, evolution(M, dt), dim, p)


def qpca_evolve(rho_X: np.ndarray, problem: PolynomialProblem, t: float, m: int) -> np.ndarray:
    """m qPCA steps of length t/m, each consuming fresh copies of rho_X.

    Approximates exp(-i D t) rho_X exp(i D t) with error O(t^2 / m).
    """
    if m < 1:
        raise ValueError(f"step count m must be >= 1, got {m}")
    _check_density(rho_X, "rho_X")
    dim, p = problem.dim, problem.p
    if rho_X.shape != (dim, dim):
        raise ValueError(f"rho_X must be {dim}x{dim}")
    U = evolution(problem.M, t / m)
    if p == 1:
        Um = np.linalg.matrix_power(U, m)
        return Um @ rho_X @ Um.conj().T
    tail = np.ones((1, 1))
    for _ in range(p - 1):
        tail = np.kron(tail, rho_X)
    sigma = rho_X.astype(complex)
    for _ in range(m):
        sigma = _qpca_apply(sigma, tail, U, dim, p)
    return sigma


def qpca_copy_count(problem: PolynomialProblem, eps_pca: float) -> tuple[int, int]:
    """Step count m = 4 pi^2 p^2 ||A||_max / eps_pca and the m(p-1)+1 state copies it consumes."""
    if eps_pca <= 0:
        raise ValueError("eps_pca must be positive")
    m = int(np.ceil(4 * np.pi**2 * problem.p**2 * max_norm(problem.A) / eps_pca))
    return m, m * (problem.p - 1) + 1


def trotter_M_step(problem: PolynomialProblem, dt: float) -> np.ndarray:
    """prod_k P_k exp(-i A dt) P_k, which matches exp(-i M dt) up to O(dt^2)."""
    UA = evolution(problem.A, dt)
    out = np.eye(problem.A.shape[0], dtype=complex)
    for k in range(1, problem.p + 1):
        P = permutation_matrix(k, problem.p, problem.dim)
        out = P @ UA @ P.T @ out
    return out
