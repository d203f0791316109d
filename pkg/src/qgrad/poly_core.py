"""Classical polynomial cost, its exact gradient, and the M operator.

A cost of order at most 2p in d real variables is stored as a dense real
symmetric matrix ``A`` of side ``(d+1)**p`` acting on ``X**(x)p`` where
``X = (1, x)`` is the augmented point.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal

import numpy as np

Direction = Literal["maximize", "minimize"]

SYMMETRY_TOL = 1e-12


def _integer_root(side: int, p: int) -> int | None:
    base = int(round(side ** (1.0 / p)))
    for cand in (base - 1, base, base + 1):
        if cand >= 1 and cand**p == side:
            return cand
    return None


def max_norm(a: np.ndarray) -> float:
    """Largest absolute entry."""
    return float(np.max(np.abs(a)))


@dataclass(frozen=True)
class PolynomialProblem:
    d: int
    p: int
    A: np.ndarray
    direction: Direction = "minimize"
    scale_factor: float = 1.0
    _M: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.d < 1 or self.p < 1:
            raise ValueError(f"need d >= 1 and p >= 1, got d={self.d}, p={self.p}")
        side = (self.d + 1) ** self.p
        if self.A.shape != (side, side):
            raise ValueError(f"A must be {side}x{side} for d={self.d}, p={self.p}; got {self.A.shape}")
        if np.max(np.abs(self.A - self.A.T)) > SYMMETRY_TOL:
            raise ValueError("A is not symmetric")
        if self.direction not in ("maximize", "minimize"):
            raise ValueError(f"unknown direction {self.direction!r}")
        self.A.setflags(write=False)

    @property
    def dim(self) -> int:
        """Logical dimension of one tensor slot, d + 1."""
        return self.d + 1

    @property
    def M(self) -> np.ndarray:
        if self._M is None:
            object.__setattr__(self, "_M", build_M(self))
        return self._M


def symmetrize_and_scale(A_raw, p: int) -> tuple[np.ndarray, float, int]:
    """Symmetrize ``A_raw`` and divide by ``p * ||.||_max``.

    Returns ``(A, scale_factor, d)`` where ``A = sym(A_raw) / scale_factor``.
    """
    A_raw = np.asarray(A_raw, dtype=float)
    if A_raw.ndim != 2 or A_raw.shape[0] != A_raw.shape[1]:
        raise ValueError(f"coefficient matrix must be square, got shape {A_raw.shape}")
    if p < 1:
        raise ValueError(f"half-order p must be >= 1, got {p}")
    dim = _integer_root(A_raw.shape[0], p)
    if dim is None or dim < 2:
        raise ValueError(f"matrix side {A_raw.shape[0]} is not (d+1)**{p} for an integer d >= 1")
    sym = 0.5 * (A_raw + A_raw.T)
    norm = max_norm(sym)
    if norm == 0.0:
        raise ValueError("coefficient matrix is zero; scale undefined")
    scale = p * norm
    return sym / scale, scale, dim - 1


def make_problem(A_raw, p: int, direction: Direction = "minimize", scale: bool = True) -> PolynomialProblem:
    """Build a validated problem from a raw coefficient matrix."""
    if scale:
        A, s, d = symmetrize_and_scale(A_raw, p)
    else:
        A = np.array(A_raw, dtype=float)
        d = _integer_root(A.shape[0], p)
        if d is None:
            raise ValueError(f"matrix side {A.shape[0]} is not a perfect {p}-th power")
        d -= 1
        s = 1.0
    return PolynomialProblem(d=d, p=p, A=A, direction=direction, scale_factor=s)


def augment(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    return np.concatenate(([1.0], x))


def _check_x(problem: PolynomialProblem, x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != problem.d:
        raise ValueError(f"expected a point of length {problem.d}, got {x.shape[0]}")
    return x


def tensor_power(v: np.ndarray, k: int) -> np.ndarray:
    out = np.ones(1, dtype=v.dtype)
    for _ in range(k):
        out = np.kron(out, v)
    return out


def eval_cost(problem: PolynomialProblem, x) -> float:
    """f = 1/2 X^{(x)p}^T A X^{(x)p} with the stored (scaled) A."""
    X = augment(_check_x(problem, x))
    v = tensor_power(X, problem.p)
    return 0.5 * float(v @ problem.A @ v)


def permutation_matrix(k: int, p: int, dim: int) -> np.ndarray:
    """0/1 matrix exchanging tensor slot 1 with slot k (1-based) on dim**p states."""
    if not 1 <= k <= p:
        raise ValueError(f"slot index k={k} outside 1..{p}")
    n = dim**p
    idx = np.arange(n).reshape((dim,) * p)
    axes = list(range(p))
    axes[0], axes[k - 1] = axes[k - 1], axes[0]
    perm = idx.transpose(axes).ravel()
    P = np.zeros((n, n))
    P[np.arange(n), perm] = 1.0
    return P


def build_M(problem: PolynomialProblem) -> np.ndarray:
    """M = sum_k P_k A P_k^T."""
    M = np.zeros_like(problem.A)
    for k in range(1, problem.p + 1):
        P = permutation_matrix(k, problem.p, problem.dim)
        M += P @ problem.A @ P.T
    return 0.5 * (M + M.T)


def contract_tail(M: np.ndarray, left: np.ndarray, right: np.ndarray, p: int, dim: int) -> np.ndarray:
    """Contract tensor slots 2..p of ``M`` with ``left`` on the row side and ``right`` on the column side.

    No conjugation is applied; pass ``left.conj()`` for a bra.
    """
    if p == 1:
        return M.copy()
    rest = dim ** (p - 1)
    L = tensor_power(left, p - 1)
    R = tensor_power(right, p - 1)
    return np.einsum("aibj,i,j->ab", M.reshape(dim, rest, dim, rest), L, R)


@dataclass(frozen=True)
class GradientPair:
    kappa: float
    grad: np.ndarray


def gradient_matrix(problem: PolynomialProblem, x) -> np.ndarray:
    """The variable-dependent operator D-hat of side d+1 at the point x."""
    X = augment(_check_x(problem, x))
    return contract_tail(problem.M, X, X, problem.p, problem.dim)


def classical_gradient(problem: PolynomialProblem, x) -> GradientPair:
    X = augment(_check_x(problem, x))
    DX = contract_tail(problem.M, X, X, problem.p, problem.dim) @ X
    return GradientPair(kappa=float(DX[0]), grad=DX[1:].copy())


def finite_diff_gradient(problem: PolynomialProblem, x, delta: float = 1e-5) -> np.ndarray:
    """Central differences of eval_cost, one coordinate at a time."""
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta}")
    x = _check_x(problem, x)
    g = np.empty_like(x)
    for i in range(x.shape[0]):
        e = np.zeros_like(x)
        e[i] = 0.5 * delta
        g[i] = (eval_cost(problem, x + e) - eval_cost(problem, x - e)) / delta
    return g
