import numpy as np
import pytest

from qgrad.poly_core import make_problem


def random_problem(rng, d=None, p=2, direction="minimize"):
    d = d or int(rng.integers(1, 4))
    side = (d + 1) ** p
    return make_problem(rng.normal(size=(side, side)), p, direction)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def exact_operator(rng, n, chi, logical=None):
    """Random symmetric operator whose eigenvalues are multiples of 2**-chi inside the window."""
    from qgrad.grad_operator import GradientOperator

    N = 2**chi
    top = int(np.floor((0.5 - 1 / 32) * N))
    w = rng.integers(-top, top + 1, size=n) / N
    Q, _ = np.linalg.qr(rng.normal(size=(n, n)))
    D = (Q * w) @ Q.T
    return GradientOperator(D=0.5 * (D + D.T), spectral_radius=float(np.abs(w).max()), prescale=1.0, logical_dim=logical)
