"""The two benchmark polynomials and their run settings."""

from __future__ import annotations

import numpy as np

from .poly_core import PolynomialProblem, make_problem

F1_FACTOR = np.diag([3.5, -4.5])

F2_IDENTITY = np.eye(3)
F2_LEFT = np.array([[0.0, 0.0, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
F2_RIGHT = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 1.0], [0.0, 1.0, 0.0]])


def f1_matrix() -> np.ndarray:
    """diag(7/2, -9/2) (x) diag(7/2, -9/2): f1 = (7/2 - 9/2 x^2)^2 / 2."""
    return np.kron(F1_FACTOR, F1_FACTOR)


def f2_matrix() -> np.ndarray:
    """I (x) I + C (x) Q: f2 = [(1 + x1^2 + x2^2)^2 + 4 x1 x2^2] / 2."""
    return np.kron(F2_IDENTITY, F2_IDENTITY) + np.kron(F2_LEFT, F2_RIGHT)


# Ascent on f1 from x = 4 or 14 runs off to infinity, because f1 grows like x^4.
# The finite limits with e-register-dependent positions come from descent
# onto the zero of 7/2 - 9/2 x^2, where the whole operator D vanishes.
# Descent is therefore the default here; pass direction="maximize" for plain ascent.
PRESETS = {
    "f1": {
        "matrix": f1_matrix,
        "p": 2,
        "direction": "minimize",
        "starts": [[4.0], [14.0]],
        "alt_starts": [[4.0], [10.0]],
        "xi": 0.05,
        "max_iters": 1500,
        "d_strength": 0.01,
        "register_sizes": [5, 7, 9, 11, 12],
    },
    "f2": {
        "matrix": f2_matrix,
        "p": 2,
        "direction": "minimize",
        "starts": [[5.0, 5.0], [-5.0, 5.0], [5.0, -5.0], [-5.0, -5.0]],
        "alt_starts": None,
        "xi": 0.1,
        "max_iters": 600,
        "d_strength": 0.02,
        "register_sizes": [5, 7, 9, 11, 12],
    },
}


def preset_problem(name: str, direction: str | None = None) -> PolynomialProblem:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return make_problem(spec["matrix"](), spec["p"], direction or spec["direction"])
