"""Gradient-based optimization of real polynomials with dressed amplitude encoding."""

from .encoding import DressedState, decode, encode
from .errors import TrapState, ZeroBranch
from .grad_operator import GradientOperator, build_D_exact
from .hhl import PhaseEstimateConfig
from .noise import NoiseConfig
from .optimizer import IterationTrace, OptimizerConfig, iterate_once, run
from .poly_core import PolynomialProblem, classical_gradient, eval_cost, make_problem
from .presets import preset_problem

__all__ = [
    "DressedState",
    "GradientOperator",
    "IterationTrace",
    "NoiseConfig",
    "OptimizerConfig",
    "PhaseEstimateConfig",
    "PolynomialProblem",
    "TrapState",
    "ZeroBranch",
    "build_D_exact",
    "classical_gradient",
    "decode",
    "encode",
    "eval_cost",
    "iterate_once",
    "make_problem",
    "preset_problem",
    "run",
]
