"""Perturbation studies: initial point, gradient operator, and e-register size."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .grad_operator import GradientOperator, make_operator
from .hhl import PhaseEstimateConfig
from .optimizer import IterationTrace, OptimizerConfig, run
from .poly_core import PolynomialProblem, max_norm


@dataclass(frozen=True)
class NoiseConfig:
    init_amplitude: float = 0.0
    d_strength: float = 0.0
    trials: int = 1
    register_sizes: tuple[int, ...] = ()
    seed: int = 0
    resample_d: bool = True  # False reuses one perturbation pattern for a whole run

    def __post_init__(self):
        if self.init_amplitude < 0 or self.d_strength < 0:
            raise ValueError("perturbation bounds must be >= 0")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")


def perturb_initial(x0, amplitude: float, rng: np.random.Generator) -> np.ndarray:
    """Multiply each coordinate by 1 + u with u ~ U[-amplitude, amplitude]."""
    if amplitude < 0:
        raise ValueError("amplitude must be >= 0")
    x0 = np.asarray(x0, dtype=float)
    return x0 * (1.0 + rng.uniform(-amplitude, amplitude, size=x0.shape))


def random_symmetric_pattern(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Symmetric matrix with entries in [-1, 1]."""
    R = rng.uniform(-1.0, 1.0, size=(dim, dim))
    return 0.5 * (R + R.T)


def perturb_D(
    opD: GradientOperator, strength: float, rng: np.random.Generator, pattern: np.ndarray | None = None
) -> GradientOperator:
    """Add symmetric noise bounded elementwise by strength * ||D||_max.

    Only the logical block is perturbed; padding rows and columns stay zero.
    The result is shrunk back into the spectral window if the noise pushed
    it out.
    """
    if strength < 0:
        raise ValueError("strength must be >= 0")
    if strength == 0:
        return opD
    D = opD.D
    logical = opD.logical_dim or D.shape[0]
    if pattern is None:
        pattern = random_symmetric_pattern(logical, rng)
    else:
        pattern = pattern[:logical, :logical]
    noisy = D.copy()
    noisy[:logical, :logical] += strength * max_norm(D) * pattern
    return make_operator(noisy, opD.margin, prescale=opD.prescale, logical_dim=opD.logical_dim)


def trial_rngs(seed: int, n: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(n)]


def run_trials(
    problem: PolynomialProblem,
    x0,
    config: OptimizerConfig,
    noise: NoiseConfig,
    workers: int = 1,
) -> list[tuple[np.ndarray, IterationTrace]]:
    """Independent perturbed runs; returns (start point, trace) per trial in trial order."""
    rngs = trial_rngs(noise.seed, noise.trials)
    d_noise = noise if noise.d_strength > 0 else None

    def one(rng):
        start = perturb_initial(x0, noise.init_amplitude, rng)
        return start, run(problem, start, config, d_noise, rng)

    if workers <= 1:
        return [one(r) for r in rngs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, rngs))


def sweep_register_sizes(
    problem: PolynomialProblem,
    x0,
    base_config: OptimizerConfig,
    sizes,
    workers: int = 1,
) -> dict[int, IterationTrace]:
    """One circuit-mode run per e-register width."""
    sizes = list(sizes)
    if not sizes:
        raise ValueError("need at least one register size")

    def one(n_e):
        cfg = replace(base_config, mode="circuit", phase_config=PhaseEstimateConfig(chi=n_e))
        return run(problem, x0, cfg)

    if workers <= 1:
        traces = [one(n) for n in sizes]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(one, sizes))
    return dict(zip(sizes, traces))
