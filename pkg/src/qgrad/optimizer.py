"""One iteration of the dressed-state gradient update and the loop around it.

Each step maps |X> to a state proportional to

    cos^2(eta)|X> +- sin^2(eta) K D |X>,     xi = tan^2(eta),

either by direct matrix algebra (``exact_matrix``) or by running the full
register-level circuit and post-selecting (``circuit``). ``+`` maximizes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from .encoding import DressedState, decode, encode, from_amplitudes
from .errors import TrapState, ZeroBranch
from .grad_operator import MARGIN, GradientOperator, build_D_exact
from .hhl import PhaseEstimateConfig, apply_gradient_branch, prepare_state, rx
from .poly_core import Direction, PolynomialProblem, classical_gradient, eval_cost
from .statevector import apply_register_unitary, post_select, register_amplitudes
from .truncation import E_matrix, K_matrix

Mode = Literal["exact_matrix", "circuit"]


@dataclass(frozen=True)
class OptimizerConfig:
    xi: float
    max_iters: int = 200
    stop_tol: float = 1e-8
    mode: Mode = "exact_matrix"
    phase_config: PhaseEstimateConfig = field(default_factory=lambda: PhaseEstimateConfig(chi=12))
    direction: Direction = "minimize"
    seed: int = 0
    margin: float = MARGIN
    postselect: Literal["exact", "sampled"] = "exact"

    def __post_init__(self):
        if not self.xi > 0:
            raise ValueError(f"learning rate xi must be positive, got {self.xi}")
        if self.max_iters < 0:
            raise ValueError("max_iters must be >= 0")
        if self.mode not in ("exact_matrix", "circuit"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.direction not in ("maximize", "minimize"):
            raise ValueError(f"unknown direction {self.direction!r}")
        if self.postselect not in ("exact", "sampled"):
            raise ValueError(f"unknown post-selection mode {self.postselect!r}")
        if self.xi_exceeds_bound:
            warnings.warn(f"xi={self.xi} > 1/2: the success-probability lower bound no longer holds", stacklevel=2)

    @property
    def xi_exceeds_bound(self) -> bool:
        return self.xi > 0.5

    @property
    def eta(self) -> float:
        return math.atan(math.sqrt(self.xi))

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "maximize" else -1.0

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class StepResult:
    x_next: np.ndarray
    f_next: float
    grad_norm: float
    p_succ_closed: float
    p_succ_measured: float
    cos_gamma: float
    trapped: bool = False
    attempts: int = 1


@dataclass
class IterationTrace:
    x0: np.ndarray
    f0: float
    grad_norm0: float
    config: dict
    steps: list[StepResult] = field(default_factory=list)
    termination: str = "max_iters"

    @property
    def iterations(self) -> int:
        return len(self.steps)

    @property
    def final_x(self) -> np.ndarray:
        return self.steps[-1].x_next if self.steps else self.x0

    @property
    def final_f(self) -> float:
        return self.steps[-1].f_next if self.steps else self.f0

    @property
    def xs(self) -> np.ndarray:
        return np.array([self.x0] + [s.x_next for s in self.steps])

    @property
    def min_p_succ(self) -> float:
        return min((s.p_succ_measured for s in self.steps), default=1.0)


def success_probability_closed_form(state: DressedState, opD: GradientOperator, eta: float, direction: Direction) -> float:
    """cos^4 + sin^4 |KDX|^2 +- sin^2 cos^2 (<X|KD|X> + <X|DK|X>)."""
    X = state.amps
    K = K_matrix(X.size)
    KDX = K @ opD.D @ X
    c2, s2 = math.cos(eta) ** 2, math.sin(eta) ** 2
    sign = 1.0 if direction == "maximize" else -1.0
    cross = X @ KDX + X @ (opD.D @ (K @ X))
    return c2**2 + s2**2 * float(KDX @ KDX) + sign * s2 * c2 * float(cross)


def success_probability_bound(eta: float) -> float:
    """cos^4 - 2 sin^2 cos^2, valid whenever tan^2(eta) <= 1/2."""
    c2, s2 = math.cos(eta) ** 2, math.sin(eta) ** 2
    return c2**2 - 2 * s2 * c2


def _exact_update(state: DressedState, opD: GradientOperator, eta: float, sign: float) -> tuple[float, np.ndarray]:
    X = state.amps
    KDX = K_matrix(X.size) @ opD.D @ X
    out = math.cos(eta) ** 2 * X + sign * math.sin(eta) ** 2 * KDX
    prob = float(out @ out)
    if prob < 1e-14:
        raise ZeroBranch("updated state has zero norm")
    return prob, out / math.sqrt(prob)


def _circuit_update(
    state: DressedState, opD: GradientOperator, eta: float, sign: float, phase: PhaseEstimateConfig
) -> tuple[float, np.ndarray]:
    psi = prepare_state(state, phase.chi)
    psi = apply_gradient_branch(psi, opD, eta, phase)
    # truncation: k-controlled E on the up=1, d=0 branch between Hadamards on k
    H = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    psi = apply_register_unitary(psi, H, "k", check=False)
    psi = apply_register_unitary(psi, E_matrix(state.amps.size), "v", controls=[("k", 1), ("up", 1), ("d", 0)], check=False)
    psi = apply_register_unitary(psi, H, "k", check=False)
    # R_x(-eta) for ascent, R_x(+eta) for descent
    psi = apply_register_unitary(psi, rx(-sign * eta), "up", check=False)
    pattern = {"k": 0, "up": 0, "d": 0, "e": 0}
    prob, psi = post_select(psi, pattern)
    v = register_amplitudes(psi, pattern, "v")
    # remove the global phase so amplitude 0 is real and positive
    phase0 = v[0] / abs(v[0]) if abs(v[0]) > 0 else 1.0
    return prob, (v / phase0).real


def iterate_once(
    state: DressedState,
    problem: PolynomialProblem,
    config: OptimizerConfig,
    noise=None,
    rng: np.random.Generator | None = None,
    d_pattern: np.ndarray | None = None,
) -> StepResult:
    from .noise import perturb_D

    opD = build_D_exact(problem, state, config.margin)
    if noise is not None and noise.d_strength > 0:
        if rng is None:
            rng = np.random.default_rng(config.seed)
        opD = perturb_D(opD, noise.d_strength, rng, pattern=d_pattern)
    eta = config.eta
    p_closed = success_probability_closed_form(state, opD, eta, config.direction)
    if config.mode == "exact_matrix":
        p_meas, amps = _exact_update(state, opD, eta, config.sign)
    else:
        p_meas, amps = _circuit_update(state, opD, eta, config.sign, config.phase_config)
    attempts = 1
    if config.postselect == "sampled":
        if rng is None:
            rng = np.random.default_rng(config.seed)
        attempts = int(rng.geometric(min(1.0, p_meas)))
    new_state = from_amplitudes(_clean_padding(amps, problem.d), problem.d)
    x_next = decode(new_state)
    return StepResult(
        x_next=x_next,
        f_next=eval_cost(problem, x_next),
        grad_norm=float(np.linalg.norm(classical_gradient(problem, x_next).grad)),
        p_succ_closed=p_closed,
        p_succ_measured=p_meas,
        cos_gamma=new_state.cos_gamma,
        attempts=attempts,
    )


def _clean_padding(amps: np.ndarray, d: int) -> np.ndarray:
    out = np.array(amps, dtype=float)
    out[d + 1 :] = 0.0
    return out


def run(
    problem: PolynomialProblem,
    x0,
    config: OptimizerConfig,
    noise=None,
    rng: np.random.Generator | None = None,
) -> IterationTrace:
    """Iterate from x0 until the step falls below stop_tol, max_iters, or an abnormal end."""
    x = np.asarray(x0, dtype=float).ravel().copy()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    d_pattern = None
    if noise is not None and noise.d_strength > 0 and not noise.resample_d:
        from .noise import random_symmetric_pattern

        d_pattern = random_symmetric_pattern(problem.dim, rng)
    trace = IterationTrace(
        x0=x.copy(),
        f0=eval_cost(problem, x),
        grad_norm0=float(np.linalg.norm(classical_gradient(problem, x).grad)),
        config=config.to_dict(),
    )
    for _ in range(config.max_iters):
        try:
            step = iterate_once(encode(x), problem, config, noise, rng, d_pattern)
        except TrapState:
            trace.termination = "trapped"
            return trace
        except ZeroBranch:
            trace.termination = "zero_branch"
            return trace
        trace.steps.append(step)
        moved = float(np.linalg.norm(step.x_next - x))
        x = step.x_next
        if moved < config.stop_tol:
            trace.termination = "converged"
            return trace
    trace.termination = "max_iters"
    return trace
