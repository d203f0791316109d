import math
import warnings

import numpy as np
import pytest

from qgrad.encoding import encode
from qgrad.grad_operator import build_D_exact
from qgrad.optimizer import (
    OptimizerConfig,
    iterate_once,
    run,
    success_probability_bound,
    success_probability_closed_form,
)
from qgrad.poly_core import eval_cost
from qgrad.presets import preset_problem
from qgrad.truncation import K_matrix

from conftest import random_problem


def test_eta_from_xi():
    cfg = OptimizerConfig(xi=1 / 3)
    assert math.tan(cfg.eta) ** 2 == pytest.approx(1 / 3)
    assert success_probability_bound(cfg.eta) == pytest.approx(3 / 16)


def test_config_validation():
    with pytest.raises(ValueError):
        OptimizerConfig(xi=0.0)
    with pytest.raises(ValueError):
        OptimizerConfig(xi=0.1, mode="fast")
    with pytest.raises(ValueError):
        OptimizerConfig(xi=0.1, direction="up")
    with pytest.warns(UserWarning, match="lower bound"):
        OptimizerConfig(xi=0.8)


def test_exact_step_formula(rng):
    prob = random_problem(rng, d=2)
    x = rng.normal(size=2)
    cfg = OptimizerConfig(xi=0.2)
    s = encode(x)
    op = build_D_exact(prob, s)
    new = math.cos(cfg.eta) ** 2 * s.amps - math.sin(cfg.eta) ** 2 * K_matrix(4) @ op.D @ s.amps
    step = iterate_once(s, prob, cfg)
    assert np.allclose(step.x_next, new[1:3] / new[0])
    # the closed-form probability is the squared norm of the unnormalized update
    assert step.p_succ_closed == pytest.approx(float(new @ new), abs=1e-12)
    assert step.p_succ_measured == pytest.approx(step.p_succ_closed, abs=1e-12)


def test_closed_form_respects_bound(rng):
    eta = OptimizerConfig(xi=0.5).eta
    for _ in range(200):
        prob = random_problem(rng)
        s = encode(rng.normal(scale=3, size=prob.d))
        op = build_D_exact(prob, s)
        for direction in ("minimize", "maximize"):
            assert success_probability_closed_form(s, op, eta, direction) >= success_probability_bound(eta) - 1e-12


def test_zero_iterations():
    tr = run(preset_problem("f2"), [5.0, 5.0], OptimizerConfig(xi=0.1, max_iters=0))
    assert tr.iterations == 0
    assert tr.termination == "max_iters"
    assert np.array_equal(tr.final_x, [5.0, 5.0])
    assert tr.xs.shape == (1, 2)


def test_descent_monotone_first_steps():
    prob = preset_problem("f2")
    tr = run(prob, [5.0, 5.0], OptimizerConfig(xi=0.05, max_iters=10))
    f = [tr.f0] + [s.f_next for s in tr.steps]
    assert all(b < a for a, b in zip(f, f[1:]))


def test_ascent_monotone_first_steps():
    prob = preset_problem("f2", "maximize")
    tr = run(prob, [1.0, 1.0], OptimizerConfig(xi=0.05, max_iters=10, direction="maximize"))
    f = [tr.f0] + [s.f_next for s in tr.steps]
    assert all(b > a for a, b in zip(f, f[1:]))


def test_f1_descent_reaches_root():
    tr = run(preset_problem("f1"), [4.0], OptimizerConfig(xi=0.05, max_iters=1500))
    assert tr.termination == "converged"
    assert tr.final_x[0] == pytest.approx(math.sqrt(7) / 3, abs=1e-6)


def test_f1_ascent_runs_away_and_traps():
    cfg = OptimizerConfig(xi=0.05, max_iters=2000, direction="maximize")
    tr = run(preset_problem("f1", "maximize"), [4.0], cfg)
    assert tr.termination == "trapped"
    assert tr.final_x[0] > 1e6


def test_determinism_and_sampled_attempts():
    prob = preset_problem("f2")
    cfg = OptimizerConfig(xi=0.1, max_iters=30, postselect="sampled", seed=3)
    a, b = run(prob, [5.0, -5.0], cfg), run(prob, [5.0, -5.0], cfg)
    assert np.array_equal(a.xs, b.xs)
    assert [s.attempts for s in a.steps] == [s.attempts for s in b.steps]
    assert all(s.attempts >= 1 for s in a.steps)


def test_circuit_mode_tracks_exact_mode():
    prob = preset_problem("f2")
    kw = dict(xi=0.1, max_iters=5)
    ex = run(prob, [2.0, 1.0], OptimizerConfig(**kw))
    ci = run(prob, [2.0, 1.0], OptimizerConfig(mode="circuit", **kw))
    assert np.abs(ex.xs - ci.xs).max() < 5 * 2.0**-11
    assert eval_cost(prob, ci.final_x) < eval_cost(prob, [2.0, 1.0])
