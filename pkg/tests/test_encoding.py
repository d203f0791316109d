import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qgrad.encoding import (
    decode,
    encode,
    estimate_cos_gamma,
    from_amplitudes,
    n_qubits_for,
    padded_dim,
)
from qgrad.errors import TrapState

coords = st.lists(st.floats(-1e3, 1e3, allow_nan=False), min_size=1, max_size=7)


@settings(max_examples=100, deadline=None)
@given(coords)
def test_roundtrip_and_norm(x):
    s = encode(x)
    assert np.linalg.norm(s.amps) == pytest.approx(1.0)
    assert s.cos_gamma == pytest.approx(1 / np.sqrt(1 + np.dot(x, x)))
    assert np.allclose(decode(s), x, rtol=1e-9, atol=1e-9)
    assert np.all(s.amps[len(x) + 1 :] == 0)


def test_register_sizes():
    assert [n_qubits_for(d) for d in (1, 2, 3, 4, 7, 8)] == [1, 2, 2, 3, 3, 4]
    assert padded_dim(2) == 4


def test_origin_has_unit_amplitude():
    s = encode([0.0, 0.0])
    assert s.cos_gamma == 1.0
    assert np.array_equal(s.amps, [1.0, 0, 0, 0])


def test_invalid_points():
    with pytest.raises(ValueError):
        encode([])
    with pytest.raises(ValueError):
        encode([np.inf])


def test_from_amplitudes_fixes_sign_and_checks_padding():
    s = from_amplitudes([-2.0, -2.0, 0.0, 0.0], 2)
    assert s.amps[0] > 0
    assert np.allclose(decode(s), [1.0, 0.0])
    with pytest.raises(ValueError, match="padding"):
        from_amplitudes([1.0, 0.0, 0.0, 0.5], 2)
    with pytest.raises(ValueError):
        from_amplitudes([1.0, 0.0], 2)


def test_trap_state_on_decode():
    s = from_amplitudes([0.0, 1.0], 1)
    with pytest.raises(TrapState):
        decode(s)


def test_cos_gamma_estimate_converges():
    s = encode([2.0, -1.0])
    rng = np.random.default_rng(7)
    errs = [abs(estimate_cos_gamma(s, n, rng) - s.cos_gamma) for n in (10**6,)]
    assert errs[0] < 5e-3
    with pytest.raises(ValueError):
        estimate_cos_gamma(s, 0, rng)
