import math

import numpy as np
import pytest

from scaffoldsim import OdeState, ParameterSet, StimulusSignal


def test_defaults_are_benchmark_values():
    p = ParameterSet()
    assert p.beta == 0.5 / 3
    assert p.s1 == 30.0 and p.s2 == 12.0
    assert p.C1_star == 3.024e-3 and p.C2_star == 3.024e-3
    assert p.a_chi == 3.18
    assert p.lambda10 == 9e-4 and p.lambda2 == 1.44e-4
    assert p.k_minus is None and p.lambda11 is None


def test_S_d_is_recomputed_not_stored():
    p = ParameterSet()
    assert p.S_d == (p.S_max - p.S_min) / 10.0 == 0.2
    p2 = ParameterSet(S_min=0.5, S_max=4.5)
    assert p2.S_d == 0.4


@pytest.mark.parametrize("kw", [
    {"S_min": 3.0},                 # S_min >= S_max
    {"S_min": 5.0, "S_max": 4.0},
    {"alpha1_min": 0.05},           # not < alpha1_max
    {"C1_star": 0.0},
    {"s1": -1.0},
    {"chi_c": 0.0},
    {"beta": -0.1},
    {"lambda11": 0.0},
])
def test_invalid_parameters_rejected(kw):
    with pytest.raises(ValueError):
        ParameterSet(**kw)


def test_zero_growth_rate_is_allowed():
    # beta = 0 is a documented mode for the conversion-conservation checks
    assert ParameterSet(beta=0.0).beta == 0.0


def test_state_array_round_trip():
    s = OdeState(0.001, 0.0, 0.001, 1000.0, 0.0)
    arr = s.to_array()
    assert arr.shape == (5,)
    assert OdeState.from_array(arr) == s


def test_stimulus_signal():
    sig = StimulusSignal()
    assert sig(0.0) == 1.5
    assert sig(10.0 * math.pi) == pytest.approx(-0.5, abs=1e-12)
    const = StimulusSignal.constant(2.0)
    assert const(0.0) == const(123.4) == 2.0
    with pytest.raises(ValueError):
        StimulusSignal(period=0.0)
