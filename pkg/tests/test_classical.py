import pytest
from hypothesis import given, strategies as st

from mcfqkd.classical import HD_FEC_BER_LIMIT, ClassicalFeasibility, channel_feasible
from mcfqkd.leakage import DataChannel

RULES = ClassicalFeasibility()


def test_defaults():
    assert RULES.launch_window_dbm == (-10.0, -3.0)
    assert RULES.wavelength_window_nm == (1530.0, 1560.0)
    assert RULES.fec_ber_limit == HD_FEC_BER_LIMIT == 3.8e-3


def test_examples():
    assert channel_feasible(DataChannel(1, 1540.0, -4.0), RULES) == (True, "")
    ok, reason = channel_feasible(DataChannel(1, 1540.0, -12.0), RULES)
    assert not ok and "launch power" in reason and "below" in reason
    ok, reason = channel_feasible(DataChannel(1, 1565.0, -4.0), RULES)
    assert not ok and "wavelength" in reason


@pytest.mark.parametrize("launch, wl", [(-10, 1530), (-3, 1560), (-10, 1560), (-3, 1530)])
def test_boundaries_are_feasible(launch, wl):
    assert channel_feasible(DataChannel(2, float(wl), float(launch)), RULES)[0]


@pytest.mark.parametrize("window", [(-3, -3), (-3, -10)])
def test_window_ordering(window):
    with pytest.raises(ValueError):
        ClassicalFeasibility(launch_window_dbm=window)


@given(st.floats(-20, 5), st.floats(1500, 1620))
def test_window_membership(launch, wl):
    inside = -10 <= launch <= -3 and 1530 <= wl <= 1560
    assert channel_feasible(DataChannel(3, wl, launch), RULES)[0] == inside


def test_ber_lookup_hook():
    rules = ClassicalFeasibility(ber_lookup=lambda p, wl: 1e-2 if wl > 1555 else 1e-5)
    assert channel_feasible(DataChannel(1, 1550.0, -4.0), rules)[0]
    ok, reason = channel_feasible(DataChannel(1, 1558.0, -4.0), rules)
    assert not ok and "FEC" in reason
