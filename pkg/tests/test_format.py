from hypothesis import given, strategies as st

from frontmap._format import fmt_float


def test_half_even_and_places():
    assert fmt_float(0.0000005) == "0.000000"
    assert fmt_float(0.0000015) == "0.000002"
    assert fmt_float(2.5, 0) == "2"
    assert fmt_float(1 / 3) == "0.333333"
    assert fmt_float(3) == "3.000000"


def test_no_negative_zero():
    assert fmt_float(-0.0) == "0.000000"
    assert fmt_float(-1e-9) == "0.000000"


@given(st.floats(-1e6, 1e6, allow_nan=False))
def test_parses_back_within_half_unit(x):
    text = fmt_float(x)
    assert "," not in text and len(text.split(".")[1]) == 6
    assert abs(float(text) - x) <= 5e-7 + 1e-9
