"""Saturating two's-complement kernel checks.

Expected values are hand-computed from the arithmetic definitions
(clamp into [-2^(b-1), 2^(b-1)-1], decay(v,k) = v - floor(v / 2^k))
before the implementation was written, and frozen here.
"""

import pytest
from hypothesis import given, strategies as st

from snnforge.fxp import FxpFormat, FxpValue, decay, requantize, sat_add, sat_sub, saturate


F4 = FxpFormat(4)
F6 = FxpFormat(6)
F8 = FxpFormat(8)


def test_format_ranges():
    assert (F4.min_raw, F4.max_raw) == (-8, 7)
    assert (F8.min_raw, F8.max_raw) == (-128, 127)
    # width 1 encodes {-1, 0}
    f1 = FxpFormat(1)
    assert (f1.min_raw, f1.max_raw) == (-1, 0)
    assert FxpFormat(32).max_raw == 2**31 - 1


def test_format_width_bounds():
    with pytest.raises(ValueError):
        FxpFormat(0)
    with pytest.raises(ValueError):
        FxpFormat(33)


def test_value_range_enforced():
    FxpValue(7, F4)
    FxpValue(-8, F4)
    with pytest.raises(ValueError):
        FxpValue(8, F4)
    with pytest.raises(ValueError):
        FxpValue(-9, F4)


def test_saturate_clamps():
    assert saturate(100, F4).raw == 7
    assert saturate(-100, F4).raw == -8
    assert saturate(3, F4).raw == 3


def test_sat_add_examples():
    # 4-bit: 5 + 6 clamps to the positive rail
    assert sat_add(FxpValue(5, F4), FxpValue(6, F4)).raw == 7
    assert sat_add(FxpValue(-8, F4), FxpValue(-3, F4)).raw == -8
    assert sat_add(FxpValue(3, F8), FxpValue(4, F8)).raw == 7


def test_sat_sub_examples():
    assert sat_sub(FxpValue(17, F8), FxpValue(5, F8)).raw == 12
    assert sat_sub(FxpValue(7, F4), FxpValue(-7, F4)).raw == 7
    assert sat_sub(FxpValue(-8, F4), FxpValue(1, F4)).raw == -8


def test_format_mismatch_rejected():
    with pytest.raises(ValueError):
        sat_add(FxpValue(1, F4), FxpValue(1, F8))
    with pytest.raises(ValueError):
        sat_sub(FxpValue(1, F4), FxpValue(1, F8))


def test_decay_examples():
    # 100 - floor(100/8) = 100 - 12 = 88
    assert decay(FxpValue(100, F8), 3).raw == 88
    # floor shift on negatives: -1 >> k == -1, so -1 decays straight to 0
    assert decay(FxpValue(-1, F8), 3).raw == 0
    # -8 - floor(-8/2) = -8 + 4 = -4
    assert decay(FxpValue(-8, F8), 1).raw == -4
    assert decay(FxpValue(0, F8), 5).raw == 0


def test_decay_shift_validation():
    with pytest.raises(ValueError):
        decay(FxpValue(10, F8), 0)
    with pytest.raises(ValueError):
        decay(FxpValue(10, F8), -1)


def test_requantize_examples():
    assert requantize(FxpValue(100, F8), F4).raw == 7
    assert requantize(FxpValue(-3, F8), F4).raw == -3
    assert requantize(FxpValue(-100, F8), F4).raw == -8
    # widening is exact
    assert requantize(FxpValue(-8, F4), F8).raw == -8


def _wide_clamp(x: int, bits: int) -> int:
    lo, hi = -(1 << (bits - 1)), (1 << (bits - 1)) - 1
    return min(max(x, lo), hi)


def test_exhaustive_8bit_against_wide_oracle():
    """Every 8-bit operand pair matches plain big-int clamp arithmetic."""
    for a in range(-128, 128):
        va = FxpValue(a, F8)
        for b in range(-128, 128):
            vb = FxpValue(b, F8)
            assert sat_add(va, vb).raw == _wide_clamp(a + b, 8)
            assert sat_sub(va, vb).raw == _wide_clamp(a - b, 8)
        for k in (1, 2, 3, 7):
            assert decay(va, k).raw == a - (a >> k)


fmts = st.integers(min_value=1, max_value=32).map(FxpFormat)


@given(st.data())
def test_closure_and_identities(data):
    fmt = data.draw(fmts)
    a = data.draw(st.integers(fmt.min_raw, fmt.max_raw))
    b = data.draw(st.integers(fmt.min_raw, fmt.max_raw))
    va, vb = FxpValue(a, fmt), FxpValue(b, fmt)
    s = sat_add(va, vb)
    d = sat_sub(va, vb)
    for r in (s, d):
        assert fmt.min_raw <= r.raw <= fmt.max_raw
    assert sat_add(va, vb).raw == sat_add(vb, va).raw
    zero = FxpValue(0, fmt)
    assert sat_add(va, zero).raw == a
    assert sat_sub(va, va).raw == 0


@given(st.data())
def test_decay_properties(data):
    fmt = data.draw(fmts)
    v = data.draw(st.integers(fmt.min_raw, fmt.max_raw))
    k = data.draw(st.integers(1, 31))
    r = decay(FxpValue(v, fmt), k).raw
    # never grows, never crosses zero
    assert abs(r) <= abs(v)
    if v > 0:
        assert r >= 1
    elif v < 0:
        assert r <= 0


@given(st.integers(1, 127), st.integers(1, 6))
def test_positive_decay_fixed_point(v, k):
    """Repeated decay of v > 0 lands on min(v, 2^k - 1) and stays there."""
    target = min(v, 2**k - 1)
    x = FxpValue(v, F8)
    for _ in range(8 * 2**k):
        nxt = decay(x, k)
        if nxt.raw == x.raw:
            break
        x = nxt
    assert x.raw == target
    assert decay(x, k).raw == target


@given(st.integers(-128, -1), st.integers(1, 6))
def test_negative_decay_reaches_zero(v, k):
    x = FxpValue(v, F8)
    for _ in range(8 * 2**k):
        x = decay(x, k)
        if x.raw == 0:
            break
    assert x.raw == 0
