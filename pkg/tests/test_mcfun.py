import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from monocurv.errors import InvalidInput
from monocurv.mcfun import (
    KUBO_MORI,
    LARGEST,
    SMALLEST,
    divided_diff_1,
    divided_diff_2,
    make_builtin,
    make_custom,
    verify_identities,
)

ALL_KINDS = [SMALLEST, LARGEST, KUBO_MORI]

positive = st.floats(min_value=1e-3, max_value=1e3,
                     allow_nan=False, allow_infinity=False)


# Values below were frozen from 40-digit evaluations of the defining
# formulas c(x,y) = 2/(x+y), (x+y)/(2xy), (ln x - ln y)/(x - y) and their
# derivatives.
FROZEN = {
    SMALLEST: {
        "c": 0.666666666666666667,
        "c10": -0.222222222222222222,
        "c20": 0.148148148148148148,
        "lnc10": -0.333333333333333333,
    },
    LARGEST: {
        "c": 0.75,
        "c10": -0.125,
        "c20": 0.125,
        "lnc10": -0.166666666666666667,
    },
    KUBO_MORI: {
        "c": 0.693147180559945309,
        "c10": -0.193147180559945309,
        "c20": 0.136294361119890619,
        "lnc10": -0.278652479555518296,
    },
}

FROZEN_DD1 = {  # (c(0.7, 1.3) - c(2.1, 1.3)) / (0.7 - 2.1)
    SMALLEST: -0.294117647058823529,
    LARGEST: -0.340136054421768707,
    KUBO_MORI: -0.3087611883450104,
}


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_point_values_match_frozen_oracle(kind):
    c = make_builtin(kind)
    want = FROZEN[kind]
    assert c.c(2.0, 1.0) == pytest.approx(want["c"], rel=1e-14)
    assert c.c10(2.0, 1.0) == pytest.approx(want["c10"], rel=1e-14)
    assert c.c20(2.0, 1.0) == pytest.approx(want["c20"], rel=1e-14)
    assert c.lnc10(2.0, 1.0) == pytest.approx(want["lnc10"], rel=1e-14)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_divided_diff_1_matches_frozen_oracle(kind):
    c = make_builtin(kind)
    got = divided_diff_1(c, 0.7, 2.1, 1.3)
    assert got == pytest.approx(FROZEN_DD1[kind], rel=1e-14)


def _log_grid_pairs():
    axis = np.logspace(-3, 3, 13)
    return [(x, y) for x in axis for y in axis]


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_identity_report_clean_on_log_grid(kind):
    report = verify_identities(make_builtin(kind), _log_grid_pairs())
    assert report.ok and report.max_residual < 1e-12, report.residuals


@pytest.mark.parametrize("kind", ALL_KINDS)
@given(x=positive, y=positive)
@settings(max_examples=60, deadline=None)
def test_symmetry_and_diagonal(kind, x, y):
    c = make_builtin(kind)
    assert c.c(x, y) == pytest.approx(c.c(y, x), rel=1e-12)
    assert c.c(x, x) == pytest.approx(1.0 / x, rel=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
@given(x=positive, y=positive, s=st.floats(min_value=1e-2, max_value=1e2))
@settings(max_examples=60, deadline=None)
def test_homogeneity_degree_minus_one(kind, x, y, s):
    c = make_builtin(kind)
    assert c.c(s * x, s * y) == pytest.approx(c.c(x, y) / s, rel=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
@given(x=positive, y=positive)
@settings(max_examples=60, deadline=None)
def test_euler_identity_for_derivative(kind, x, y):
    c = make_builtin(kind)
    lhs = c.c(x, y) + x * c.c10(x, y) + y * c.c10(y, x)
    assert abs(lhs) < 1e-12 * abs(c.c(x, y))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_divided_diff_1_continuous_at_coincidence(kind):
    c = make_builtin(kind)
    y = 1.3
    at = divided_diff_1(c, 2.0, 2.0, y)
    for gap in (1e-5, 1e-7, 1e-9):
        near = divided_diff_1(c, 2.0 * (1 + gap), 2.0, y)
        assert near == pytest.approx(at, rel=1e-4)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_divided_diff_2_collapses_to_half_second_derivative(kind):
    c = make_builtin(kind)
    at = divided_diff_2(c, 2.0, 2.0, 2.0, 1.3)
    assert at == pytest.approx(0.5 * c.c20(2.0, 1.3), rel=1e-12)
    near = divided_diff_2(c, 2.0 + 1e-7, 2.0, 2.0 - 1e-7, 1.3)
    assert near == pytest.approx(at, rel=1e-4)


def test_custom_function_roundtrip():
    # A custom instance wired to the Bures formulas behaves identically.
    ref = make_builtin(SMALLEST)
    c = make_custom(
        c=lambda x, y: 2.0 / (x + y),
        c10=lambda x, y: -2.0 / (x + y) ** 2,
        c20=lambda x, y: 4.0 / (x + y) ** 3,
    )
    for x, y in ((0.5, 2.0), (3.0, 3.0), (1e-2, 1e2)):
        assert c.c(x, y) == pytest.approx(ref.c(x, y), rel=1e-12)
        assert c.lnc10(x, y) == pytest.approx(ref.lnc10(x, y), rel=1e-12)
    assert verify_identities(c, _log_grid_pairs()).max_residual < 1e-12


def test_unknown_kind_rejected():
    with pytest.raises(InvalidInput):
        make_builtin("no-such-metric")
