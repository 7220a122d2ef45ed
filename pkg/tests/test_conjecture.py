import dataclasses

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from monocurv.conjecture import (
    MixingStep,
    RegionSampler,
    SymmetrizedKernel,
    concavity_scan,
    directional_derivative_check,
    hessian_minors,
    kubo_mori_hs_closed_form,
    lemma4_check,
    majorizes,
    monotonicity_scan,
    t_transform,
)
from monocurv.errors import (
    InvalidInput,
    LengthMismatch,
    OrderViolation,
    SumMismatch,
)
from monocurv.mcfun import KUBO_MORI, make_builtin
from monocurv.scalar import HKernel

positive = st.floats(min_value=1e-2, max_value=1e2,
                     allow_nan=False, allow_infinity=False)


def _sym():
    return SymmetrizedKernel(HKernel(make_builtin(KUBO_MORI)))


# -- majorization -----------------------------------------------------------

def test_majorizes_truth_table():
    # majorizes(first, second) is True iff first is MORE mixed.
    a = np.array([0.5, 0.3, 0.2])
    b = np.array([0.4, 0.35, 0.25])
    assert majorizes(a, a)
    assert majorizes(b, a)
    assert not majorizes(a, b)
    assert majorizes(np.array([0.5, 0.5]), np.array([0.9, 0.1]))


def test_majorizes_input_validation():
    with pytest.raises(LengthMismatch):
        majorizes(np.array([0.5, 0.5]), np.array([1.0 / 3] * 3))
    with pytest.raises(SumMismatch):
        majorizes(np.array([0.5, 0.4]), np.array([0.5, 0.5]))
    with pytest.raises(InvalidInput):
        majorizes(np.array([1.5, -0.5]), np.array([0.5, 0.5]))


@given(st.lists(positive, min_size=2, max_size=6),
       st.integers(min_value=0, max_value=10_000),
       st.floats(min_value=0.0, max_value=0.5))
@settings(max_examples=60, deadline=None)
def test_t_transform_is_mixing(vals, seed, t):
    lam = np.asarray(vals) / np.sum(vals)
    rng = np.random.default_rng(seed)
    i, j = rng.choice(lam.size, 2, replace=False)
    out = t_transform(lam, MixingStep(int(i), int(j), t))
    assert out.sum() == pytest.approx(1.0)
    assert majorizes(out, lam)  # mixing makes the spectrum more mixed


def test_mixing_step_canonicalizes():
    s = MixingStep(0, 1, 0.8)
    assert s.t == pytest.approx(0.2)
    with pytest.raises(InvalidInput):
        MixingStep(1, 1, 0.3)
    with pytest.raises(InvalidInput):
        MixingStep(0, 1, 1.5)


# -- symmetrized kernel -----------------------------------------------------

@given(x=positive, y=positive, z=positive)
@settings(max_examples=50, deadline=None)
def test_h_s_fully_symmetric(x, y, z):
    sym = _sym()
    ref = sym.h_s(x, y, z)
    for perm in ((x, z, y), (y, x, z), (z, y, x)):
        assert sym.h_s(*perm) == pytest.approx(ref, rel=1e-10, abs=1e-14)


@given(x=positive, y=positive, z=positive,
       s=st.floats(min_value=1e-1, max_value=1e1))
@settings(max_examples=50, deadline=None)
def test_h_s_homogeneous_degree_minus_one(x, y, z, s):
    sym = _sym()
    assert sym.h_s(s * x, s * y, s * z) == pytest.approx(
        sym.h_s(x, y, z) / s, rel=1e-10, abs=1e-14)


@given(x=positive, y=positive, z=positive)
@settings(max_examples=50, deadline=None)
def test_h_s_matches_closed_form(x, y, z):
    # The literal closed form is only valid at pairwise-separated points.
    assume(min(abs(x - y), abs(x - z), abs(y - z)) > 1e-3 * max(x, y, z))
    sym = _sym()
    assert sym.h_s(x, y, z) == pytest.approx(
        kubo_mori_hs_closed_form(x, y, z), rel=1e-9, abs=1e-12)


def test_h_s_dx_matches_closed_form_derivative():
    sym = _sym()
    x, y, z = 0.7, 1.3, 2.1
    h = 1e-6
    fd = (kubo_mori_hs_closed_form(x + h, y, z)
          - kubo_mori_hs_closed_form(x - h, y, z)) / (2 * h)
    assert sym.h_s_dx(x, y, z) == pytest.approx(fd, rel=1e-5)


# -- conjecture evidence primitives ----------------------------------------

def test_lemma4_values_nonnegative_on_samples():
    rng = np.random.default_rng(3)
    for _ in range(25):
        x, y = np.sort(10.0 ** rng.uniform(-1, 1, 2))
        if x == y:
            continue
        lam, mu = 10.0 ** rng.uniform(-1, 1, 2)
        vals = lemma4_check(x, y, lam, mu)
        assert min(vals) > -1e-8, (x, y, lam, mu, vals)


def test_lemma4_requires_order():
    with pytest.raises(OrderViolation):
        lemma4_check(2.0, 1.0, 0.5, 0.5)


def test_hessian_minors_sign_pattern_at_samples():
    for x, y in ((0.4, 0.9), (2.0, 5.0), (0.05, 0.2), (1.0, 1.5)):
        m1, m2, m3 = hessian_minors(x, y, 1.0)
        slack = 1e-7 * max(1.0, abs(m1), abs(m2), abs(m3))
        assert m1 <= slack
        assert m2 >= -slack
        assert m3 <= slack


def test_directional_derivative_expansion_matches_fd():
    lam = np.array([0.1, 0.15, 0.25])
    expansion, fd = directional_derivative_check(0.2, 0.3, lam)
    assert expansion == pytest.approx(fd, rel=1e-5)


def test_directional_derivative_requires_order():
    with pytest.raises(OrderViolation):
        directional_derivative_check(0.3, 0.2, np.array([0.5]))


# -- scans -------------------------------------------------------------------

def test_region_sampler_bounds_and_determinism():
    sampler = RegionSampler(seed=5)
    p1, p2, t = sampler.draw(500)
    q1, q2, u = sampler.draw(500)
    assert np.array_equal(p1, q1) and np.array_equal(p2, q2)
    assert np.array_equal(t, u)
    for p in (p1, p2):
        assert p.min() >= sampler.lo * (1 - 2e-5)
        assert p.max() <= sampler.hi * (1 + 2e-5)


def test_concavity_scan_deterministic_and_clean():
    rep1 = concavity_scan(RegionSampler(seed=11), trials=20_000)
    rep2 = concavity_scan(RegionSampler(seed=11), trials=20_000)
    assert dataclasses.asdict(rep1) == dataclasses.asdict(rep2)
    assert rep1.max_violation <= 1e-9 * rep1.scale


def test_concavity_scan_rejects_zero_trials():
    with pytest.raises(InvalidInput):
        concavity_scan(RegionSampler(seed=1), trials=0)


def test_monotonicity_scan_deterministic_and_clean():
    rep1 = monotonicity_scan(n=3, paths=100, steps_per_path=20, seed=4)
    rep2 = monotonicity_scan(n=3, paths=100, steps_per_path=20, seed=4)
    assert rep1 == rep2
    assert rep1.decreases_beyond_tol == 0
    assert rep1.trace_state_value == pytest.approx(5.0)
    assert rep1.global_max <= rep1.trace_state_value + 1e-6


def test_monotonicity_scan_other_dimension():
    rep = monotonicity_scan(n=4, paths=50, steps_per_path=10, seed=8)
    assert rep.decreases_beyond_tol == 0
    # n=4 trace state value: (16-1)(16-4)/8 = 22.5
    assert rep.trace_state_value == pytest.approx(22.5)
    assert rep.global_max <= rep.trace_state_value + 1e-6
