import numpy as np
import pytest

from monocurv.errors import NotNormalized, NotOrthogonal
from monocurv.geometry import (
    MetricContext,
    christoffel,
    fd_metric_derivative,
    fd_metric_second_derivative,
    metric,
    metric_derivative,
    metric_second_derivative,
    oracle_scalar,
    riemann,
    riemann_normalized,
    scalar_from_curvature,
    sectional,
)
from monocurv.mcfun import KUBO_MORI, LARGEST, SMALLEST, make_builtin
from monocurv.states import (
    DensityMatrix,
    TangentVector,
    decompose,
    random_state,
    random_tangent,
)

ALL_KINDS = [SMALLEST, LARGEST, KUBO_MORI]


def _ctx(kind, n=3, seed=0, normalized=False):
    rho = random_state(n, seed=seed, normalized=normalized)
    return MetricContext(make_builtin(kind), rho), rho


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_metric_symmetric_positive(kind):
    ctx, _ = _ctx(kind)
    x = random_tangent(3, seed=1)
    y = random_tangent(3, seed=2)
    assert metric(ctx, x, y) == pytest.approx(metric(ctx, y, x), rel=1e-12)
    assert metric(ctx, x, x) > 0


def test_bures_metric_known_value_on_diagonal_state():
    # For rho = diag(a, b) and X = e12 + e21: g(X, X) = 2 c(a, b) = 4/(a+b).
    rho = DensityMatrix(np.diag([0.3, 0.7]), normalized=True)
    ctx = MetricContext(make_builtin(SMALLEST), rho)
    x = TangentVector(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert metric(ctx, x, x) == pytest.approx(4.0, rel=1e-12)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_metric_derivative_matches_finite_differences(kind):
    ctx, rho = _ctx(kind, seed=3)
    z = random_tangent(3, seed=4)
    x = random_tangent(3, seed=5)
    y = random_tangent(3, seed=6)
    got = metric_derivative(ctx, z, x, y)
    want = fd_metric_derivative(ctx.c, rho, z, x, y)
    assert got == pytest.approx(want, rel=1e-7)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_metric_second_derivative_matches_finite_differences(kind):
    ctx, rho = _ctx(kind, seed=7)
    z = random_tangent(3, seed=8)
    w = random_tangent(3, seed=9)
    x = random_tangent(3, seed=10)
    y = random_tangent(3, seed=11)
    got = metric_second_derivative(ctx, z, w, x, y)
    want = fd_metric_second_derivative(ctx.c, rho, z, w, x, y)
    assert got == pytest.approx(want, rel=1e-5)
    # symmetric in the differentiation directions
    assert got == pytest.approx(metric_second_derivative(ctx, w, z, x, y),
                                rel=1e-10)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_compatibility_of_christoffel_with_metric(kind):
    # D_Z g(X,Y) = g(Gamma(Z,X), Y) + g(X, Gamma(Z,Y))
    ctx, _ = _ctx(kind, seed=12)
    z = random_tangent(3, seed=13)
    x = random_tangent(3, seed=14)
    y = random_tangent(3, seed=15)
    lhs = metric_derivative(ctx, z, x, y)
    rhs = (metric(ctx, christoffel(ctx, z, x), y)
           + metric(ctx, x, christoffel(ctx, z, y)))
    assert lhs == pytest.approx(rhs, rel=1e-10)


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_radial_identities(kind):
    # Gamma(X, rho) = -X/2;  D_rho g = -g;  R(X,Y,Z,rho) = 0.
    ctx, rho = _ctx(kind, seed=16)
    radial = TangentVector(rho.entries)
    x = random_tangent(3, seed=17)
    y = random_tangent(3, seed=18)
    z = random_tangent(3, seed=19)
    gam = christoffel(ctx, x, radial)
    assert np.max(np.abs(gam.entries + 0.5 * x.entries)) < 1e-12
    g = metric(ctx, x, y)
    assert metric_derivative(ctx, radial, x, y) == pytest.approx(-g, rel=1e-10)
    assert abs(riemann(ctx, x, y, z, radial)) < 1e-10 * max(1.0, abs(g))


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_riemann_symmetries_and_bianchi(kind):
    ctx, _ = _ctx(kind, seed=20)
    v = [random_tangent(3, seed=21 + i) for i in range(4)]
    x, y, z, w = v
    r = riemann(ctx, x, y, z, w)
    scale = max(1.0, abs(r))
    assert abs(riemann(ctx, y, x, z, w) + r) < 1e-10 * scale
    assert abs(riemann(ctx, x, y, w, z) + r) < 1e-10 * scale
    assert abs(riemann(ctx, z, w, x, y) - r) < 1e-10 * scale
    bianchi = (r + riemann(ctx, y, z, x, w) + riemann(ctx, z, x, y, w))
    assert abs(bianchi) < 1e-10 * scale


@pytest.mark.parametrize("kind", ALL_KINDS)
def test_unitary_invariance(kind):
    ctx, rho = _ctx(kind, seed=25)
    v = [random_tangent(3, seed=26 + i) for i in range(4)]
    rng = np.random.default_rng(30)
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    rho_u = DensityMatrix(q @ rho.entries @ q.conj().T)
    ctx_u = MetricContext(ctx.c, rho_u)
    v_u = [TangentVector(q @ t.entries @ q.conj().T) for t in v]
    assert metric(ctx, v[0], v[1]) == pytest.approx(
        metric(ctx_u, v_u[0], v_u[1]), rel=1e-10)
    assert riemann(ctx, *v) == pytest.approx(riemann(ctx_u, *v_u), rel=1e-8)


def test_riemann_normalized_requires_normalized_inputs():
    ctx, _ = _ctx(SMALLEST, seed=31)  # trace != 1
    v = [random_tangent(3, seed=32 + i) for i in range(4)]
    with pytest.raises(NotNormalized):
        riemann_normalized(ctx, *v)


def test_sectional_rejects_non_orthogonal_pair():
    ctx, _ = _ctx(SMALLEST, seed=36)
    x = random_tangent(3, seed=37)
    with pytest.raises(NotOrthogonal):
        sectional(ctx, x, x)


@pytest.mark.parametrize("kind", ALL_KINDS)
@pytest.mark.parametrize("n", [2, 3])
def test_scalar_matches_chart_oracle(kind, n):
    ctx, _ = _ctx(kind, n=n, seed=40)
    got = scalar_from_curvature(ctx)
    want = oracle_scalar(ctx)
    assert got == pytest.approx(want, rel=1e-3)


def test_bures_qubit_normalized_scalar_is_six():
    rho = random_state(2, seed=41, normalized=True)
    ctx = MetricContext(make_builtin(SMALLEST), rho)
    assert scalar_from_curvature(ctx, normalized=True) == pytest.approx(
        6.0, rel=1e-9)


def test_scalar_consistent_with_riemann_trace():
    # scalar_from_curvature agrees with the explicit double g-trace of R.
    ctx, rho = _ctx(SMALLEST, n=2, seed=42)
    from monocurv.states import basis_vectors
    basis = basis_vectors(2)
    m = len(basis)
    g = np.array([[metric(ctx, a, b) for b in basis] for a in basis])
    ginv = np.linalg.inv(g)
    r = np.zeros((m, m, m, m))
    for a in range(m):
        for b in range(m):
            for c in range(m):
                for d in range(m):
                    r[a, b, c, d] = riemann(ctx, basis[a], basis[b],
                                            basis[c], basis[d])
    s = np.einsum("ac,bd,abcd->", ginv, ginv, r)
    assert scalar_from_curvature(ctx) == pytest.approx(s, rel=1e-10)
