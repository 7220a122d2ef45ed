"""Riemannian machinery for monotone metrics on positive matrices.

Everything is evaluated in the eigenbasis of the base point, where the
left/right multiplication operators are diagonal and the contour integrals
of the underlying operator calculus collapse to divided differences of the
Morozova-Chentsov function.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from .errors import DimensionMismatch, IllConditioned, NotNormalized, NotOrthogonal
from .mcfun import (MorozovaChentsovFunction, divided_diff_1, divided_diff_11,
                    divided_diff_2)
from .states import (DensityMatrix, SpectralDecomposition, TangentVector,
                     as_matrix, basis_vectors, decompose, traceless_basis)

ORTHOGONALITY_RTOL = 1e-8
CONDITION_LIMIT = 1e12


class MetricContext:
    """A metric kernel at a fixed base point, with cached spectral data.

    Immutable after construction; the divided-difference coefficient
    tensors are computed lazily and cached.
    """

    def __init__(self, c: MorozovaChentsovFunction, rho: DensityMatrix):
        if not isinstance(rho, DensityMatrix):
            rho = DensityMatrix(rho)
        self.c = c
        self.rho = rho
        self.spec: SpectralDecomposition = decompose(rho)
        self.n = rho.n

    @cached_property
    def _cmat(self) -> np.ndarray:
        lam = self.spec.eigenvalues
        return np.asarray(self.c.c(lam[:, None], lam[None, :]), dtype=float)

    @cached_property
    def _dd1(self) -> np.ndarray:
        # _dd1[a, b, y] = divided difference of c(., lam_y) over nodes (lam_a, lam_b)
        lam = self.spec.eigenvalues
        a = lam[:, None, None]
        b = lam[None, :, None]
        y = lam[None, None, :]
        return np.asarray(divided_diff_1(self.c, a + 0 * b + 0 * y,
                                         b + 0 * a + 0 * y, y + 0 * a + 0 * b),
                          dtype=float)

    @cached_property
    def _dd2(self) -> np.ndarray:
        # _dd2[i, j, k, l] = second divided difference over nodes
        # (lam_i, lam_j, lam_k) with fixed second argument lam_l.
        lam = self.spec.eigenvalues
        n = self.n
        out = np.empty((n, n, n, n))
        cache = {}
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    key = tuple(sorted((i, j, k)))
                    for l in range(n):
                        if (key, l) not in cache:
                            cache[(key, l)] = divided_diff_2(
                                self.c, lam[i], lam[j], lam[k], lam[l])
                        out[i, j, k, l] = cache[(key, l)]
        return out

    @cached_property
    def _dd11(self) -> np.ndarray:
        # _dd11[a, b, c, d] = mixed divided difference, first argument over
        # (lam_a, lam_b), second over (lam_c, lam_d).
        lam = self.spec.eigenvalues
        n = self.n
        out = np.empty((n, n, n, n))
        cache = {}
        for a in range(n):
            for b in range(a, n):
                for c in range(n):
                    for d in range(c, n):
                        cache[(a, b, c, d)] = divided_diff_11(
                            self.c, lam[a], lam[b], lam[c], lam[d])
        for a in range(n):
            for b in range(n):
                for c in range(n):
                    for d in range(n):
                        out[a, b, c, d] = cache[(min(a, b), max(a, b),
                                                 min(c, d), max(c, d))]
        return out

    @cached_property
    def _christoffel_coeff(self) -> np.ndarray:
        # coeff[i, k, j]: weight of X_ik Y_kj in the numerator of Gamma(X, Y)_ij:
        # dd1(l_i, l_k; l_j) + dd1(l_k, l_j; l_i) - dd1(l_i, l_j; l_k).
        a = self._dd1  # a[p, q, r] = dd1(l_p, l_q; l_r)
        return (a
                + np.moveaxis(a, (0, 1, 2), (1, 2, 0))
                - np.moveaxis(a, (0, 1, 2), (0, 2, 1)))

    def to_eigenbasis(self, m) -> np.ndarray:
        u = self.spec.eigenvectors
        return u.conj().T @ as_matrix(m) @ u

    def from_eigenbasis(self, m) -> np.ndarray:
        u = self.spec.eigenvectors
        return u @ m @ u.conj().T

    def _check_dim(self, *mats):
        for m in mats:
            if as_matrix(m).shape != (self.n, self.n):
                raise DimensionMismatch(
                    f"expected {self.n}x{self.n} matrix, got {as_matrix(m).shape}")


def metric(ctx: MetricContext, x, y) -> float:
    """Monotone metric g(X, Y) = Tr X c(L, R)(Y)."""
    ctx._check_dim(x, y)
    xh = ctx.to_eigenbasis(x)
    yh = ctx.to_eigenbasis(y)
    return float(np.einsum("ij,ij,ij->", xh.conj(), ctx._cmat, yh).real)


def metric_derivative(ctx: MetricContext, z, x, y) -> float:
    """Flat directional derivative D_Z g(X, Y) at the base point."""
    ctx._check_dim(z, x, y)
    zh = ctx.to_eigenbasis(z)
    xh = ctx.to_eigenbasis(x)
    yh = ctx.to_eigenbasis(y)
    coeff = ctx._dd1  # coeff[i, j, k] = dd1(lam_i, lam_j; lam_k), symmetric in i, j
    t = np.einsum("ij,jk,ki,ijk->", zh, xh, yh, coeff)
    t += np.einsum("ij,jk,ki,ijk->", zh, yh, xh, coeff)
    return float(t.real)


def metric_second_derivative(ctx: MetricContext, z, w, x, y) -> float:
    """Flat second derivative D^2_{Z,W} g(X, Y) at the base point."""
    ctx._check_dim(z, w, x, y)
    zh = ctx.to_eigenbasis(z)
    wh = ctx.to_eigenbasis(w)
    xh = ctx.to_eigenbasis(x)
    yh = ctx.to_eigenbasis(y)
    d2 = ctx._dd2
    m11 = ctx._dd11
    total = 0.0 + 0.0j
    for a, b in ((xh, yh), (yh, xh)):
        total += np.einsum("ij,jk,kl,li,ijkl->", zh, wh, a, b, d2)
        total += np.einsum("ij,jk,kl,li,ijkl->", wh, zh, a, b, d2)
        total += np.einsum("ij,jk,kl,li,ijkl->", zh, a, wh, b, m11)
    return float(total.real)


def christoffel(ctx: MetricContext, x, y) -> TangentVector:
    """Christoffel tensor Gamma(X, Y) of the Levi-Civita connection."""
    ctx._check_dim(x, y)
    xh = ctx.to_eigenbasis(x)
    yh = ctx.to_eigenbasis(y)
    coeff = ctx._christoffel_coeff
    num = np.einsum("ik,kj,ikj->ij", xh, yh, coeff)
    num += np.einsum("ik,kj,ikj->ij", yh, xh, coeff)
    gam = num / (2.0 * ctx._cmat)
    return TangentVector(ctx.from_eigenbasis(gam))


def riemann(ctx: MetricContext, x, y, z, w) -> float:
    """Curvature tensor R(X, Y, Z, W) on the full manifold of positive matrices."""
    ctx._check_dim(x, y, z, w)
    g_xw_yz = metric(ctx, christoffel(ctx, x, w), christoffel(ctx, y, z))
    g_xz_yw = metric(ctx, christoffel(ctx, x, z), christoffel(ctx, y, w))
    dd = (metric_second_derivative(ctx, x, w, y, z)
          + metric_second_derivative(ctx, y, z, x, w)
          - metric_second_derivative(ctx, x, z, y, w)
          - metric_second_derivative(ctx, y, w, x, z))
    return g_xw_yz - g_xz_yw + 0.5 * dd


def riemann_normalized(ctx: MetricContext, x, y, z, w) -> float:
    """Curvature tensor of the trace-one submanifold (Gauss equation)."""
    if abs(ctx.rho.trace - 1.0) > 1e-10:
        raise NotNormalized("base point must have trace one")
    for m in (x, y, z, w):
        mm = as_matrix(m)
        if abs(np.trace(mm)) > 1e-10 * max(1.0, np.linalg.norm(mm)):
            raise NotNormalized("tangent vectors must be traceless")
    r = riemann(ctx, x, y, z, w)
    g = lambda a, b: metric(ctx, a, b)
    return r + 0.25 * (g(x, z) * g(y, w) - g(y, z) * g(x, w))


def sectional(ctx: MetricContext, x, y, normalized: bool = False) -> float:
    """Sectional curvature of the plane spanned by metric-orthogonal X, Y."""
    gxx = metric(ctx, x, x)
    gyy = metric(ctx, y, y)
    gxy = metric(ctx, x, y)
    if abs(gxy) > ORTHOGONALITY_RTOL * np.sqrt(gxx * gyy):
        raise NotOrthogonal(f"g(X,Y) = {gxy:.3e} is not negligible")
    k = riemann(ctx, x, y, x, y) / (gxx * gyy)
    return k + 0.25 if normalized else k


# ---------------------------------------------------------------------------
# Finite-difference oracles (independent evaluation path)
# ---------------------------------------------------------------------------

def fd_metric_derivative(c, rho, z, x, y, step: float = 1e-5) -> float:
    """Central finite difference of g(X, Y) along rho + t Z, one Richardson level."""
    rho_m = as_matrix(rho)
    zm, xm, ym = as_matrix(z), as_matrix(x), as_matrix(y)
    h = step * max(1.0, float(np.linalg.norm(rho_m, 2)))

    def g_at(t):
        return metric(MetricContext(c, DensityMatrix(rho_m + t * zm)), xm, ym)

    def central(hh):
        return (g_at(hh) - g_at(-hh)) / (2 * hh)

    return (4.0 * central(h / 2) - central(h)) / 3.0


def fd_metric_second_derivative(c, rho, z, w, x, y, step: float = 1e-3) -> float:
    """Mixed central finite difference of g(X, Y) over rho + s Z + t W."""
    rho_m = as_matrix(rho)
    zm, wm = as_matrix(z), as_matrix(w)
    xm, ym = as_matrix(x), as_matrix(y)
    h = step * max(1.0, float(np.linalg.norm(rho_m, 2)))

    def g_at(s, t):
        return metric(MetricContext(c, DensityMatrix(rho_m + s * zm + t * wm)), xm, ym)

    def mixed(hh):
        return (g_at(hh, hh) - g_at(hh, -hh) - g_at(-hh, hh) + g_at(-hh, -hh)) / (4 * hh * hh)

    return (4.0 * mixed(h / 2) - mixed(h)) / 3.0


# ---------------------------------------------------------------------------
# Brute-force coordinate-chart scalar curvature
# ---------------------------------------------------------------------------

def _chart_metric_fn(c, rho0, mats):
    def gmat(shift):
        ctx = MetricContext(c, DensityMatrix(rho0 + shift))
        bh = np.stack([ctx.to_eigenbasis(m) for m in mats])
        return np.einsum("aij,ij,bij->ab", bh.conj(), ctx._cmat, bh).real
    return gmat


def oracle_scalar(ctx: MetricContext, normalized: bool = False) -> float:
    """Scalar curvature by finite differences in a flat coordinate chart.

    Independent of the divided-difference derivative formulas: only the
    metric itself is evaluated, at stencil points of the affine chart.
    """
    if normalized and abs(ctx.rho.trace - 1.0) > 1e-10:
        raise NotNormalized("normalized oracle requires a trace-one state")
    n = ctx.n
    vectors = traceless_basis(n) if normalized else basis_vectors(n)
    mats = [v.entries for v in vectors]
    m = len(mats)
    rho0 = ctx.rho.entries
    gmat = _chart_metric_fn(ctx.c, rho0, mats)

    g0 = gmat(np.zeros_like(rho0))
    if np.linalg.cond(g0) > CONDITION_LIMIT:
        raise IllConditioned("coordinate metric is numerically singular")
    ginv = np.linalg.inv(g0)

    norm = float(np.linalg.norm(ctx.spec.eigenvalues, np.inf))
    h1 = 1e-3 * norm
    h2 = 5e-3 * norm

    def d_first(a):
        def central(hh):
            return (gmat(hh * mats[a]) - gmat(-hh * mats[a])) / (2 * hh)
        return (4.0 * central(h1 / 2) - central(h1)) / 3.0

    dg = np.stack([d_first(a) for a in range(m)])  # dg[a, b, c] = d_a G_bc

    def d_second(a, b):
        if a == b:
            def stencil(hh):
                return (gmat(hh * mats[a]) - 2 * g0 + gmat(-hh * mats[a])) / hh**2
        else:
            def stencil(hh):
                pp = gmat(hh * (mats[a] + mats[b]))
                mm_ = gmat(-hh * (mats[a] + mats[b]))
                pm = gmat(hh * (mats[a] - mats[b]))
                mp = gmat(-hh * (mats[a] - mats[b]))
                return (pp + mm_ - pm - mp) / (4 * hh * hh)
        return (4.0 * stencil(h2 / 2) - stencil(h2)) / 3.0

    d2g = np.empty((m, m, m, m))
    for a in range(m):
        for b in range(a, m):
            val = d_second(a, b)
            d2g[a, b] = val
            d2g[b, a] = val

    # Christoffel symbols of the first kind:
    # gam[a, b, e] = 1/2 (d_a G_be + d_b G_ae - d_e G_ab)
    gam = 0.5 * (dg + dg.transpose(1, 0, 2) - np.einsum("eab->abe", dg))

    r = (np.einsum("ef,ade,bcf->abcd", ginv, gam, gam)
         - np.einsum("ef,ace,bdf->abcd", ginv, gam, gam)
         + 0.5 * (np.einsum("adbc->abcd", d2g) + np.einsum("bcad->abcd", d2g)
                  - np.einsum("acbd->abcd", d2g) - np.einsum("bdac->abcd", d2g)))
    return float(np.einsum("ac,bd,abcd->", ginv, ginv, r))


def scalar_from_curvature(ctx: MetricContext, normalized: bool = False) -> float:
    """Scalar curvature by contracting the analytic curvature tensor over a basis."""
    n = ctx.n
    vectors = traceless_basis(n) if normalized else basis_vectors(n)
    mats = [ctx.to_eigenbasis(v) for v in vectors]
    m = len(mats)
    bh = np.stack(mats)
    cmat = ctx._cmat
    gram = np.einsum("aij,ij,bij->ab", bh.conj(), cmat, bh).real
    ginv = np.linalg.inv(gram)

    num = np.einsum("aik,bkj,ikj->abij", bh, bh, ctx._christoffel_coeff)
    gam = (num + num.transpose(1, 0, 2, 3)) / (2.0 * cmat)  # gam[a, b] in eigenbasis

    p = np.einsum("abij,ij,cdij->abcd", gam.conj(), cmat, gam).real

    d2 = ctx._dd2
    m11 = ctx._dd11
    e1 = np.einsum("aij,bjk,ckl,dli,ijkl->abcd", bh, bh, bh, bh, d2).real
    f = np.einsum("aij,bjk,ckl,dli,ijkl->abcd", bh, bh, bh, bh, m11).real
    # dd[z, w, x, y] = D^2_{z,w} g(x, y)
    dd = (e1 + e1.transpose(1, 0, 2, 3)
          + e1.transpose(0, 1, 3, 2) + e1.transpose(1, 0, 3, 2)
          + f.transpose(0, 2, 1, 3) + f.transpose(0, 2, 3, 1))
    r = (np.einsum("adbc->abcd", p) - np.einsum("acbd->abcd", p)
         + 0.5 * (np.einsum("adbc->abcd", dd) + np.einsum("bcad->abcd", dd)
                  - np.einsum("acbd->abcd", dd) - np.einsum("bdac->abcd", dd)))
    if normalized:
        r = r + 0.25 * (np.einsum("ac,bd->abcd", gram, gram)
                        - np.einsum("bc,ad->abcd", gram, gram))
    return float(np.einsum("ac,bd,abcd->", ginv, ginv, r))
