"""Closed-form scalar curvature from eigenvalue-triple sums.

The scalar curvature of a monotone metric is a sum of a kernel h(x, y, z)
over all ordered triples of eigenvalues, minus a diagonal correction.  The
kernels have removable singularities at coincident arguments; every
evaluator here blends into the analytic limit inside a narrow relative
band, so the sums stay accurate for (near-)degenerate spectra.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (DimensionTooSmall, InvalidInput, SingularCompanion)
from .mcfun import (KUBO_MORI, LARGEST, SMALLEST, MorozovaChentsovFunction,
                    divided_diff_1, divided_diff_2, make_builtin)

# Relative coincidence bands.  Single divided differences lose ~eps/delta
# of relative accuracy while the midpoint limit formulas are accurate to
# O(delta^2); 1e-4 balances the two regimes near eps^(1/3).
H1_BAND = 1e-4
DD_BAND = 1e-4


def _bands(*args):
    scale = args[0]
    for a in args[1:]:
        scale = np.maximum(scale, a)
    return scale


def _wrap(out, scalar_in: bool):
    return float(out.reshape(())) if scalar_in and out.size == 1 else out


# Stable building blocks for the log-mean kernel.  With
#   G(z, t) = z * (d/dt) log c(t, z) = z/(t - z) - 1/log(t/z)
# the log-ratio cancellation of the generic path disappears: the
# divided difference over (x, y) splits into a rational part and a
# log1p ratio, and when both arguments sit near z the quotient series
# R(u) = G(z, z(1+u)) gives a cancellation-free polynomial divided
# difference.
_KM_BAND = 2.2e-3


def _km_series(terms: int = 12):
    # G = P(u)/Q(u) with P, Q the tails of the log(1+u) series; divide.
    p = np.array([(-1.0) ** (j + 1) / (j + 2) for j in range(terms)])
    q = np.array([(-1.0) ** j / (j + 1) for j in range(terms)])
    r = np.empty(terms)
    for j in range(terms):
        r[j] = p[j] - np.dot(q[1:j + 1], r[:j][::-1])
    return r


_KM_R = _km_series()


def _km_g(z, t):
    """G(z, t) = z/(t - z) - 1/log(t/z); series branch near t = z."""
    u = (t - z) / z
    near = np.abs(u) < _KM_BAND
    us = np.where(near, u, 0.0)
    series = np.full_like(us, _KM_R[-1])
    for r in _KM_R[-2::-1]:
        series = series * us + r
    uf = np.where(near, 1.0, u)
    far = z / np.where(near, 1.0, t - z) - 1.0 / np.log1p(uf)
    return np.where(near, series, far)


def _km_g_dd(x, y, z):
    """Divided difference (G(z, x) - G(z, y)) / (x - y), stable everywhere."""
    s = np.maximum(np.maximum(x, y), z)
    ux = (x - z) / z
    uy = (y - z) / z
    near_z = (np.abs(ux) < _KM_BAND) & (np.abs(uy) < _KM_BAND)
    near_xy = np.abs(x - y) < 1e-3 * s
    # All three close: polynomial divided difference of the series,
    # sum_k r_k * S_k / z with S_k = sum_{j<k} ux^j uy^(k-1-j).
    uxs = np.where(near_z, ux, 0.0)
    uys = np.where(near_z, uy, 0.0)
    acc = np.zeros_like(uxs)
    step = np.ones_like(uxs)
    pw = np.ones_like(uys)
    for k in range(1, len(_KM_R)):
        acc = acc + _KM_R[k] * step
        pw = pw * uys
        step = uxs * step + pw
    poly = acc / z
    # x ~ y away from z: difference the pole and the log parts separately.
    off = ~(near_xy & ~near_z)
    dx = np.where(off, 1.0, x - z)
    dy = np.where(off, 1.0, y - z)
    lx = np.log1p(np.where(off, 1.0, ux))
    ly = np.log1p(np.where(off, 1.0, uy))
    dxy = x - y
    equal = dxy == 0.0
    ratio = np.where(equal, 1.0 / y,
                     np.log1p(np.where(equal, 0.0, dxy) / y)
                     / np.where(equal, 1.0, dxy))
    split = -z / (dx * dy) + ratio / (lx * ly)
    # Separated arguments: plain difference quotient of the stable G.
    dsafe = np.where(near_xy | near_z, 1.0, dxy)
    direct = (_km_g(z, x) - _km_g(z, y)) / dsafe
    return np.where(near_z, poly, np.where(near_xy, split, direct))


def _km_d(x, y, z):
    """d(x, y, z) = (3/2) dd(G) - G(z,x) G(z,y) / z for the log-mean metric."""
    return 1.5 * _km_g_dd(x, y, z) - _km_g(z, x) * _km_g(z, y) / z


@dataclass(frozen=True)
class HKernel:
    """Eigenvalue-triple kernels h1..h4, h and the cross-check functions."""

    c: MorozovaChentsovFunction

    # -- h1: (c(x,y) - z c(x,z) c(y,z)) / ((x-z)(y-z) c(x,z) c(y,z)) -------
    #
    # Stable evaluation: with phi(t) = 1/c(t,z) the auxiliary function
    # psi(x,y) = c(x,y) phi(x) phi(y) equals z on the lines x=z and y=z,
    # so h1 is the mixed divided difference of psi over (x,z) and (y,z).
    # Near a coincidence the divided difference collapses to a partial
    # derivative of psi evaluated at the midpoint.

    def _dpsi_dx(self, x, y, z):
        # d/dx [c(x,y) phi(x)] phi(y), phi = 1/c(.,z); vanishes at y=z.
        c = self.c
        phix = 1.0 / c.c(x, z)
        phiy = 1.0 / c.c(y, z)
        return phix * phiy * (c.c10(x, y) - c.c(x, y) * c.lnc10(x, z))

    def h1(self, x, y, z):
        c = self.c
        scalar_in = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(z) == 0
        x, y, z = np.broadcast_arrays(*np.atleast_1d(x, y, z))
        x, y, z = (np.asarray(a, dtype=float) for a in (x, y, z))
        s = _bands(x, y, z)
        dx = np.abs(x - z)
        dy = np.abs(y - z)
        near_x = dx < H1_BAND * s
        near_y = dy < H1_BAND * s
        mx = 0.5 * (x + z)
        my = 0.5 * (y + z)

        denom = np.where(~near_x & ~near_y, (x - z) * (y - z), 1.0)
        direct = (c.c(x, y) / (c.c(x, z) * c.c(y, z)) - z) / denom

        lim_x = self._dpsi_dx(mx, y, z) / np.where(near_y, 1.0, y - z)
        lim_y = self._dpsi_dx(my, x, z) / np.where(near_x, 1.0, x - z)

        # d^2 psi / dx dy at (mx, my), both gaps small.
        phix = 1.0 / c.c(mx, z)
        phiy = 1.0 / c.c(my, z)
        lim_xy = phix * phiy * (
            -c.lnc10(my, z) * (c.c10(mx, my) - c.c(mx, my) * c.lnc10(mx, z))
            + c.c11(mx, my) - c.c10(my, mx) * c.lnc10(mx, z))

        out = np.where(near_x & near_y, lim_xy,
                       np.where(near_x, lim_x,
                                np.where(near_y, lim_y, direct)))
        return _wrap(out, scalar_in)

    def h2(self, x, y, z):
        c = self.c
        scalar_in = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(z) == 0
        x, y, z = np.broadcast_arrays(*np.atleast_1d(x, y, z))
        x, y, z = (np.asarray(a, dtype=float) for a in (x, y, z))
        dd = divided_diff_1(c, x, y, z)
        out = dd * dd / (c.c(x, y) * c.c(x, z) * c.c(y, z))
        return _wrap(out, scalar_in)

    def h3(self, x, y, z):
        c = self.c
        scalar_in = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(z) == 0
        x, y, z = np.broadcast_arrays(*np.atleast_1d(x, y, z))
        x, y, z = (np.asarray(a, dtype=float) for a in (x, y, z))
        near = np.abs(x - y) < DD_BAND * np.maximum(x, y)
        m = 0.5 * (x + y)
        direct = z * (c.lnc10(z, x) - c.lnc10(z, y)) / np.where(near, 1.0, x - y)
        limit = z * c.d2_lnc10(z, m)
        out = np.where(near, limit, direct)
        return _wrap(out, scalar_in)

    def h4(self, x, y, z):
        c = self.c
        out = np.asarray(z * c.lnc10(z, x) * c.lnc10(z, y), dtype=float)
        return out if out.ndim else float(out)

    def h(self, x, y, z):
        return (self.h1(x, y, z) - 0.5 * self.h2(x, y, z)
                + 2.0 * self.h3(x, y, z) - self.h4(x, y, z))

    def h_diag(self, x):
        """h(x, x, x) = 15/(8x) - 3 x^2 c''(x, x)."""
        out = np.asarray(15.0 / (8.0 * np.asarray(x, dtype=float))
                         - 3.0 * np.asarray(x) ** 2 * self.c.c20(x, x))
        return out if out.ndim else float(out)

    def d(self, x, y, z):
        """d = (3/2) h1 - h4; same symmetrization as h when h1 = h3.

        For Kubo-Mori h1 and h3 coincide identically and the dedicated
        cancellation-free evaluation is far tighter near coincident
        eigenvalues, so it is preferred there.
        """
        if self.c.kind == KUBO_MORI:
            scalar_in = np.ndim(x) == 0 and np.ndim(y) == 0 and np.ndim(z) == 0
            x, y, z = np.broadcast_arrays(*np.atleast_1d(x, y, z))
            x, y, z = (np.asarray(a, dtype=float) for a in (x, y, z))
            return _wrap(_km_d(x, y, z), scalar_in)
        return 1.5 * self.h1(x, y, z) - self.h4(x, y, z)

    # -- sectional-curvature cross-check functions ------------------------

    def B(self, x, y):
        """Sectional curvature of the (b_12, b~_12) plane at diag(x, y)."""
        c = self.c
        x = float(x)
        y = float(y)
        s = max(x, y)
        m = 0.5 * (x + y)
        if abs(x - y) < H1_BAND * s:
            b1 = 0.5 / m - m**2 * c.c20(m, m)
        else:
            cxy = c.c(x, y)
            b1 = (2.0 - (x + y) * cxy) / ((x - y) ** 2 * cxy)
        b23 = -x * c.lnc10(x, y) ** 2 / 4.0 - y * c.lnc10(y, x) ** 2 / 4.0
        # (x lnc'(x,y) - y lnc'(y,x))/(x-y) = (1 + 2x lnc'(x,y))/(x-y) by
        # the Euler identity; removable at x=y.
        if abs(x - y) < DD_BAND * s:
            b4 = 2.0 * m * c.d2_lnc10(m, m)
        else:
            b4 = -(1.0 + 2.0 * x * c.lnc10(x, y)) / (x - y)
        return b1 + b23 + b4

    def C_xxy(self, x, y):
        """Limit C(x, x, y) of the three-eigenvalue sectional function."""
        c = self.c
        x = float(x)
        y = float(y)
        s = max(x, y)
        m = 0.5 * (x + y)
        if abs(x - y) < H1_BAND * s:
            q1 = (0.5 / m - m**2 * c.c20(m, m)) / 4.0
        else:
            cxy = c.c(x, y)
            q1 = (2.0 - (x + y) * cxy) / (4.0 * (x - y) ** 2 * cxy)
        q23 = x * c.lnc10(x, y) ** 2 / 8.0 - y * c.lnc10(y, x) ** 2 / 4.0
        if abs(x - y) < DD_BAND * s:
            q4 = 0.5 * m * c.d2_lnc10(m, m)
        else:
            q4 = -(1.0 + 2.0 * x * c.lnc10(x, y)) / (4.0 * (x - y))
        return q1 + q23 + q4

    def _t_term(self, x, y, z):
        # (c(z,y)-c(x,y))/(2(x-z)^2 c(x,z) c(y,z)) + z lnc'(z,y)/(2(x-z)),
        # rewritten as -1/2 times the divided difference over (x, z) of
        # W(t) = dd1_c(t,z;y)/(c(t,z) c(y,z)), using W(z) = z lnc'(z,y).
        c = self.c
        s = max(x, y, z)
        if abs(x - z) < DD_BAND * s:
            m = 0.5 * (x + z)
            cmz = c.c(m, z)
            dw = (divided_diff_2(c, m, m, z, y) * cmz
                  - divided_diff_1(c, m, z, y) * c.c10(m, z)) / (
                      cmz**2 * c.c(y, z))
            return -0.5 * float(dw)
        wx = divided_diff_1(c, x, z, y) / (c.c(x, z) * c.c(y, z))
        wz = z * c.lnc10(z, y)
        return -0.5 * float((wx - wz) / (x - z))

    def C(self, x, y, z):
        """Sectional curvature of the (b_13, b_23) plane at diag(x, y, z)."""
        x, y, z = float(x), float(y), float(z)
        core = 0.25 * (3.0 * self.h1(x, y, z) - self.h1(y, z, x)
                       - self.h1(z, x, y))
        core += (self.h2(x, y, z) + self.h2(y, z, x) + self.h2(z, x, y)) / 8.0
        core -= self.h4(x, y, z) / 4.0
        return core + self._t_term(x, y, z) + self._t_term(y, x, z)

    def A(self, x, y):
        """Sectional curvature of the (b_11, b_12) plane; A = 2 C(x, y, x)."""
        return 2.0 * self.C(x, y, x)


def h_eval(k: HKernel, which: str, x, y, z):
    """Evaluate one of the named triple kernels."""
    table = {"h1": k.h1, "h2": k.h2, "h3": k.h3, "h4": k.h4,
             "h": k.h, "d": k.d}
    if which not in table:
        raise InvalidInput(f"unknown kernel selector {which!r}")
    return table[which](x, y, z)


def _check_spectrum(spectrum) -> np.ndarray:
    lam = np.asarray(spectrum, dtype=float)
    if lam.size == 0:
        raise InvalidInput("spectrum must be nonempty")
    if np.any(lam <= 0):
        raise InvalidInput("spectrum entries must be positive")
    return lam


def scalar_theorem1(k: HKernel, spectrum) -> float:
    """Scalar curvature: sum of h over all ordered eigenvalue triples,
    minus the fully-coincident diagonal."""
    lam = _check_spectrum(spectrum)
    x = lam[:, None, None]
    y = lam[None, :, None]
    z = lam[None, None, :]
    total = np.sum(k.h(x + 0 * y + 0 * z, y + 0 * x + 0 * z, z + 0 * x + 0 * y))
    return float(total - np.sum(k.h_diag(lam)))


def normalize_scalar(s: float, n: int) -> float:
    """Shift from the full cone to the trace-one submanifold."""
    if n < 2:
        raise DimensionTooSmall("dimension must be at least 2")
    return s + (n**2 - 1) * (n**2 - 2) / 4.0


TRACE_STATE_CLOSED_FORMS = {
    SMALLEST: lambda n: (n**2 - 1) * (5 * n**2 - 4) / 8.0,
    LARGEST: lambda n: (1 - n**2) * (7 * n**2 + 4) / 8.0,
    KUBO_MORI: lambda n: (n**2 - 1) * (n**2 - 4) / 8.0,
}


def trace_state_scalar(k: HKernel, n: int) -> float:
    """Normalized scalar curvature at the maximally mixed state."""
    if n < 2:
        raise DimensionTooSmall("dimension must be at least 2")
    c20 = float(k.c.c20(1.0 / n, 1.0 / n))
    return (n**2 - 1) * (17 * n**3 - 4 * n - 24 * c20) / (8.0 * n)


def recurrence_check(k: HKernel, spectrum):
    """Relative residuals of the two scalar-curvature recurrences.

    First: (n-3) S(all) = sum_i S(drop i) - sum_{i<j} S(pair ij).
    Second (n > 3): S(all) = sum_{i<j<k} S(triple) - (n-3) sum_{i<j} S(pair).
    """
    lam = _check_spectrum(spectrum)
    n = lam.size
    if n < 3:
        raise DimensionTooSmall("recurrences need at least 3 eigenvalues")
    s_all = scalar_theorem1(k, lam)
    scale = max(1.0, abs(s_all))
    pair_sum = sum(scalar_theorem1(k, lam[[i, j]])
                   for i in range(n) for j in range(i + 1, n))
    drop_sum = sum(scalar_theorem1(k, np.delete(lam, i)) for i in range(n))
    res1 = ((n - 3) * s_all - (drop_sum - pair_sum)) / scale
    if n == 3:
        return float(res1), None
    triple_sum = sum(scalar_theorem1(k, lam[[i, j, m]])
                     for i in range(n) for j in range(i + 1, n)
                     for m in range(j + 1, n))
    res2 = (s_all - (triple_sum - (n - 3) * pair_sum)) / scale
    return float(res1), float(res2)


@dataclass(frozen=True)
class AbcReport:
    a: float
    b: float
    c3: float
    c_xxy: float
    lemma3_residual: float
    a_sectional_residual: float
    b_sectional_residual: float
    c_sectional_residual: float

    @property
    def max_residual(self) -> float:
        return max(abs(self.lemma3_residual), abs(self.a_sectional_residual),
                   abs(self.b_sectional_residual), abs(self.c_sectional_residual))


def abc_crosscheck(k: HKernel, x: float, y: float, z: float) -> AbcReport:
    """Check the closed-form A, B, C against direct sectional curvature."""
    from .geometry import MetricContext, sectional
    from .states import DensityMatrix

    a_val = k.A(x, y)
    b_val = k.B(x, y)
    c_val = k.C(x, y, z)
    cxxy = k.C_xxy(x, y)
    lemma3 = (b_val - 2.0 * k.C_xxy(x, y) - 2.0 * k.C_xxy(y, x)) / max(
        1.0, abs(b_val))

    b11 = np.diag([2.0, 0.0])
    b12 = np.array([[0.0, 1.0], [1.0, 0.0]])
    b12t = np.array([[0.0, 1.0j], [-1.0j, 0.0]])
    ctx2 = MetricContext(k.c, DensityMatrix(np.diag([x, y])))
    res_a = (sectional(ctx2, b11, b12) - a_val) / max(1.0, abs(a_val))
    res_b = (sectional(ctx2, b12, b12t) - b_val) / max(1.0, abs(b_val))

    b13 = np.zeros((3, 3))
    b13[0, 2] = b13[2, 0] = 1.0
    b23 = np.zeros((3, 3))
    b23[1, 2] = b23[2, 1] = 1.0
    ctx3 = MetricContext(k.c, DensityMatrix(np.diag([x, y, z])))
    res_c = (sectional(ctx3, b13, b23) - c_val) / max(1.0, abs(c_val))

    return AbcReport(a_val, b_val, c_val, cxxy, float(lemma3),
                     float(res_a), float(res_b), float(res_c))


# ---------------------------------------------------------------------------
# Per-metric closed forms
# ---------------------------------------------------------------------------

def bures_scalar(spectrum) -> float:
    """Scalar curvature of the smallest monotone metric (full cone)."""
    lam = _check_spectrum(spectrum)
    if lam.size < 2:
        raise DimensionTooSmall("need at least 2 eigenvalues")
    x = lam[:, None, None]
    y = lam[None, :, None]
    z = lam[None, None, :]
    triple = np.sum(z / ((x + z) * (y + z)))
    return float(1.5 * triple - 0.375 * np.sum(1.0 / lam))


def largest_scalar(spectrum) -> float:
    """Scalar curvature of the largest monotone metric, eigenvalue form."""
    lam = _check_spectrum(spectrum)
    if lam.size < 2:
        raise DimensionTooSmall("need at least 2 eigenvalues")
    n = lam.size
    r = np.sum(1.0 / (lam[:, None] + lam[None, :]), axis=0)  # r[z] = sum_x 1/(x+z)
    return float(-2.5 * np.sum(lam * r**2) + n * np.sum(r)
                 + (9.0 / 8.0 - n**2) * np.sum(1.0 / lam))


def largest_scalar_companion(spectrum) -> float:
    """Same value via the companion matrix of the characteristic polynomial.

    Only the elementary symmetric invariants e_i enter; equality with
    largest_scalar is the invariant-theoretic consistency check.
    """
    lam = _check_spectrum(spectrum)
    n = lam.size
    if n < 2:
        raise DimensionTooSmall("need at least 2 eigenvalues")
    coeffs = np.poly(lam)           # coeffs[i] = (-1)^i e_i
    e = coeffs * (-1.0) ** np.arange(n + 1)

    comp = np.zeros((n, n))
    for i in range(n - 1):
        comp[i, i + 1] = 1.0
    for j in range(n):              # last row: (-1)^(n-1-j) e_{n-j}
        comp[n - 1, j] = (-1.0) ** (n - 1 - j) * e[n - j]

    # p(t) = sum_i e_{n-i} t^i = (-1)^n chi(-t); sign cancels in the ratios.
    p = np.zeros((n, n))
    dp = np.zeros((n, n))
    eye = np.eye(n)
    for i in range(n, -1, -1):      # simultaneous Horner on matrices
        dp = dp @ comp + p
        p = p @ comp + e[n - i] * eye
    try:
        m = np.linalg.solve(p, dp)
        inv_tr = np.trace(np.linalg.solve(comp, eye))
    except np.linalg.LinAlgError as exc:
        raise SingularCompanion(str(exc)) from exc
    if not np.all(np.isfinite(m)):
        raise SingularCompanion("polynomial matrix is numerically singular")
    return float(-2.5 * np.trace(comp @ m @ m) + n * np.trace(m)
                 + (9.0 / 8.0 - n**2) * inv_tr)


_KM_KERNEL = None


def _km_kernel() -> HKernel:
    global _KM_KERNEL
    if _KM_KERNEL is None:
        _KM_KERNEL = HKernel(make_builtin(KUBO_MORI))
    return _KM_KERNEL


def kubo_mori_scalar(spectrum, normalized: bool = False):
    """Kubo-Mori scalar curvature via the reduced kernel d = (3/2)h1 - h4.

    Accepts a single spectrum (n,) or a batch (..., n); returns a float or
    an array of the leading shape.
    """
    lam = np.asarray(spectrum, dtype=float)
    if lam.ndim == 0 or lam.shape[-1] < 2:
        raise DimensionTooSmall("need at least 2 eigenvalues")
    if np.any(lam <= 0):
        raise InvalidInput("spectrum entries must be positive")
    k = _km_kernel()
    n = lam.shape[-1]
    x = lam[..., :, None, None]
    y = lam[..., None, :, None]
    z = lam[..., None, None, :]
    d = k.d(x + 0 * y + 0 * z, y + 0 * x + 0 * z, z + 0 * x + 0 * y)
    total = np.sum(np.asarray(d), axis=(-1, -2, -3))
    total = total - np.sum(np.asarray(k.h_diag(lam)), axis=-1)
    if normalized:
        total = total + (n**2 - 1) * (n**2 - 2) / 4.0
    return float(total) if np.ndim(total) == 0 else total
