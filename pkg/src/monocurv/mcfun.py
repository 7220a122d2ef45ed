"""Morozova-Chentsov functions and their stable divided differences.

A monotone Riemannian metric on positive matrices is determined by a
symmetric function c(x, y) on the positive quadrant ("Morozova-Chentsov
function").  This module provides the three classical examples (smallest /
Bures, largest, Kubo-Mori), user-defined functions, their first and second
partial derivatives, and divided differences with removable-singularity
handling.  All callables accept floats or numpy arrays.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import InvalidInput

# Metric kind identifiers.
SMALLEST = "smallest"
LARGEST = "largest"
KUBO_MORI = "kubo-mori"
CUSTOM = "custom"

BUILTIN_KINDS = (SMALLEST, LARGEST, KUBO_MORI)

# Arguments closer than COINCIDENCE_REL * max(a, b) are treated as coincident
# in first divided differences; the quotient is then replaced by the midpoint
# derivative (second-order accurate, exact in the limit).
COINCIDENCE_REL = 1e-6

# Wider band used by second and mixed divided differences, where the naive
# quotient loses twice as many digits.
CLUSTER_REL = 1e-4


def _positive(*args):
    for a in args:
        if np.any(np.asarray(a) <= 0):
            raise InvalidInput("arguments must be strictly positive")


@dataclass(frozen=True)
class MorozovaChentsovFunction:
    """A Morozova-Chentsov function with analytic partial derivatives.

    c       -- the function itself, c(x, y) > 0
    c10     -- partial derivative in the first argument
    c20     -- second partial derivative in the first argument
    lnc10   -- logarithmic derivative c10/c (supplied for accuracy near
               coincidences; defaults to the quotient)
    """

    kind: str
    c: Callable
    c10: Callable
    c20: Callable
    lnc10: Callable = None

    def __post_init__(self):
        if self.lnc10 is None:
            c, c10 = self.c, self.c10
            object.__setattr__(self, "lnc10", lambda x, y: c10(x, y) / c(x, y))

    def c11(self, x, y):
        # Mixed partial, recovered from the homogeneity identity
        # 2*c10 + y*c11 + x*c20 = 0.
        return -(2.0 * self.c10(x, y) + x * self.c20(x, y)) / y

    def d2_lnc10(self, x, y):
        # Derivative of lnc10(x, .) in its second argument; c01(x,y) = c10(y,x)
        # by symmetry of c.
        cv = self.c(x, y)
        return (self.c11(x, y) * cv - self.c10(x, y) * self.c10(y, x)) / cv**2


# ---------------------------------------------------------------------------
# Built-in functions
# ---------------------------------------------------------------------------

def _smallest_c(x, y):
    return 2.0 / (x + y)


def _smallest_c10(x, y):
    return -2.0 / (x + y) ** 2


def _smallest_c20(x, y):
    return 4.0 / (x + y) ** 3


def _smallest_lnc10(x, y):
    return -1.0 / (x + y)


def _largest_c(x, y):
    return (x + y) / (2.0 * x * y)


def _largest_c10(x, y):
    return -1.0 / (2.0 * x * x) + 0.0 * y


def _largest_c20(x, y):
    return 1.0 / x**3 + 0.0 * y


def _largest_lnc10(x, y):
    return -y / (x * (x + y))


# Kubo-Mori: c(x,y) = (ln x - ln y)/(x - y).  Near the diagonal the quotient
# and its derivatives are evaluated from the series in e = x/y - 1; the
# truncation error at the switch point |e| = 1e-2 is below 1e-15 relative.
_KM_SERIES_REL = 1e-2
# c(x,y)*y           = sum (-1)^k e^k / (k+1)
_KM_C = np.array([(-1.0) ** k / (k + 1) for k in range(9)])
# c10(x,y)*y^2       = sum_{k>=1} (-1)^k k/(k+1) e^{k-1}
_KM_C10 = np.array([(-1.0) ** k * k / (k + 1) for k in range(1, 10)])
# c20(x,y)*y^3       = sum_{k>=2} (-1)^k k(k-1)/(k+1) e^{k-2}
_KM_C20 = np.array([(-1.0) ** k * k * (k - 1) / (k + 1) for k in range(2, 11)])


def _km_eval(x, y, coeffs, direct, scale_power):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    e = (x - y) / y
    small = np.abs(e) < _KM_SERIES_REL
    series = np.polyval(coeffs[::-1], e) / y**scale_power
    with np.errstate(divide="ignore", invalid="ignore"):
        far = direct(x, y)
    out = np.where(small, series, far)
    return out if out.ndim else float(out)


def _km_c_direct(x, y):
    return (np.log(x) - np.log(y)) / (x - y)


def _km_c(x, y):
    return _km_eval(x, y, _KM_C, _km_c_direct, 1)


def _km_c10_direct(x, y):
    u = x - y
    return 1.0 / (x * u) - (np.log(x) - np.log(y)) / u**2


def _km_c10(x, y):
    return _km_eval(x, y, _KM_C10, _km_c10_direct, 2)


def _km_c20_direct(x, y):
    u = x - y
    lg = np.log(x) - np.log(y)
    return -(u + x) / (x * x * u * u) - 1.0 / (x * u * u) + 2.0 * lg / u**3


def _km_c20(x, y):
    return _km_eval(x, y, _KM_C20, _km_c20_direct, 3)


def _km_lnc10(x, y):
    return _km_c10(x, y) / _km_c(x, y)


_BUILTINS = {
    SMALLEST: (_smallest_c, _smallest_c10, _smallest_c20, _smallest_lnc10),
    LARGEST: (_largest_c, _largest_c10, _largest_c20, _largest_lnc10),
    KUBO_MORI: (_km_c, _km_c10, _km_c20, _km_lnc10),
}


def make_builtin(kind: str) -> MorozovaChentsovFunction:
    """Return the smallest (Bures), largest, or Kubo-Mori function."""
    key = kind.lower().replace("_", "-")
    if key == "bures":
        key = SMALLEST
    if key not in _BUILTINS:
        raise InvalidInput(f"unknown metric kind {kind!r}; expected one of {BUILTIN_KINDS}")
    c, c10, c20, lnc10 = _BUILTINS[key]
    return MorozovaChentsovFunction(kind=key, c=c, c10=c10, c20=c20, lnc10=lnc10)


def make_custom(c, c10, c20, lnc10=None, vectorize=False) -> MorozovaChentsovFunction:
    """Wrap user-supplied callables; set vectorize=True for scalar-only ones."""
    if vectorize:
        c, c10, c20 = np.vectorize(c), np.vectorize(c10), np.vectorize(c20)
        if lnc10 is not None:
            lnc10 = np.vectorize(lnc10)
    return MorozovaChentsovFunction(kind=CUSTOM, c=c, c10=c10, c20=c20, lnc10=lnc10)


# ---------------------------------------------------------------------------
# Divided differences
# ---------------------------------------------------------------------------

def divided_diff_1(f: MorozovaChentsovFunction, a, b, y):
    """(c(a,y) - c(b,y))/(a-b), continued across a = b by the midpoint derivative."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    y = np.asarray(y, dtype=float)
    _positive(a, b, y)
    gap = np.abs(a - b)
    small = gap <= COINCIDENCE_REL * np.maximum(a, b)
    denom = np.where(small, 1.0, a - b)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = (f.c(a, y) - f.c(b, y)) / denom
    blended = f.c10(0.5 * (a + b), y)
    out = np.where(small, blended, direct)
    return out if out.ndim else float(out)


def divided_diff_2(f: MorozovaChentsovFunction, a: float, b: float, d: float, y: float) -> float:
    """Second divided difference of c(., y) over the nodes {a, b, d}.

    Symmetric in the nodes; collapses to c20/2 at full coincidence.
    """
    _positive(a, b, d, y)
    s0, s1, s2 = sorted((a, b, d))
    spread = s2 - s0
    if spread <= CLUSTER_REL * s2:
        return 0.5 * float(f.c20((s0 + s1 + s2) / 3.0, y))
    # Outer division by the widest gap; the inner quotients carry their own guard.
    return (divided_diff_1(f, s2, s1, y) - divided_diff_1(f, s1, s0, y)) / spread


def divided_diff_1_dy(f: MorozovaChentsovFunction, a: float, b: float, y: float) -> float:
    """Derivative of divided_diff_1(f, a, b, y) in y."""
    _positive(a, b, y)
    gap = abs(a - b)
    if gap <= CLUSTER_REL * max(a, b):
        return float(f.c11(0.5 * (a + b), y))
    # c01(a, y) = c10(y, a) by symmetry of c.
    return float((f.c10(y, a) - f.c10(y, b)) / (a - b))


def divided_diff_11(f: MorozovaChentsovFunction, a: float, b: float, k: float, l: float) -> float:
    """Mixed divided difference: first argument over {a, b}, second over {k, l}."""
    _positive(a, b, k, l)
    if abs(k - l) <= CLUSTER_REL * max(k, l):
        return divided_diff_1_dy(f, a, b, 0.5 * (k + l))
    return float((divided_diff_1(f, a, b, k) - divided_diff_1(f, a, b, l)) / (k - l))


# ---------------------------------------------------------------------------
# Identity verification
# ---------------------------------------------------------------------------

IDENTITY_NAMES = (
    "symmetry",
    "homogeneity",
    "diagonal",
    "diagonal_derivative",
    "euler",
    "second_order",
    "euler_log",
)

IDENTITY_TOL = 1e-10


@dataclass
class IdentityReport:
    """Max relative residual of each algebraic identity over a sample set."""

    residuals: dict = field(default_factory=dict)
    tol: float = IDENTITY_TOL

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values()) if self.residuals else 0.0

    @property
    def violations(self):
        return {k: v for k, v in self.residuals.items() if v > self.tol}

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_identities(f: MorozovaChentsovFunction,
                      samples: Iterable[Sequence[float]],
                      homogeneity_scales=(0.5, 2.0, 10.0)) -> IdentityReport:
    """Check the defining identities of a Morozova-Chentsov function.

    Returns the worst relative residual per identity; violations above
    1e-10 are reported, not raised.
    """
    pts = np.asarray(list(samples), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise InvalidInput("samples must be pairs (x, y)")
    _positive(pts)
    x, y = pts[:, 0], pts[:, 1]
    c, c10, c20, lnc10 = f.c, f.c10, f.c20, f.lnc10

    def rel(res, scale):
        return float(np.max(np.abs(res) / np.maximum(np.abs(scale), 1e-300)))

    report = IdentityReport()
    cxy = c(x, y)
    report.residuals["symmetry"] = rel(cxy - c(y, x), cxy)
    hom = 0.0
    for t in homogeneity_scales:
        hom = max(hom, rel(cxy - t * c(t * x, t * y), cxy))
    report.residuals["homogeneity"] = hom
    report.residuals["diagonal"] = rel(c(x, x) - 1.0 / x, 1.0 / x)
    report.residuals["diagonal_derivative"] = rel(
        c10(x, x) + 0.5 / x**2, 0.5 / x**2)
    euler = cxy + x * c10(x, y) + y * c10(y, x)
    report.residuals["euler"] = rel(euler, cxy)
    lhs = 2 * x * c10(x, y) + x**2 * c20(x, y)
    rhs = 2 * y * c10(y, x) + y**2 * c20(y, x)
    # scale by the term magnitudes, not |lhs|: both sides can vanish identically
    scale = (np.abs(2 * x * c10(x, y)) + np.abs(x**2 * c20(x, y))
             + np.abs(2 * y * c10(y, x)) + np.abs(y**2 * c20(y, x)))
    report.residuals["second_order"] = rel(lhs - rhs, scale)
    report.residuals["euler_log"] = rel(
        1.0 + x * lnc10(x, y) + y * lnc10(y, x), 1.0)
    return report
