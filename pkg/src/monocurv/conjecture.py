"""Numerical evidence suite for monotonicity of the Kubo-Mori scalar
curvature under the majorization ("more mixed") order.

The central object is the symmetrized triple kernel h_s; its conjectured
concavity implies the monotonicity.  Nothing here is a proof: the scans
report violations with full provenance so a reproducible counterexample
can be distinguished from numerical noise.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import (InvalidInput, LengthMismatch, OrderViolation,
                     SumMismatch)
from .mcfun import KUBO_MORI, make_builtin
from .scalar import HKernel, kubo_mori_scalar

_FD_STEP1 = np.finfo(float).eps ** (1.0 / 3.0)   # first derivatives
_FD_STEP2 = np.finfo(float).eps ** 0.25          # second derivatives


def _thread_count() -> int:
    raw = os.environ.get("MONOCURV_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


@dataclass(frozen=True)
class SymmetrizedKernel:
    """The fully symmetric kernel h_s and its first partial derivative.

    For Kubo-Mori the cheaper reduced kernel d is symmetrized (it has the
    same symmetrization as h); for other metrics h itself is used.
    """

    kernel: HKernel

    def h_s(self, x, y, z):
        f = self.kernel.d if self.kernel.c.kind == KUBO_MORI else self.kernel.h
        return (f(x, y, z) + f(y, z, x) + f(z, x, y)) / 3.0

    def h_s_dx(self, x, y, z):
        """d h_s / dx by central differences with one Richardson level."""
        h = _FD_STEP1 * np.maximum(np.asarray(x, dtype=float), 1.0)

        def central(hh):
            return (self.h_s(x + hh, y, z) - self.h_s(x - hh, y, z)) / (2 * hh)

        return (4.0 * central(h / 2) - central(h)) / 3.0


def kubo_mori_hs_closed_form(x, y, z):
    """Literal closed form of the Kubo-Mori h_s; valid only at triples with
    pairwise distinct entries (the stable route is SymmetrizedKernel.h_s)."""
    x, y, z = (np.asarray(a, dtype=float) for a in (x, y, z))
    lx, ly, lz = np.log(x), np.log(y), np.log(z)
    num1 = ((y - z) ** 2 * (lx - ly) * (lx - lz)
            - (x - z) ** 2 * (lx - ly) * (ly - lz)
            + (x - y) ** 2 * (lx - lz) * (ly - lz))
    den1 = 6.0 * (x - y) * (x - z) * (y - z) * (lx - ly) * (lx - lz) * (ly - lz)
    num2 = -x * y * (lx - ly) + x * z * (lx - lz) - y * z * (ly - lz)
    den2 = 3.0 * x * y * z * (lx - ly) * (lx - lz) * (ly - lz)
    out = num1 / den1 + num2 / den2
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Majorization order and mixing steps
# ---------------------------------------------------------------------------

SUM_ATOL = 1e-10


def majorizes(sigma_more_mixed, sigma_less_mixed) -> bool:
    """True iff the first spectrum is more mixed than the second."""
    a = np.asarray(sigma_more_mixed, dtype=float)
    b = np.asarray(sigma_less_mixed, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise LengthMismatch(f"spectra have shapes {a.shape} and {b.shape}")
    if np.any(a <= 0) or np.any(b <= 0):
        raise InvalidInput("spectra must be positive")
    total = a.sum()
    if abs(total - b.sum()) > SUM_ATOL * max(1.0, abs(total)):
        raise SumMismatch(f"sums differ: {total} vs {b.sum()}")
    pa = np.cumsum(np.sort(a)[::-1])
    pb = np.cumsum(np.sort(b)[::-1])
    return bool(np.all(pa <= pb + 1e-12 * max(1.0, abs(total))))


@dataclass(frozen=True)
class MixingStep:
    """One T-transform: average entries i and j with weight t.

    t and 1-t give the same transform up to a swap, so t is canonicalized
    into [0, 1/2].
    """

    i: int
    j: int
    t: float

    def __post_init__(self):
        if not 0.0 <= self.t <= 1.0:
            raise InvalidInput(f"t = {self.t} outside [0, 1]")
        if self.t > 0.5:
            object.__setattr__(self, "t", 1.0 - self.t)
        if self.i == self.j:
            raise InvalidInput("mixing step needs two distinct indices")


def t_transform(spectrum, step: MixingStep) -> np.ndarray:
    """Apply one mixing step; the result majorizes the input."""
    lam = np.asarray(spectrum, dtype=float).copy()
    n = lam.size
    if not (0 <= step.i < n and 0 <= step.j < n):
        raise InvalidInput(f"indices ({step.i}, {step.j}) out of range for n={n}")
    x, y = lam[step.i], lam[step.j]
    lam[step.i] = (1.0 - step.t) * x + step.t * y
    lam[step.j] = step.t * x + (1.0 - step.t) * y
    return lam


# ---------------------------------------------------------------------------
# Lemma-level inequality checks
# ---------------------------------------------------------------------------

def _km_sym() -> SymmetrizedKernel:
    return SymmetrizedKernel(HKernel(make_builtin(KUBO_MORI)))


def lemma4_check(x: float, y: float, lam: float, mu: float):
    """The four h_s' inequalities implied by concavity, as left-minus-right
    values (all expected >= 0 for x < y)."""
    if not x < y:
        raise OrderViolation(f"need x < y, got x={x}, y={y}")
    ds = _km_sym().h_s_dx
    r1 = 2 * ds(x, x, y) - ds(y, x, x) - 2 * ds(y, x, y) + ds(x, y, y)
    r2 = ds(x, x, lam) - ds(y, y, lam)
    r3 = ds(x, y, lam) - ds(y, x, lam)
    r4 = ds(x, lam, mu) - ds(y, lam, mu)
    return float(r1), float(r2), float(r3), float(r4)


def hessian_minors(x: float, y: float, z: float):
    """Leading principal minors (M1, M2, M3) of the Hessian of h_s.

    Concavity corresponds to the sign pattern M1 <= 0, M2 >= 0, M3 <= 0.
    """
    sk = _km_sym()
    p = np.array([x, y, z], dtype=float)
    if np.any(p <= 0):
        raise InvalidInput("arguments must be positive")
    steps = _FD_STEP2 * p

    def f(q):
        return sk.h_s(q[0], q[1], q[2])

    def second(i, j, hh_i, hh_j):
        ei = np.zeros(3)
        ej = np.zeros(3)
        ei[i] = hh_i
        ej[j] = hh_j
        if i == j:
            return (f(p + ei) - 2.0 * f(p) + f(p - ei)) / hh_i**2
        return (f(p + ei + ej) - f(p + ei - ej) - f(p - ei + ej)
                + f(p - ei - ej)) / (4.0 * hh_i * hh_j)

    hess = np.empty((3, 3))
    for i in range(3):
        for j in range(i, 3):
            coarse = second(i, j, steps[i], steps[j])
            fine = second(i, j, steps[i] / 2, steps[j] / 2)
            hess[i, j] = hess[j, i] = (4.0 * fine - coarse) / 3.0

    m1 = hess[0, 0]
    m2 = float(np.linalg.det(hess[:2, :2]))
    m3 = float(np.linalg.det(hess))
    return float(m1), m2, m3


# ---------------------------------------------------------------------------
# Randomized scans
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionSampler:
    """Log-uniform sampler over a coordinate box, with a fixed fraction of
    draws forced to have one near-coincident coordinate pair."""

    seed: int
    lo: float = 1e-2
    hi: float = 1e2
    near_fraction: float = 0.05
    near_gap: float = 1e-5

    def draw(self, count: int, stream: int = 0):
        rng = np.random.default_rng((self.seed, stream))
        lg_lo, lg_hi = math.log10(self.lo), math.log10(self.hi)
        p1 = 10.0 ** rng.uniform(lg_lo, lg_hi, (count, 3))
        p2 = 10.0 ** rng.uniform(lg_lo, lg_hi, (count, 3))
        t = rng.uniform(0.0, 1.0, count)
        k = int(round(count * self.near_fraction))
        for p in (p1, p2):
            if k == 0:
                break
            rows = np.arange(k)
            src = rng.integers(0, 3, k)
            dst = (src + 1 + rng.integers(0, 2, k)) % 3
            factor = 1.0 + self.near_gap * rng.uniform(-1.0, 1.0, k)
            p[rows, dst] = p[rows, src] * factor
        return p1, p2, t


@dataclass(frozen=True)
class ScanWorst:
    trial: int
    p1: tuple
    p2: tuple
    t: float
    value: float


@dataclass(frozen=True)
class ConcavityReport:
    trials: int
    seed: int
    max_violation: float
    worst: ScanWorst
    scale: float


def concavity_scan(sampler: RegionSampler, trials: int,
                   chunk_size: int = 100_000) -> ConcavityReport:
    """Test (1-t) h_s(P1) + t h_s(P2) <= h_s((1-t) P1 + t P2) on random
    segments.  Positive reported values are concavity violations."""
    if trials < 1:
        raise InvalidInput("trials must be at least 1")
    sk = _km_sym()
    chunks = [(i, min(chunk_size, trials - i * chunk_size))
              for i in range((trials + chunk_size - 1) // chunk_size)]

    def run(chunk):
        idx, count = chunk
        p1, p2, t = sampler.draw(count, stream=idx)
        hs = lambda p: sk.h_s(p[:, 0], p[:, 1], p[:, 2])
        mid = (1.0 - t)[:, None] * p1 + t[:, None] * p2
        gap = (1.0 - t) * hs(p1) + t * hs(p2) - hs(mid)
        scale = np.max(np.abs(hs(mid)))
        j = int(np.argmax(gap))
        worst = ScanWorst(idx * chunk_size + j, tuple(p1[j]), tuple(p2[j]),
                          float(t[j]), float(gap[j]))
        return worst, float(scale)

    threads = _thread_count()
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, chunks))
    else:
        results = [run(c) for c in chunks]

    worst = max((w for w, _ in results), key=lambda w: w.value)
    scale = max(s for _, s in results)
    return ConcavityReport(trials, sampler.seed, worst.value, worst, scale)


@dataclass(frozen=True)
class MonotonicityReport:
    n: int
    paths: int
    steps_per_path: int
    seed: int
    max_decrease: float          # most negative single-step change of S1
    global_max: float
    trace_state_value: float
    decreases_beyond_tol: int
    tol: float = 1e-8


def monotonicity_scan(n: int, paths: int, steps_per_path: int,
                      seed: int = 0) -> MonotonicityReport:
    """Follow random T-transform mixing paths and check the Kubo-Mori S1
    never decreases (beyond tolerance) and never exceeds the trace state."""
    if n < 2:
        raise InvalidInput("dimension must be at least 2")
    rng = np.random.default_rng(seed)
    lam = 10.0 ** rng.uniform(-2.0, 0.0, (paths, n))
    lam /= lam.sum(axis=1, keepdims=True)

    s = np.asarray(kubo_mori_scalar(lam, normalized=True))
    global_max = float(np.max(s))
    max_decrease = 0.0
    beyond = 0
    tol = 1e-8
    rows = np.arange(paths)
    for _ in range(steps_per_path):
        i = rng.integers(0, n, paths)
        j = (i + 1 + rng.integers(0, n - 1, paths)) % n
        t = rng.uniform(0.0, 0.5, paths)
        xi, xj = lam[rows, i], lam[rows, j]
        lam[rows, i] = (1.0 - t) * xi + t * xj
        lam[rows, j] = t * xi + (1.0 - t) * xj
        s_new = np.asarray(kubo_mori_scalar(lam, normalized=True))
        delta = s_new - s
        max_decrease = min(max_decrease, float(np.min(delta)))
        beyond += int(np.sum(delta < -tol))
        global_max = max(global_max, float(np.max(s_new)))
        s = s_new
    trace_val = (n**2 - 1) * (n**2 - 4) / 8.0
    return MonotonicityReport(n, paths, steps_per_path, seed, max_decrease,
                              global_max, trace_val, beyond, tol)


def directional_derivative_check(x: float, y: float, lambdas):
    """(1/3)(d/dx - d/dy) of the Kubo-Mori S1 at (x, y, tail), via the
    h_s' expansion and independently via finite differences of the closed
    form.  Returns (expansion_value, finite_difference_value)."""
    if not x < y:
        raise OrderViolation(f"need x < y, got x={x}, y={y}")
    tail = np.asarray(lambdas, dtype=float)
    if np.any(tail <= 0) or x <= 0:
        raise InvalidInput("all eigenvalues must be positive")
    ds = _km_sym().h_s_dx

    val = (2 * ds(x, x, y) - ds(y, x, x) - 2 * ds(y, x, y) + ds(x, y, y))
    for li in tail:
        val += 2 * (ds(x, x, li) - ds(y, y, li) + ds(x, y, li) - ds(y, x, li))
    for li in tail:
        for lj in tail:
            val += ds(x, li, lj) - ds(y, li, lj)

    def s1(hh):
        spec = np.concatenate(([x + hh, y - hh], tail))
        return kubo_mori_scalar(spec, normalized=True)

    h = _FD_STEP1 * max(1.0, x, y)

    def central(hh):
        return (s1(hh) - s1(-hh)) / (2 * hh)

    fd = (4.0 * central(h / 2) - central(h)) / (3.0 * 3.0)
    return float(val), float(fd)
