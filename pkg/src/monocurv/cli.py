"""Command-line surface: curvature evaluation, conjecture scans, grid data.

Exit codes: 0 success, 2 invalid input, 3 internal cross-check failure,
4 conjecture violation (a finding, not a bug).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import json
import sys
import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .conjecture import (
    RegionSampler,
    concavity_scan,
    hessian_minors,
    lemma4_check,
    monotonicity_scan,
)
from .errors import MonocurvError
from .geometry import (
    MetricContext,
    christoffel,
    metric,
    oracle_scalar,
    riemann,
    riemann_normalized,
    scalar_from_curvature,
    sectional,
)
from .mcfun import KUBO_MORI, LARGEST, SMALLEST, make_builtin
from .scalar import (
    HKernel,
    bures_scalar,
    kubo_mori_scalar,
    largest_scalar,
    largest_scalar_companion,
    normalize_scalar,
    scalar_theorem1,
)
from .states import DensityMatrix, TangentVector, decompose

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CROSSCHECK = 3
EXIT_VIOLATION = 4

_METRIC_ALIASES = {
    "bures": SMALLEST,
    "smallest": SMALLEST,
    "largest": LARGEST,
    "kubo-mori": KUBO_MORI,
}


@dataclass
class RunConfig:
    """Validated knobs shared by the subcommands."""

    metric: str = KUBO_MORI
    seed: int = 0
    tolerance: float = 1e-8
    region_lo: float = 1e-2
    region_hi: float = 1e2
    trials: int = 1_000_000
    paths: int = 1000
    steps: int = 50
    dimension: int = 3
    mesh: int = 100
    minor_grid: int = 60
    output: str | None = None
    deterministic: bool = False

    def __post_init__(self):
        if self.metric not in (SMALLEST, LARGEST, KUBO_MORI):
            raise MonocurvError(f"unknown metric: {self.metric}")
        if not (0.0 < self.region_lo < self.region_hi):
            raise MonocurvError("region bounds must satisfy 0 < lo < hi")
        if self.dimension < 2:
            raise MonocurvError("dimension must be at least 2")
        for name in ("trials", "paths", "steps", "mesh", "minor_grid"):
            if getattr(self, name) < 0:
                raise MonocurvError(f"{name} must be non-negative")
        if self.tolerance <= 0.0:
            raise MonocurvError("tolerance must be positive")


# ---------------------------------------------------------------------------
# Serialization helpers
# ---------------------------------------------------------------------------

def parse_spectrum(text: str) -> np.ndarray:
    """Comma-separated eigenvalues; fractions like 1/3 are parsed exactly."""
    vals = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            raise MonocurvError("empty spectrum entry")
        try:
            vals.append(float(Fraction(part)))
        except (ValueError, ZeroDivisionError) as exc:
            raise MonocurvError(f"bad spectrum entry {part!r}") from exc
    if any(v <= 0 for v in vals):
        raise MonocurvError("spectrum entries must be positive")
    return np.asarray(vals, dtype=float)


def matrix_to_json(m: np.ndarray) -> dict:
    """{"n": int, "re": row-major n x n, "im": row-major n x n}."""
    m = np.asarray(m, dtype=complex)
    return {"n": m.shape[0], "re": m.real.tolist(), "im": m.imag.tolist()}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        n = int(obj["n"])
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj["im"], dtype=float)
    except (KeyError, TypeError, ValueError) as exc:
        raise MonocurvError("matrix JSON needs fields n, re, im") from exc
    if re.shape != (n, n) or im.shape != (n, n):
        raise MonocurvError("matrix JSON arrays must be n x n")
    return re + 1j * im


def _load_json_arg(text: str):
    """Accept inline JSON or an @file / plain path reference."""
    text = text.strip()
    if text.startswith("@"):
        text = open(text[1:], "r", encoding="utf-8").read()
    elif not text.startswith(("{", "[")):
        text = open(text, "r", encoding="utf-8").read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise MonocurvError(f"bad JSON input: {exc}") from exc


def _emit(payload, output: str | None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if output:
        with open(output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text + "\n")
    else:
        print(text)


# ---------------------------------------------------------------------------
# scalar
# ---------------------------------------------------------------------------

def _closed_form_scalar(kind: str, lam: np.ndarray, path: str) -> float:
    if kind == SMALLEST:
        return bures_scalar(lam)
    if kind == LARGEST:
        if path == "companion":
            return largest_scalar_companion(lam)
        return largest_scalar(lam)
    return float(kubo_mori_scalar(lam))


def cmd_scalar(config: RunConfig, spectrum=None, state=None,
               path: str = "auto") -> dict:
    """Evaluate S and S1 for a spectrum or a density matrix."""
    if (spectrum is None) == (state is None):
        raise MonocurvError("give exactly one of --spectrum / --state")
    if state is not None:
        rho = DensityMatrix(state, normalized=True)
        lam = decompose(rho).eigenvalues
    else:
        lam = np.asarray(spectrum, dtype=float)
        total = float(lam.sum())
        if abs(total - 1.0) > 1e-9:
            raise MonocurvError(f"spectrum must sum to 1, got {total!r}")
    n = lam.size
    kernel = HKernel(make_builtin(config.metric))
    if path in ("auto", "closed-form", "companion"):
        s = _closed_form_scalar(config.metric, lam, path)
        used = "companion" if path == "companion" else "closed-form"
    elif path == "theorem1":
        s = scalar_theorem1(kernel, lam)
        used = "theorem1"
    elif path == "oracle":
        rho = DensityMatrix(np.diag(lam), normalized=True)
        s = oracle_scalar(MetricContext(kernel.c, rho))
        used = "oracle"
    else:
        raise MonocurvError(f"unknown evaluation path: {path}")

    reference = scalar_theorem1(kernel, lam) if used != "theorem1" else None
    residual = None
    if reference is not None:
        residual = abs(s - reference) / max(1.0, abs(reference))
        tol = config.tolerance if used != "oracle" else 1e-3
        if residual > tol:
            raise CrossCheckFailure(
                f"path {used} disagrees with triple-sum value: "
                f"{s!r} vs {reference!r} (residual {residual:.3e})")
    return {
        "metric": config.metric,
        "n": n,
        "spectrum": lam.tolist(),
        "path": used,
        "S": s,
        "S1": normalize_scalar(s, n),
        "crosscheck_residual": residual,
    }


class CrossCheckFailure(MonocurvError):
    """Two evaluation paths disagree beyond tolerance."""


# ---------------------------------------------------------------------------
# simplex-grid
# ---------------------------------------------------------------------------

def simplex_grid_rows(config: RunConfig):
    """Interior barycentric lattice i/m (i >= 1) plus the exact barycenter."""
    m = config.mesh
    if m < 3:
        raise MonocurvError("mesh must be at least 3")
    spectra = [np.array([i / m, j / m, (m - i - j) / m])
               for i in range(1, m - 1) for j in range(1, m - i)]
    spectra.append(np.array([1.0, 1.0, 1.0]) / 3.0)
    lam = np.asarray(spectra)
    if config.metric == KUBO_MORI:
        s1 = np.asarray(kubo_mori_scalar(lam, normalized=True))
    else:
        kernel = HKernel(make_builtin(config.metric))
        s1 = np.array([normalize_scalar(scalar_theorem1(kernel, row), 3)
                       for row in lam])
    return lam, s1


def cmd_simplex_grid(config: RunConfig) -> int:
    lam, s1 = simplex_grid_rows(config)
    out = (open(config.output, "w", encoding="utf-8", newline="")
           if config.output else sys.stdout)
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["lambda1", "lambda2", "lambda3", "scalar_curvature"])
        for row, val in zip(lam, s1):
            writer.writerow([repr(float(row[0])), repr(float(row[1])),
                             repr(float(row[2])), repr(float(val))])
    finally:
        if config.output:
            out.close()
    return EXIT_OK


# ---------------------------------------------------------------------------
# conjecture
# ---------------------------------------------------------------------------

def cmd_conjecture(config: RunConfig) -> tuple[dict, int]:
    """Run the evidence scans; exit 4 when a violation exceeds tolerance."""
    started = time.monotonic()
    report: dict = {"seed": config.seed}
    violated = False

    if config.trials > 0:
        sampler = RegionSampler(seed=config.seed, lo=config.region_lo,
                                hi=config.region_hi)
        crep = concavity_scan(sampler, config.trials)
        ok = crep.max_violation <= 1e-9 * crep.scale
        violated |= not ok
        report["concavity"] = {
            "trials": crep.trials,
            "max_violation": crep.max_violation,
            "scale": crep.scale,
            "worst": dataclasses.asdict(crep.worst),
            "ok": ok,
        }

    if config.minor_grid > 0:
        g = config.minor_grid
        axis = np.linspace(config.region_lo, config.region_hi, g)
        bad = 0
        worst = 0.0
        for x in axis:
            for y in axis:
                m1, m2, m3 = hessian_minors(float(x), float(y), 1.0)
                slack = 1e-7 * max(1.0, abs(m1), abs(m2), abs(m3))
                if m1 > slack or m2 < -slack or m3 > slack:
                    bad += 1
                    worst = max(worst, m1, -m2, m3)
        ok = bad == 0
        violated |= not ok
        report["hessian_minors"] = {
            "grid": g, "z": 1.0, "sign_violations": bad,
            "worst_excess": worst, "ok": ok,
        }

    if config.trials > 0:
        rng = np.random.default_rng((config.seed, 997))
        count = min(1000, config.trials, max(50, config.trials // 1000))
        draws = 10.0 ** rng.uniform(np.log10(config.region_lo),
                                    np.log10(config.region_hi), (count, 4))
        worst = np.inf
        for x, y, lam, mu in draws:
            x, y = min(x, y), max(x, y)
            if x == y:
                continue
            worst = min(worst, *lemma4_check(x, y, lam, mu))
        ok = worst >= -1e-7
        violated |= not ok
        report["mixing_derivative"] = {
            "draws": count, "min_value": worst, "ok": ok,
        }

    if config.paths > 0 and config.steps > 0:
        mrep = monotonicity_scan(n=config.dimension, paths=config.paths,
                                 steps_per_path=config.steps,
                                 seed=config.seed)
        ok = (mrep.decreases_beyond_tol == 0
              and mrep.global_max <= mrep.trace_state_value + 1e-6)
        violated |= not ok
        report["monotonicity"] = dataclasses.asdict(mrep) | {"ok": ok}

    if not config.deterministic:
        report["timestamp"] = datetime.datetime.now(
            datetime.timezone.utc).isoformat()
        report["wall_time_s"] = time.monotonic() - started
    return report, (EXIT_VIOLATION if violated else EXIT_OK)


# ---------------------------------------------------------------------------
# curvature
# ---------------------------------------------------------------------------

def cmd_curvature(config: RunConfig, state, vectors,
                  quantity: str, normalized: bool) -> dict:
    rho = DensityMatrix(state, normalized=True)
    ctx = MetricContext(make_builtin(config.metric), rho)
    vecs = [TangentVector(v) for v in vectors]
    out = {"metric": config.metric, "n": rho.n, "quantity": quantity,
           "normalized": normalized}
    if quantity == "metric":
        if len(vecs) != 2:
            raise MonocurvError("metric needs exactly 2 tangent vectors")
        out["value"] = metric(ctx, vecs[0], vecs[1])
    elif quantity == "christoffel":
        if len(vecs) != 2:
            raise MonocurvError("christoffel needs exactly 2 tangent vectors")
        out["value"] = matrix_to_json(christoffel(ctx, vecs[0], vecs[1]).entries)
    elif quantity == "riemann":
        if len(vecs) != 4:
            raise MonocurvError("riemann needs exactly 4 tangent vectors")
        fn = riemann_normalized if normalized else riemann
        out["value"] = fn(ctx, *vecs)
    elif quantity == "sectional":
        if len(vecs) != 2:
            raise MonocurvError("sectional needs exactly 2 tangent vectors")
        out["value"] = sectional(ctx, vecs[0], vecs[1], normalized=normalized)
    elif quantity == "scalar":
        if vecs:
            raise MonocurvError("scalar takes no tangent vectors")
        out["value"] = scalar_from_curvature(ctx, normalized=normalized)
    else:
        raise MonocurvError(f"unknown quantity: {quantity}")
    return out


# ---------------------------------------------------------------------------
# argument parsing / dispatch
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--metric", default="kubo-mori",
                   choices=sorted(_METRIC_ALIASES))
    p.add_argument("--tolerance", type=float, default=1e-8)
    p.add_argument("--output", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="monocurv",
        description="Curvature of monotone metrics on density matrices.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scalar", help="scalar curvature of a state/spectrum")
    _add_common(p)
    p.add_argument("--spectrum", help="comma-separated eigenvalues, e.g. 1/3,1/3,1/3")
    p.add_argument("--state", help="density matrix as JSON or a file path")
    p.add_argument("--path", default="auto",
                   choices=["auto", "closed-form", "companion", "theorem1",
                            "oracle"])

    p = sub.add_parser("simplex-grid", help="CSV of S1 over the n=3 simplex")
    _add_common(p)
    p.add_argument("--mesh", type=int, default=100)

    p = sub.add_parser("conjecture", help="run the conjecture evidence scans")
    _add_common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--paths", type=int, default=1000)
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--dimension", type=int, default=3)
    p.add_argument("--minor-grid", type=int, default=60)
    p.add_argument("--region-lo", type=float, default=1e-2)
    p.add_argument("--region-hi", type=float, default=1e2)
    p.add_argument("--deterministic", action="store_true")

    p = sub.add_parser("curvature", help="metric/Christoffel/Riemann values")
    _add_common(p)
    p.add_argument("--state", required=True)
    p.add_argument("--vector", action="append", default=[],
                   help="tangent vector as JSON or a file path (repeatable)")
    p.add_argument("--quantity", default="sectional",
                   choices=["metric", "christoffel", "riemann", "sectional",
                            "scalar"])
    p.add_argument("--normalized", action="store_true")
    return parser


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig(metric=_METRIC_ALIASES[args.metric],
                    tolerance=args.tolerance, output=args.output)
    for name in ("seed", "trials", "paths", "steps", "mesh", "minor_grid",
                 "region_lo", "region_hi", "deterministic"):
        if hasattr(args, name):
            setattr(cfg, name, getattr(args, name))
    if getattr(args, "dimension", None) is not None:
        cfg.dimension = args.dimension
    cfg.__post_init__()
    return cfg


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = _config_from_args(args)
        if args.command == "scalar":
            spectrum = parse_spectrum(args.spectrum) if args.spectrum else None
            state = (matrix_from_json(_load_json_arg(args.state))
                     if args.state else None)
            report = cmd_scalar(cfg, spectrum=spectrum, state=state,
                                path=args.path)
            _emit(report, cfg.output)
            return EXIT_OK
        if args.command == "simplex-grid":
            return cmd_simplex_grid(cfg)
        if args.command == "conjecture":
            report, code = cmd_conjecture(cfg)
            _emit(report, cfg.output)
            return code
        if args.command == "curvature":
            state = matrix_from_json(_load_json_arg(args.state))
            vectors = [matrix_from_json(_load_json_arg(v))
                       for v in args.vector]
            report = cmd_curvature(cfg, state, vectors, args.quantity,
                                   args.normalized)
            _emit(report, cfg.output)
            return EXIT_OK
        raise MonocurvError(f"unknown command: {args.command}")
    except CrossCheckFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CROSSCHECK
    except (MonocurvError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
