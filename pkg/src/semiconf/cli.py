"""``conf`` command line: check, factor, decompose, fit and grid jobs.

A job comes from a JSON file (``--job``), from flags, or both; flags win.
Every command prints a JSON report on standard output.  Exit status is 0
when the report passes, 1 when a numerical check fails and 2 when the job
never reached the numerical checks (bad flags, syntax or domain errors).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .conformal import check_equivalence, liouville_fit, scaling_check
from .core import Signature
from .diffops import CARTESIAN, NULL, SmoothMap, default_vars
from .errors import ExprSyntaxError, SemiconfError
from .expr import ScalarExpr
from .minkowski2 import (NullRectangle, bounding_null_rectangle, build_map_from_pair,
                         dalembert_decompose, factor_map, null_line_check)
from .svg import render_grid

MARGIN = 0.01
QUASI_RANDOM = 32

PRESETS = {
    "compactification": {"signature": {"n": 2, "nu": 1}, "frame": NULL,
                         "components": ["2/pi*atan(u)", "2/pi*atan(v)"],
                         "region": [[-50, 50], [-50, 50]]},
    "swap": {"signature": {"n": 2, "nu": 1}, "frame": CARTESIAN,
             "components": ["t", "x"], "region": [[-1, 1], [-1, 1]]},
    "identity": {"signature": {"n": 2, "nu": 1}, "frame": NULL,
                 "components": ["u", "v"], "region": [[-1, 1], [-1, 1]]},
    "rectangle": {"signature": {"n": 2, "nu": 1}, "frame": NULL,
                  "components": ["u + 2", "2*v + 2"], "region": [[-1, 1], [-1, 1]]},
}


class UsageError(Exception):
    pass


@dataclass
class JobSpec:
    signature: Signature
    frame: str
    components: list
    region: list
    grid: int = 17
    tolerance: float = 1e-8
    vars: list | None = None
    preset: str | None = None
    samples: list | None = None
    options: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = {"signature": self.signature.to_dict(), "frame": self.frame,
             "components": list(self.components), "region": [list(r) for r in self.region],
             "grid": self.grid, "tolerance": self.tolerance}
        if self.vars is not None:
            d["vars"] = list(self.vars)
        if self.preset is not None:
            d["preset"] = self.preset
        if self.samples is not None:
            d["samples"] = self.samples
        if self.options:
            d["options"] = self.options
        return d

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _parse_sig(text: str) -> dict:
    try:
        n, nu = (int(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"--sig expects N,NU, got {text!r}") from None
    return {"n": n, "nu": nu}


def _parse_region(items) -> list:
    out = []
    for item in items:
        try:
            lo, hi = (float(p) for p in item.strip().split(":"))
        except ValueError:
            raise UsageError(f"--region expects LO:HI, got {item.strip()!r}") from None
        out.append([lo, hi])
    return out


def build_job(args) -> JobSpec:
    data = {}
    if args.job:
        try:
            with open(args.job) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read job file {args.job}: {exc}") from None
    preset = args.preset or data.get("preset")
    if preset is not None:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}")
        data = {**PRESETS[preset], **data, "preset": preset}

    if args.sig:
        data["signature"] = _parse_sig(args.sig)
    if args.frame:
        data["frame"] = args.frame
    if args.comp:
        data["components"] = [c.strip() for c in args.comp]
    if args.region:
        data["region"] = _parse_region(args.region)
    if args.grid is not None:
        data["grid"] = args.grid
    if args.tol is not None:
        data["tolerance"] = args.tol
    if args.vars:
        data["vars"] = [v.strip() for v in args.vars.split(",")]
    if args.samples:
        try:
            with open(args.samples) as fh:
                data["samples"] = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read samples file {args.samples}: {exc}") from None

    try:
        sig = Signature.from_dict(data["signature"])
    except KeyError:
        raise UsageError("job needs a signature (--sig N,NU)") from None
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad signature: {exc}") from None
    frame = data.get("frame", CARTESIAN)
    if frame not in (CARTESIAN, NULL):
        raise UsageError(f"unknown frame {frame!r}")
    comps = list(data.get("components", []))
    region = data.get("region") or [[-1.0, 1.0]] * sig.n
    if len(region) == 1 and sig.n > 1:
        region = region * sig.n
    region = [[float(lo), float(hi)] for lo, hi in region]
    for lo, hi in region:
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise UsageError(f"region bounds must be finite with lo < hi, got {lo}:{hi}")
    if len(region) != sig.n:
        raise UsageError(f"region needs {sig.n} intervals, got {len(region)}")
    grid = int(data.get("grid", 17))
    if grid < 2:
        raise UsageError("grid needs at least 2 samples per axis")
    tol = float(data.get("tolerance", 1e-8))
    if not tol > 0:
        raise UsageError("tolerance must be positive")
    return JobSpec(sig, frame, comps, region, grid, tol, data.get("vars"), preset,
                   data.get("samples"), data.get("options", {}))


def build_map(job: JobSpec) -> SmoothMap:
    if len(job.components) != job.signature.n:
        raise UsageError(f"{len(job.components)} components for dimension {job.signature.n}")
    try:
        return SmoothMap.from_strings(job.signature, job.components, job.frame, job.vars)
    except ValueError as exc:
        if isinstance(exc, SemiconfError):
            raise
        raise UsageError(str(exc)) from None


def region_grid(region, k: int, margin: float = MARGIN) -> np.ndarray:
    axes = []
    for lo, hi in region:
        w = hi - lo
        axes.append(np.linspace(lo + margin * w, hi - margin * w, k))
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.column_stack([m.ravel() for m in mesh])


def quasi_random(region, count: int = QUASI_RANDOM, margin: float = MARGIN) -> np.ndarray:
    from scipy.stats import qmc

    n = len(region)
    unit = qmc.Halton(d=n, scramble=False).random(count + 1)[1:]
    lo = np.array([r[0] for r in region])
    hi = np.array([r[1] for r in region])
    w = hi - lo
    return lo + margin * w + unit * (1 - 2 * margin) * w


def sample_points(F: SmoothMap, job: JobSpec, k: int | None = None):
    """Grid plus quasi-random points of the region, minus points outside F's domain."""
    pts = np.vstack([region_grid(job.region, k or job.grid), quasi_random(job.region)])
    G = F.to_cartesian()
    _, _, _, fail = G.jets(F.source_to_cartesian(pts))
    keep = fail < 0
    return pts[keep], int((~keep).sum())


def _check(name, passed, residual, witness=None, details=None) -> dict:
    d = {"name": name, "pass": bool(passed), "residual": float(residual)}
    if witness is not None:
        d["witness"] = witness
    if details is not None:
        d["details"] = details
    return d


def _report(command: str, job: JobSpec | None, checks, reason=None, error=None) -> dict:
    report = {"version": __version__, "command": command,
              "job": job.to_dict() if job is not None else None,
              "checks": checks,
              "pass": bool(checks) and all(c["pass"] for c in checks) and error is None}
    if not report["pass"] and reason:
        report["reason"] = reason
    if error is not None:
        report["error"] = error
    return report


# commands


def cmd_check(job: JobSpec) -> dict:
    F = build_map(job)
    pts, excluded = sample_points(F, job)
    if len(pts) == 0:
        raise UsageError("no sample point lies in the map's domain")
    tol = job.tolerance
    equiv = check_equivalence(F, pts, tol)
    sweep, probes = equiv.jacobian, equiv.probes
    checks = []
    reasons = []

    k = sweep.worst()
    verdict = sweep.verdict(k)
    checks.append(_check("jacobian", sweep.conformal.all(), sweep.residual.max(),
                         verdict.witness.to_dict() if verdict.witness else None,
                         {"factor_min": float(sweep.factor.min()),
                          "factor_max": float(sweep.factor.max()),
                          "anti_signature": bool(sweep.anti_signature.all()),
                          "samples": len(pts), "excluded_samples": excluded}))
    if not sweep.conformal.all():
        if sweep.anti_signature.all():
            reasons.append("anti-conformal (λ<0)")
        elif sweep.singular.any():
            reasons.append("singular Jacobian")
        else:
            reasons.append("not conformal (JᵀηJ not proportional to η)")

    checks.append(_check("probe_suite", probes.suite_pass, probes.max_residual, None,
                         probes.to_dict()["probes"]))
    if not probes.suite_pass:
        failing = [r.id for r in probes.probes if not r.passed]
        reasons.append("harmonic probe failed: " + ", ".join(failing))

    lengths = _gradient_gap(F, pts)
    grad_witness = None
    if not probes.gradient_condition:
        j = int(np.flatnonzero(~probes.gradient_ok)[0])
        grad_witness = {"point": [float(c) for c in pts[j]],
                        "reason": "eta(grad y1, grad y1) <= eta(grad yn, grad yn)"}
        reasons.append("gradient condition violated")
    checks.append(_check("gradient_condition", probes.gradient_condition,
                         max(0.0, float(-lengths.min())) if len(lengths) else 0.0, grad_witness))

    checks.append(_check("equivalence", equiv.all_agree or not equiv.expected_agreement,
                         float((~equiv.agree).mean()), None, equiv.to_dict()))
    if not equiv.all_agree and equiv.expected_agreement:
        reasons.append("probe and Jacobian routes disagree")

    if F.frame == NULL:
        rect = NullRectangle(*job.region[0], *job.region[1])
        lines = null_line_check(F, rect, tol)
        checks.append(_check("null_lines", lines.passed,
                             max(lines.u_line_spread, lines.v_line_spread), None,
                             lines.to_dict()))
        if not lines.passed:
            reasons.append("null lines not preserved")
    return _report("check", job, checks, "; ".join(reasons))


def _gradient_gap(F, pts):
    if not F.sig_out.indefinite:
        return np.ones(len(pts))
    G = F.to_cartesian()
    _, jac, _, _ = G.jets(F.source_to_cartesian(pts))
    lengths = np.einsum("pji,i->pj", jac ** 2, F.sig_in.signs)
    return lengths[:, 0] - lengths[:, -1]


def _require_null_2d(job: JobSpec, what: str):
    if (job.signature.n, job.signature.nu) != (2, 1):
        raise UsageError(f"{what} needs signature 2,1")


def cmd_factor(job: JobSpec) -> dict:
    _require_null_2d(job, "factor")
    if job.frame != NULL:
        raise UsageError("factor needs --frame null")
    F = build_map(job)
    rect = NullRectangle(*job.region[0], *job.region[1])
    try:
        pair = factor_map(F, rect, job.tolerance, job.grid)
    except SemiconfError as exc:
        witness = None
        verdict = getattr(exc, "verdict", None)
        if verdict is not None and verdict.witness is not None:
            witness = verdict.witness.to_dict()
        check = _check("factorization", False, float("nan"), witness,
                       {"error": type(exc).__name__, "message": str(exc)})
        check["residual"] = None
        return _report("factor", job, [check], f"{type(exc).__name__}: {exc}")
    pts = rect.grid(job.grid)
    rebuilt = build_map_from_pair(pair)
    err = float(np.abs(rebuilt.image(pts) - F.image(pts)).max())
    us, vs = rect.axes(job.grid)
    psi_args, chi_args = (us, vs) if pair.branch.value == "direct" else (vs, us)
    details = pair.to_dict()
    details["psi_table"] = [[float(a), float(b)]
                            for a, b in zip(psi_args, pair.psi.values(psi_args[:, None]))]
    details["chi_table"] = [[float(a), float(b)]
                            for a, b in zip(chi_args, pair.chi.values(chi_args[:, None]))]
    return _report("factor", job, [_check("factorization", True, err, None, details)])


def cmd_decompose(job: JobSpec) -> dict:
    _require_null_2d(job, "decompose")
    if not 1 <= len(job.components) <= 2:
        raise UsageError("decompose takes one or two component expressions")
    vars_ = tuple(job.vars) if job.vars else default_vars(job.signature, CARTESIAN)
    exprs = [ScalarExpr.parse(c, vars_) for c in job.components]
    if job.frame == NULL:
        rect = NullRectangle(*job.region[0], *job.region[1])
    else:
        (x0, x1), (t0, t1) = job.region
        rect = bounding_null_rectangle([[x0, t0], [x0, t1], [x1, t0], [x1, t1]])
    checks = []
    reasons = []
    for name, X in zip(("X", "T"), exprs):
        try:
            split = dalembert_decompose(X, rect, job.tolerance)
        except SemiconfError as exc:
            if type(exc).__name__ != "NotWaveSolution":
                raise
            checks.append({**_check(f"decompose:{name}", False, exc.residual,
                                    {"point": [float(c) for c in exc.point],
                                     "reason": "not a wave solution"})})
            reasons.append(f"{name} is not a wave solution")
            continue
        details = split.to_dict()
        details.update(split.tables(rect, job.grid))
        checks.append(_check(f"decompose:{name}", split.reconstruction_error <= job.tolerance,
                             split.reconstruction_error, None, details))
    return _report("decompose", job, checks, "; ".join(reasons))


def _fit_samples(job: JobSpec):
    raw = job.samples
    if isinstance(raw, dict):
        raw = raw.get("samples", [])
    pairs = []
    for item in raw:
        if isinstance(item, dict):
            pairs.append((item["x"], item["y"]))
        else:
            pairs.append((item[0], item[1]))
    return pairs


def cmd_fit(job: JobSpec) -> dict:
    F = None
    if job.samples is not None:
        pairs = _fit_samples(job)
    else:
        F = build_map(job)
        pts, _ = sample_points(F, job, k=min(job.grid, 5))
        pairs = list(zip(pts, F.image(pts)))
    try:
        model = liouville_fit(pairs, job.signature, job.tolerance)
    except SemiconfError as exc:
        residual = getattr(exc, "residual", None)
        check = _check("liouville_fit", False, 0.0, None,
                       {"error": type(exc).__name__, "message": str(exc)})
        check["residual"] = residual if residual is None or math.isfinite(residual) else None
        return _report("fit", job, [check], f"{type(exc).__name__}: {exc}")
    checks = [_check("liouville_fit", True, max(model.fit_residual, model.orthogonality_residual),
                     None, model.to_dict())]
    if F is not None:
        names = tuple(f"y{i}" for i in range(1, job.signature.n + 1))
        scal = scaling_check(F, ScalarExpr.parse("y1^2", names), pts, job.tolerance, model)
        checks.append(_check("scaling", scal.passed, scal.max_deviation, None, scal.to_dict()))
    return _report("fit", job, checks)


def cmd_grid(job: JobSpec, out_path: str | None) -> tuple:
    if job.signature.n != 2:
        raise UsageError("grid needs a two-dimensional map")
    F = build_map(job)
    box = [[lo + MARGIN * (hi - lo), hi - MARGIN * (hi - lo)] for lo, hi in job.region]
    meta = {"job_hash": job.digest(), "version": __version__}
    svg, info = render_grid(F, box, lines=job.grid, diamond=job.preset == "compactification",
                            metadata=meta)
    if out_path:
        _atomic_write(out_path, svg)
    check = _check("grid", True, 0.0, None,
                   {"output": out_path, "polylines": info["polylines"],
                    "excluded_samples": info["excluded_samples"]})
    return _report("grid", job, [check]), svg


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".conf-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# output


def _finite(obj, path, bad):
    """Copy of ``obj`` with non-finite floats replaced by None; paths go to ``bad``."""
    if isinstance(obj, dict):
        return {k: _finite(v, f"{path}/{k}", bad) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v, f"{path}/{i}", bad) for i, v in enumerate(obj)]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            bad.append(path)
            return None
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def finalize(report: dict) -> dict:
    bad = []
    clean = _finite(report, "", bad)
    if bad:
        clean["pass"] = False
        clean["checks"].append({"name": "finite_output", "pass": False, "residual": 0.0,
                                "witness": {"point": [], "reason": "non-finite values at "
                                            + ", ".join(bad)}})
        clean["reason"] = "; ".join(r for r in (clean.get("reason"), "non-finite value in report")
                                    if r)
    return clean


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=False, allow_nan=False) + "\n"


# entry point

def _protect_negative_values(argv):
    # argparse reads "-50:50" or "-t" after --region/--comp as an option flag
    out = []
    in_values = False
    for tok in argv:
        if tok.startswith("--"):
            in_values = tok in ("--region", "--comp")
        elif in_values and tok.startswith("-") and tok != "-h":
            tok = " " + tok
        out.append(tok)
    return out


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="conf", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in [("check", "verify conformality on a sample grid"),
                            ("factor", "recover the monotone pair of a null-frame map"),
                            ("decompose", "split wave solutions into f(x+t) + g(x-t)"),
                            ("fit", "fit y = alpha A x + b with A eta-orthogonal"),
                            ("grid", "render the image of a null grid as SVG")]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--job", help="JSON job file")
        p.add_argument("--preset", choices=sorted(PRESETS))
        p.add_argument("--sig", help="signature as N,NU")
        p.add_argument("--frame", choices=[CARTESIAN, NULL])
        p.add_argument("--comp", nargs="+", action="extend",
                       help="component expressions (prefix a leading '-' with a space)")
        p.add_argument("--vars", help="comma-separated source coordinate names")
        p.add_argument("--region", nargs="+", help="LO:HI per coordinate")
        p.add_argument("--grid", type=int, help="samples per axis (default 17)")
        p.add_argument("--tol", type=float, help="tolerance (default 1e-8)")
        p.add_argument("--samples", help="JSON file of (x, y) pairs for fit")
        p.add_argument("--out", help="output path (grid)")
    return parser


def run(argv=None) -> tuple:
    """Run a command; returns ``(exit_code, report_dict, svg_or_None)``."""
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = make_parser()
    try:
        args = parser.parse_args(_protect_negative_values(argv))
    except SystemExit as exc:
        return int(exc.code or 0), None, None
    job = None
    svg = None
    try:
        job = build_job(args)
        if args.command == "check":
            report = cmd_check(job)
        elif args.command == "factor":
            report = cmd_factor(job)
        elif args.command == "decompose":
            report = cmd_decompose(job)
        elif args.command == "fit":
            report = cmd_fit(job)
        else:
            report, svg = cmd_grid(job, args.out)
    except (UsageError, SemiconfError, OSError) as exc:
        error = {"type": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, ExprSyntaxError):
            error["offset"] = exc.offset
        report = _report(args.command, job, [], f"{type(exc).__name__}: {exc}", error)
        return 2, finalize(report), None
    report = finalize(report)
    return (0 if report["pass"] else 1), report, svg


def main(argv=None) -> int:
    code, report, svg = run(argv)
    if report is None:
        return code
    if svg is not None and not report["checks"][0]["details"]["output"]:
        # no --out: the figure owns stdout
        sys.stdout.write(svg)
        sys.stderr.write(dumps(report))
    else:
        sys.stdout.write(dumps(report))
    return code


if __name__ == "__main__":
    sys.exit(main())
