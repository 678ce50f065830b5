"""Acceptance criteria, one test each.

Every test records a one-line PASS/FAIL verdict; the lines are printed in the
pytest terminal summary, or directly when this file is run as a script.
"""
import json
import subprocess
import sys
from pathlib import Path

import numpy as np
from scipy.stats import qmc

from semiconf.conformal import (
    CRKind, check_equivalence, classify_cr, jacobian_sweep, liouville_fit, probe_suite,
    scaling_check,
)
from semiconf.core import Signature
from semiconf.diffops import SmoothMap, default_vars
from semiconf.errors import NotWaveSolution
from semiconf.expr import parse
from semiconf.minkowski2 import (
    NullRectangle, build_map_from_pair, cartesian_form, compactification, conformal_factor,
    dalembert_decompose, factor_map, rectangle_equivalence,
)

from families import pair_family, wave_family
from oracles import affine_components, random_eta_orthogonal

ROOT = Path(__file__).resolve().parents[1]
MINK = Signature(2, 1)
DIAMOND = NullRectangle.diamond()
RESULTS = {}


def record(k, ok, detail):
    RESULTS[k] = f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}"
    assert ok, RESULTS[k]


def xt_grid(lo, hi, k):
    a = np.linspace(lo, hi, k)
    X, T = np.meshgrid(a, a, indexing="ij")
    return np.column_stack([X.ravel(), T.ravel()])


def to_null_pts(xt):
    return np.column_stack([xt[:, 0] + xt[:, 1], xt[:, 0] - xt[:, 1]])


def conformal_on_grid(F, null_pts, tol=1e-9):
    sweep = jacobian_sweep(F, null_pts, tol)
    return bool(sweep.conformal.all()), float(sweep.residual.max())


def test_criterion_1_compactification():
    F = build_map_from_pair(compactification())
    ok_grid, worst = conformal_on_grid(F, to_null_pts(xt_grid(-50, 50, 33)))
    unit = qmc.Halton(d=2, scramble=False).random(10_001)[1:]
    src = (2 * unit - 1) * 1e8
    img = cartesian_form(compactification()).image(src)
    l1 = np.abs(img).sum(axis=1)
    inside = bool(np.isfinite(l1).all() and (l1 < 1).all())
    record(1, ok_grid and inside,
           f"33x33 max residual {worst:.2e} (<= 1e-9), 10^4 images max |X|+|T| = {l1.max():.17g}")


def test_criterion_2_counterexamples():
    rng = np.random.default_rng(1)
    lines = []
    ok = True
    for label, sig, comps in [("swap", MINK, ["t", "x"]),
                              ("block swap", Signature(4, 2), ["x3", "x4", "x1", "x2"])]:
        F = SmoothMap.from_strings(sig, comps)
        pts = rng.uniform(-2, 2, (50, sig.n))
        rep = probe_suite(F, pts)
        sweep = jacobian_sweep(F, pts)
        this = (rep.suite_pass and rep.max_residual <= 1e-12 and not rep.gradient_condition
                and bool(sweep.anti_signature.all()) and not sweep.conformal.any())
        ok &= this
        lines.append(f"{label}: probes {rep.max_residual:.1e}, gradient "
                     f"{rep.gradient_condition}, anti_signature {bool(sweep.anti_signature.all())}")
    record(2, ok, "; ".join(lines))


def _family_samples():
    rng = np.random.default_rng(5)
    return np.vstack([DIAMOND.grid(9), rng.uniform(-0.98, 0.98, (40, 2))])


def test_criterion_3_two_path_agreement():
    pts = _family_samples()
    ok = True
    worst = 0.0
    for pair in pair_family():
        F = build_map_from_pair(pair)
        eq = check_equivalence(F, pts)
        lam = conformal_factor(pair, pts[:, 0], pts[:, 1])
        rel = float((np.abs(eq.jacobian.factor - lam) / np.abs(lam)).max())
        worst = max(worst, rel)
        ok &= eq.all_agree and eq.conformal and rel <= 1e-9
    record(3, ok, f"20 maps x {len(pts)} samples agree and conformal, "
                  f"max lambda rel err {worst:.1e}")


def test_criterion_4_factor_round_trip():
    pts = DIAMOND.grid(33)
    ok = True
    worst = 0.0
    for pair in pair_family():
        got = factor_map(build_map_from_pair(pair), DIAMOND)
        ok &= got.branch == pair.branch and got.pattern == pair.pattern
        for mine, ref in ((got.psi, pair.psi), (got.chi, pair.chi)):
            s = np.concatenate([pts[:, 0], pts[:, 1]])[:, None]
            worst = max(worst, float(np.abs(mine.values(s) - ref.values(s)).max()))
        rebuilt = build_map_from_pair(got).image(pts)
        worst = max(worst, float(np.abs(rebuilt - build_map_from_pair(pair).image(pts)).max()))
    record(4, ok and worst <= 1e-9, f"branch/pattern exact, max pointwise err {worst:.1e}")


def test_criterion_5_dalembert():
    worst = 0.0
    for src in wave_family():
        X = parse(src, ("x", "t"))
        split = dalembert_decompose(X, DIAMOND, grid=65)
        # independent reconstruction check in Cartesian coordinates
        q = DIAMOND.grid(65)
        xt = np.column_stack([(q[:, 0] + q[:, 1]) / 2, (q[:, 0] - q[:, 1]) / 2])
        recon = split.f.values(q[:, :1]) + split.g.values(q[:, 1:])
        err = float(np.abs(recon - X.values(xt)).max())
        worst = max(worst, err, split.reconstruction_error)
    try:
        dalembert_decompose(parse("x^2*t", ("x", "t")), DIAMOND)
        rejected = False
    except NotWaveSolution:
        rejected = True
    record(5, worst <= 1e-9 and rejected,
           f"10 wave solutions max err {worst:.1e} on 65x65, x^2 t rejected: {rejected}")


def test_criterion_6_liouville():
    rng = np.random.default_rng(11)
    worst_alpha = worst_orth = worst_scale = 0.0
    ok = True
    for shape in [(3, 1), (4, 2)]:
        sig = Signature(*shape)
        n = sig.n
        names = default_vars(sig)
        targets = tuple(f"y{i}" for i in range(1, n + 1))
        probes = [parse(p, targets) for p in ("y1^2", f"y{n}^2", "y1^2 + 3*y1*y2 + 2*y2^2")]
        for _ in range(10):
            alpha = rng.uniform(0.5, 4)
            A = random_eta_orthogonal(rng, n, sig.nu)
            b = rng.normal(size=n)
            F = SmoothMap.from_strings(sig, affine_components(alpha * A, b, names), vars=names)
            X = rng.uniform(-3, 3, (4 * n, n))
            model = liouville_fit(zip(X, F.image(X)), sig)
            worst_alpha = max(worst_alpha, abs(model.alpha - alpha) / alpha)
            worst_orth = max(worst_orth, float(np.abs(model.A.T @ sig.eta @ model.A
                                                      - sig.eta).max()))
            for phi in probes:
                rep = scaling_check(F, phi, X, 1e-9, model)
                ok &= rep.passed and not rep.vacuous
                worst_scale = max(worst_scale, rep.max_deviation)
    ok &= worst_alpha <= 1e-8 and worst_orth <= 1e-8 and worst_scale <= 1e-9
    record(6, ok, f"20 fits: alpha rel err {worst_alpha:.1e}, A^T eta A err {worst_orth:.1e}, "
                  f"scaling dev {worst_scale:.1e}")


def test_criterion_7_cauchy_riemann():
    pts = np.random.default_rng(2).uniform(0.1, 1.5, (100, 2)) * [1, 1]
    pts[:50] *= -1
    cases = [
        (["x^2 - y^2", "2*x*y"], CRKind.HOLOMORPHIC),
        (["x^3 - 3*x*y^2", "3*x^2*y - y^3"], CRKind.HOLOMORPHIC),
        (["exp(x)*cos(y)", "exp(x)*sin(y)"], CRKind.HOLOMORPHIC),
        (["x^2 - y^2", "-2*x*y"], CRKind.ANTI_HOLOMORPHIC),
        (["x^3 - 3*x*y^2", "-(3*x^2*y - y^3)"], CRKind.ANTI_HOLOMORPHIC),
        (["exp(x)*cos(y)", "-exp(x)*sin(y)"], CRKind.ANTI_HOLOMORPHIC),
        (["2*x", "y"], CRKind.NEITHER),
        (["x + y", "y"], CRKind.NEITHER),
    ]
    ok = True
    worst = 0.0
    for comps, kind in cases:
        c = classify_cr(SmoothMap.from_strings(Signature(2, 0), comps), pts, 1e-10)
        ok &= c.kind == kind
        if kind != CRKind.NEITHER:
            worst = max(worst, c.residual)
            ok &= c.residual <= 1e-10
    record(7, ok, f"8 maps classified at 100 samples, max CR residual {worst:.1e}")


def test_criterion_8_rectangle_equivalence():
    dst = NullRectangle(1, 3, 0, 4)
    pair = rectangle_equivalence(DIAMOND, dst)
    inverse = rectangle_equivalence(dst, DIAMOND)
    corners = [pair.psi(-1), pair.psi(1), pair.chi(-1), pair.chi(1)]
    exact = corners == [1.0, 3.0, 0.0, 4.0]
    F = build_map_from_pair(pair)
    ok_conf, worst = conformal_on_grid(F, DIAMOND.grid(33))
    pts = DIAMOND.grid(33)
    back = build_map_from_pair(inverse).image(F.image(pts))
    err = float(np.abs(back - pts).max())
    record(8, exact and ok_conf and err <= 1e-12,
           f"corners {corners}, conformal residual {worst:.1e}, inverse round trip {err:.1e}")


def test_criterion_9_cli_determinism():
    def conf(job):
        return subprocess.run([sys.executable, "-m", "semiconf.cli", "check", "--job",
                               str(ROOT / "jobs" / job)], capture_output=True, cwd=ROOT)
    first, second = conf("compactification.json"), conf("compactification.json")
    same = first.stdout == second.stdout and len(first.stdout) > 0
    swap = conf("swap.json")
    reason = json.loads(swap.stdout).get("reason")
    ok = same and first.returncode == 0 and swap.returncode == 1 and \
        reason == "anti-conformal (λ<0); gradient condition violated"
    record(9, ok, f"byte-identical {same}, exit {first.returncode}; swap exit "
                  f"{swap.returncode}, reason {reason!r}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
            except Exception as exc:  # report, keep going
                k = int(name.split("_")[2])
                RESULTS[k] = f"criterion {k}: FAIL  {type(exc).__name__}: {exc}"
                failed += 1
    for k in sorted(RESULTS):
        print(RESULTS[k])
    sys.exit(1 if failed else 0)
