"""Acceptance criteria, one test per criterion.

Each test records a single pass/fail line; the lines are echoed in the
terminal summary under "acceptance criteria".  Tolerances are pinned here.
"""

import io
import time
import warnings
from functools import lru_cache

import pytest

from prolongation import conserve as cs
from prolongation.catalog import BUILTIN_NAMES, GellMannData, commutator_defects, load_system
from prolongation.checks import run_checks
from prolongation.cli import main
from prolongation.dsl import emit_system, parse_system
from prolongation.engine import (
    GaugeMatrix, chart_identity_defect, extend_sl2, gauge_transform, pfaffians, riccati_chart,
)

SUITE_SECONDS = 10.0
SCALING_SECONDS = 5.0
SLOPE_TOL = 0.15
CLOSED_FORM_RTOL = 1e-6
ETAS = (10, 20, 40, 80)

# printed-typo sites: check id -> what is suspected
TYPO_SITES = {
    "sl2r-sigma2-closure": "d sigma2 indices (y3, w2 vs y4, w3)",
    "sl2r-alpha5-closure": "d alpha5 theta index",
    "o3-chart2-ratios": "y7 defined as y3/y1",
    "o3-chart2-subconnection": "Omega2(2,1) uses undefined w6",
    "o3-chart3-closure": "y1*theta1 in d alpha8",
}
# found during reproduction, outside the enumerated list
EXTRA_O3_SL2R = {"o3-chart3-subconnection": "Omega3(1,2) prints y9 where y8 is derived"}
SU3_SUBCURVATURE = {"su3-chart1-curvature", "su3-chart2-curvature"}

LINES: dict = {}


def record(criterion: str, ok: bool, detail: str):
    line = f"criterion {criterion:<3} {'PASS' if ok else 'FAIL'}  {detail}"
    LINES[criterion] = line
    print(line)
    return ok


@lru_cache(maxsize=None)
def full_reports():
    t0 = time.perf_counter()
    reps = {n: run_checks(load_system(n)) for n in BUILTIN_NAMES}
    return reps, time.perf_counter() - t0


def statuses():
    return {r.check: r.status for rep in full_reports()[0].values() for r in rep.results}


def _require(ids, allowed=()):
    st = statuses()
    bad = [i for i in ids if st.get(i) != "pass" and not (i in allowed and st.get(i) == "discrepancy")]
    return bad


def test_criterion_1_theorems():
    ids = ["sl2r-pfaffian-closure", "sl2r-pfaffian-shape", "sl2r-chart1-forms", "sl2r-chart1-closure",
           "sl2r-sigma1-definition", "sl2r-sigma1-closure", "sl2r-sigma2-definition"]
    ids += [f"sl2r-alpha{k}-{part}" for k in range(5, 9) for part in ("definition", "closure")]
    for alg in ("o3", "su3"):
        ids += [f"{alg}-pfaffian-closure", f"{alg}-pfaffian-shape"]
        ids += [f"{alg}-chart{p}-{part}" for p in (1, 2, 3) for part in ("closure", "trace")]
    bad = _require(ids, allowed=TYPO_SITES)
    ext = extend_sl2(pfaffians(load_system("sl2r")))
    open_ = [k for k, dec in ext.decompositions.items() if k.startswith("alpha") and not dec.in_ideal]
    seconds = full_reports()[1]
    ok = not bad and not open_ and seconds < SUITE_SECONDS
    record("1", ok, f"{len(ids)} theorem checks, off: {bad or 'none'}, prolonged ideal closed: {not open_}, "
                    f"suite {seconds:.1f}s < {SUITE_SECONDS:.0f}s")
    assert ok


def test_criterion_2_curvature_tables():
    ids = [f"{n}-{c}" for n in BUILTIN_NAMES for c in ("structure-equations", "curvature-matrix")]
    bad = _require(ids)
    record("2", not bad, f"structure equations and curvature for {', '.join(BUILTIN_NAMES)}; off: {bad or 'none'}")
    assert not bad


def test_criterion_3_su3_consistency():
    ids = ["su3-gell-mann-commutators", "su3-f-antisymmetry", "su3-assemble", "su3-f-consistency"]
    bad = _require(ids)
    defects = commutator_defects(GellMannData.standard())
    ok = not bad and not defects
    record("3", ok, f"28 commutator pairs, assembly, 8-line expansion; off: {bad or defects or 'none'}")
    assert ok


def test_criterion_4_riccati_charts():
    forms = ["sl2r-chart1-forms"] + [f"{a}-chart{p}-forms" for a in ("o3", "su3") for p in (1, 2, 3)]
    mats = [f"{a}-chart{p}-{m}" for a in ("o3", "su3") for p in (1, 2, 3) for m in ("subconnection", "curvature")]
    bad = _require(forms) + _require(mats, allowed=set(TYPO_SITES) | set(EXTRA_O3_SL2R) | SU3_SUBCURVATURE)
    uncertified = []
    for n in BUILTIN_NAMES:
        pf = pfaffians(load_system(n))
        for p in range(1, pf.system.dim + 1):
            c = riccati_chart(pf, p)
            if any(not x.is_zero() for x in chart_identity_defect(pf, c)) or not all(dec.certify() for dec in c.decompositions):
                uncertified.append(f"{n}/{p}")
    ok = not bad and not uncertified
    record("4", ok, f"{len(forms)} form sets, {len(mats)} matrices; off: {bad or 'none'}; uncertified: {uncertified or 'none'}")
    assert ok


def test_criterion_5_structural_identities():
    ids = [f"{n}-{c}" for n in BUILTIN_NAMES for c in ("d-squared", "bianchi")]
    bad = _require(ids)
    record("5", not bad, f"d^2 = 0 on every generator and Bianchi for all systems; off: {bad or 'none'}")
    assert not bad


def test_criterion_6_gauge():
    sys_ = load_system("sl2r")
    res = gauge_transform(sys_.connection, GaugeMatrix.symbolic(), sys_.table)
    ident = gauge_transform(sys_.connection, GaugeMatrix.constant([[1, 0], [0, 1]]), sys_.table)
    ok = res.certified and ident.connection == sys_.connection
    record("6", ok, f"symbolic unimodular defect zero: {res.certified}; identity leaves connection: "
                    f"{ident.connection == sys_.connection}")
    assert ok


def test_criterion_7a_density_closed_forms():
    bad = [N for N in range(1, 7) if any(not r.is_zero() for r in cs.density_solve_constant(N).residuals())]
    I = [str(x) for x in cs.density_solve_constant(3, 1, 1).I]
    ok = not bad and I == ["1/2", "-1/8", "1/16"]
    record("7a", ok, f"closed forms solve recursion for N<=6 (off: {bad or 'none'}); I(a1=a2=1) = {I}")
    assert ok


def test_criterion_7b_numeric_closed_forms():
    errs = [cs.closed_form_error(1.0, 1.0, N) for N in (1, 2, 3)]
    ok = max(errs) < CLOSED_FORM_RTOL
    record("7b", ok, "max rel. error past x0 + 10/(2 a1): " + ", ".join(f"N={n}: {e:.2e}" for n, e in enumerate(errs, 1))
           + f" (target < {CLOSED_FORM_RTOL:g})")
    assert ok


def test_criterion_8_residual_scaling():
    g = cs.GridFn.constant(1.0)
    t0 = time.perf_counter()
    slopes = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for N in (1, 2, 3):
            res = cs.residual_scaling_check(g, g, N, ETAS)
            slopes.append((N, res.slope, res.within(SLOPE_TOL)))
    seconds = time.perf_counter() - t0
    ok = all(w for *_, w in slopes) and seconds < SCALING_SECONDS
    record("8", ok, ", ".join(f"N={N}: {s:+.3f}" for N, s, _ in slopes)
           + f" (target -(N+1) +/- {SLOPE_TOL}); {seconds:.2f}s")
    assert ok


def test_criterion_9_discrepancy_ledger():
    found = {r.check: r for n in ("sl2r", "o3") for r in full_reports()[0][n].results if r.status != "pass"}
    failures = [k for k, r in found.items() if r.status == "fail"]
    missing = [k for k in TYPO_SITES if k not in found]
    unexpected = [k for k in found if k not in TYPO_SITES and k not in EXTRA_O3_SL2R]
    ok = not failures and not missing and not unexpected
    record("9", ok, f"{len(found)} discrepancies on sl2r/o3, enumerated sites hit {len(TYPO_SITES) - len(missing)}/"
                    f"{len(TYPO_SITES)}, extra: {sorted(set(found) & set(EXTRA_O3_SL2R)) or 'none'}, "
                    f"failures: {failures or 'none'}, unexpected: {unexpected or 'none'}")
    assert ok


def test_criterion_10_dsl(tmp_path):
    fix = [n for n in BUILTIN_NAMES
           if parse_system(emit_system(load_system(n))) != load_system(n)
           or emit_system(parse_system(emit_system(load_system(n)))) != emit_system(load_system(n))]
    bad = tmp_path / "bad.eds"
    bad.write_text("system t\ndim 2\noneforms w1\npseudos y1 y2\nconnection [[w1, 1.5], [w1, w1]]\ncurvature auto\n")
    err = io.StringIO()
    code = main(["parse", str(bad)], io.StringIO(), err)
    located = f"{bad}:5:" in err.getvalue()
    ok = not fix and code == 2 and located
    record("10", ok, f"fixpoint off: {fix or 'none'}; malformed exit {code}, line/col reported: {located}")
    assert ok
