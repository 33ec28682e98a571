"""Built-in verification suite mirroring the package's acceptance gate.

Each check re-derives a published target from scratch and reports
pass/fail together with the measured value.  Two checks are expected to
fail under a nominal build (the stated Teichmueller median and the
modulus-density tail coefficient; the code reproduces its own
quadratures exactly, the stated targets do not match them), so the
suite's exit condition is "every check matches its expected status",
not "every check passes".
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from . import closedform as cf
from . import lame, mc, modmap, torusgroup
from .hypgeom import cross_ratio

__all__ = ["CheckResult", "run_checks", "EXPECTED_FAILURES"]

# Checks whose stated targets disagree with the package's own validated
# quadratures; they are reported as red on purpose.
EXPECTED_FAILURES = (
    "09a-teich-median",
    "09d-teich-initially-increasing",
    "10a-modulus-tail-coefficient",
)

_PI2 = math.pi ** 2


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    expected_pass: bool
    detail: str

    @property
    def nominal(self) -> bool:
        """True when the outcome matches what a healthy build produces."""
        return self.passed == self.expected_pass


def _result(name: str, passed: bool, detail: str) -> CheckResult:
    return CheckResult(name, passed, name not in EXPECTED_FAILURES, detail)


def _check_normalization(quick: bool, table) -> list[CheckResult]:
    from scipy.integrate import quad

    t0 = time.perf_counter()
    thr = cf.LENGTH_THRESHOLD
    masses = {
        "crossratio": quad(cf.crossratio_pdf, -np.inf, 0.0)[0]
        + quad(cf.crossratio_pdf, 0.0, 1.0)[0]
        + quad(cf.crossratio_pdf, 1.0, np.inf)[0],
        "quad_cr": quad(cf.quad_cr_pdf, 2.0, np.inf)[0],
        "length": quad(cf.length_pdf, 0.0, thr)[0],
        "length_dual": quad(cf.length_pdf_dual, 0.0, thr)[0]
        + quad(cf.length_pdf_dual, thr, np.inf)[0],
        "star": quad(cf.star_pdf, -np.inf, np.inf)[0],
    }
    dt = time.perf_counter() - t0
    worst = max(abs(v - 1.0) for v in masses.values())
    ok = worst < 1e-8 and dt < 1.0
    return [_result("01-pdf-normalization", ok,
                    f"worst |mass-1| = {worst:.2e} over {len(masses)} laws, {dt:.2f}s")]


def _check_quad_median(quick: bool, table) -> list[CheckResult]:
    t0 = time.perf_counter()
    med = cf.quad_cr_median()
    dt = time.perf_counter() - t0
    ok = abs(med - 4.6883) <= 5e-4 and dt < 0.1
    return [_result("02-quad-median", ok, f"median = {med:.6f}, {dt:.3f}s")]


def _check_length_moments(quick: bool, table) -> list[CheckResult]:
    t0 = time.perf_counter()
    mean = cf.length_mean()
    bmed = cf.length_branch_median()
    dt = time.perf_counter() - t0
    ok = abs(mean - 0.984154) <= 1e-4 and abs(bmed - 0.99929) <= 1e-3 and dt < 1.0
    return [_result("03-length-checkpoints", ok,
                    f"mean = {mean:.6f}, branch median = {bmed:.6f}, {dt:.2f}s")]


def _check_mc(quick: bool, table) -> list[CheckResult]:
    n = 10**5 if quick else 10**6
    t0 = time.perf_counter()
    ks = {}
    for law in ("crossratio_full", "quad_cr", "star", "length"):
        s = mc.run_law(mc.McConfig(n_samples=n, seed=20260819, workers=4, law=law))
        ks[law] = s.ks_distance
    rerun = mc.run_law(mc.McConfig(n_samples=n, seed=20260819, workers=1,
                                   law="quad_cr"))
    dt = time.perf_counter() - t0
    deterministic = rerun.ks_distance == ks["quad_cr"]
    worst = max(ks.values())
    ok = worst < 0.005 and deterministic and dt < 30.0
    return [_result("04-monte-carlo-ks", ok,
                    f"worst KS = {worst:.5f} at n={n}, deterministic = "
                    f"{deterministic}, {dt:.1f}s")]


def _check_square_solve(quick: bool, table) -> list[CheckResult]:
    t0 = time.perf_counter()
    sol = lame.solve_accessory(1.0)
    dt = time.perf_counter() - t0
    rec = sol.as_record()
    ok = (abs(rec["cross_ratio"] - 2.0) <= 1e-6
          and rec["tangency_residual"] < 1e-10
          and rec["wronskian_drift"] < 1e-9
          and dt < 0.5)
    return [_result("05-square-torus-solve", ok,
                    f"CR = {rec['cross_ratio']:.8f}, tangency = "
                    f"{rec['tangency_residual']:.1e}, drift = "
                    f"{rec['wronskian_drift']:.1e}, {dt:.2f}s")]


def _check_functional_equation(quick: bool, table) -> list[CheckResult]:
    ms = (1.5, 3.0) if quick else (1.25, 1.5, 2.0, 3.0, 5.0)
    t0 = time.perf_counter()
    worst = 0.0
    for m in ms:
        q_lo = lame.solve_accessory(1.0 / m).cross_ratio
        q_hi = lame.solve_accessory(m).cross_ratio
        worst = max(worst, abs(q_lo - q_hi / (q_hi - 1.0)))
    dt = time.perf_counter() - t0
    ok = worst < 1e-5 and dt < 10.0
    return [_result("06-functional-equation", ok,
                    f"worst residual = {worst:.2e} over m in {ms}, {dt:.1f}s")]


def _check_sandwich(quick: bool, table) -> list[CheckResult]:
    ms = np.asarray(table.ms)
    crs = np.asarray(table.crs)
    sel = (ms >= 2.0) & (ms <= 50.0)
    upper = 0.5 * math.pi * np.sqrt(crs[sel])
    lower = upper - 0.5 * math.pi
    sandwich_ok = bool(np.all((lower <= ms[sel]) & (ms[sel] <= upper)))
    tail = ms[sel] >= 20.0
    deficit = upper[tail] - ms[sel][tail]
    deficit_ok = bool(np.all((deficit >= 0.5) & (deficit <= 1.3)))
    ok = sandwich_ok and deficit_ok
    return [_result("07-asymptotic-sandwich", ok,
                    f"{int(sel.sum())} nodes bracketed = {sandwich_ok}, deficit in "
                    f"[{deficit.min():.4f}, {deficit.max():.4f}] for m >= 20")]


def _check_derivative(quick: bool, table) -> list[CheckResult]:
    a = table.a_estimate
    gap = table.curvature_gap
    half_pi = 0.5 * math.pi
    ok = (0.98 * half_pi <= a <= 1.02 * half_pi) and gap < 0.02 * a * a
    return [_result("08-derivative-at-square", ok,
                    f"CR'(1) = {a:.8f} ({a / half_pi:.4f} of pi/2), curvature gap "
                    f"= {gap:.2e}")]


def _check_teich_stats(quick: bool, table) -> list[CheckResult]:
    mean, median, sd = modmap.summary_stats(table)
    out = [
        _result("09a-teich-median", abs(median - 0.779) <= 0.02,
                f"median = {median:.5f} vs stated 0.779 +- 0.02"),
        _result("09b-teich-sd", abs(sd - 0.803) <= 0.02, f"sd = {sd:.5f}"),
        _result("09c-teich-mean", abs(mean - 1.0) <= 0.05, f"mean = {mean:.5f}"),
    ]
    # The stated requirement cannot hold: the functional equation forces
    # CR''(1) = a^2 - a and the quad pdf satisfies f'(2) = -f(2), which
    # together give T'(0) = 0 identically; the measured T''(0) < 0, so T
    # is flat at 0 and then decreasing.
    ds = np.array([0.01, 0.05, 0.15, 0.3])
    ts = np.asarray(modmap.teich_pdf(ds, table))
    increasing = bool(np.all(np.diff(ts) > 0.0)) and table.a_estimate > 1.0
    out.append(_result("09d-teich-initially-increasing", increasing,
                       f"T on {ds.tolist()} = {np.round(ts, 5).tolist()}"))
    return out


def _check_tails(quick: bool, table) -> list[CheckResult]:
    ms = np.array([50.0, 100.0, 200.0])
    dens = np.asarray(modmap.modulus_pdf(ms, table))
    ratios = dens * math.pi ** 5 * ms ** 3 / (192.0 * np.log(ms))
    coeff_ok = bool(np.all((ratios >= 0.5) & (ratios <= 1.5)))
    out = [_result("10a-modulus-tail-coefficient", coeff_ok,
                   f"M*pi^5*m^3/(192 log m) = {np.round(ratios, 3).tolist()} "
                   "vs stated [0.5, 1.5]")]
    r = np.geomspace(1e2, 1e4, 31)
    pdf = np.asarray(cf.quad_cr_pdf(r))
    two_term = (6.0 / _PI2) * ((np.log(r) + 1.0) / r**2 + (np.log(r) + 0.5) / r**3)
    scaled = np.abs(pdf - two_term) * r**4
    bounded = bool(np.all(scaled <= 20.0 * (6.0 / _PI2)))
    out.append(_result("10b-quad-tail-residual", bounded,
                       f"residual*r^4 in [{scaled.min():.3f}, {scaled.max():.3f}]"))
    return out


def _check_group_identities(quick: bool, table) -> list[CheckResult]:
    rng = np.random.default_rng(5)
    n = 100 if quick else 1000
    worst_rect = worst_gen = worst_vertex = 0.0
    for _ in range(n):
        r = math.exp(rng.uniform(math.log(0.05), math.log(20.0)))
        pair = torusgroup.rectangular_generators(r)
        com = torusgroup.commutator(pair.A, pair.B)
        tr = com.a + com.d
        worst_rect = max(worst_rect, abs(tr + 2.0) / 2.0)
        verts = torusgroup.tangency_vertices(pair)
        q = torusgroup.quad_cross_ratio_from_group(pair)
        raw = cross_ratio(*verts)
        worst_vertex = max(worst_vertex, abs(complex(raw.value).real - q))
        lam = math.exp(rng.uniform(math.log(0.1), math.log(5.0)))
        u, v = torusgroup.nonrectangular_pair(r, lam)
        comg = torusgroup.commutator(u, v)
        trg = comg.a + comg.d
        worst_gen = max(worst_gen, abs(trg + 2.0) / 2.0)
    ok = worst_rect < 1e-9 and worst_gen < 1e-9 and worst_vertex < 1e-10
    return [_result("11-group-identities", ok,
                    f"rel trace errors rect = {worst_rect:.1e}, general = "
                    f"{worst_gen:.1e}; vertex-CR error = {worst_vertex:.1e} "
                    f"over {n} draws")]


_CHECKS = (
    _check_normalization,
    _check_quad_median,
    _check_length_moments,
    _check_mc,
    _check_square_solve,
    _check_functional_equation,
    _check_sandwich,
    _check_derivative,
    _check_teich_stats,
    _check_tails,
    _check_group_identities,
)


def run_checks(quick: bool = False,
               table: modmap.CrMapTable | None = None) -> list[CheckResult]:
    """Run every verification check and return the results in order.

    Builds a cross-ratio table when none is supplied: the standard 256
    nodes, or 64 in quick mode.  The table is installed as the module
    default so downstream sampling reuses it.
    """
    if table is None:
        table = modmap.build_cr_table(1.0, 50.0, 64 if quick else 256)
        modmap.set_default_table(table)
    results: list[CheckResult] = []
    for check in _CHECKS:
        results.extend(check(quick, table))
    return results
