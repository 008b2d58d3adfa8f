"""
Acceptance suite.  Each criterion prints one ``PASS``/``FAIL`` line with the
measured figure and its runtime, then asserts.  Run standalone with
``python3 tests/test_acceptance.py`` for just the summary lines.
"""
import math
import time
from dataclasses import dataclass

import numpy as np
import pytest
from scipy import integrate
from scipy.optimize import brentq

from hexsep.analytic import (B_TABLE, db_to_linear, resolve_params, sep_3psk_exact,
                             sep_hqam_closed, sep_hqam_rayleigh, sep_nn_awgn, sep_nn_rayleigh)
from hexsep.gaussian import (correction_C_closed, j1_closed, j1_numeric, j2_numeric, j3_closed,
                             q_func)
from hexsep.lattice import ConstellationKind, build_constellation, neighbor_stats
from hexsep.montecarlo import SimConfig, simulate
from hexsep.oracle import exact_sep_awgn, exact_sep_rayleigh, transition_matrix
from hexsep.report import TABLE2, TABLE2_TOL, sweep, table2_report


@dataclass
class Verdict:
    number: int
    title: str
    passed: bool
    detail: str
    seconds: float
    budget: float

    @property
    def line(self) -> str:
        status = "PASS" if self.passed and self.seconds < self.budget else "FAIL"
        return (f"[{status}] criterion {self.number}: {self.title}: {self.detail} "
                f"({self.seconds:.2f} s, budget {self.budget:g} s)")


def timed(number, title, budget):
    def wrap(fn):
        def run():
            t0 = time.perf_counter()
            passed, detail = fn()
            return Verdict(number, title, passed, detail, time.perf_counter() - t0, budget)
        run.__name__ = fn.__name__
        return run
    return wrap


# ---------------------------------------------------------------------------

@timed(1, "B cross-check, M in {4, 8, 16, 32}", 1.0)
def criterion_1():
    worst = 0.0
    for M in (4, 8, 16, 32):
        for kind in (ConstellationKind.REGULAR, ConstellationKind.IRREGULAR):
            b = 1.3318 * float(neighbor_stats(build_constellation(M, kind)).A_c)
            worst = max(worst, abs(b - B_TABLE[(M, kind)]))
    return worst <= 1e-3, f"max |1.3318 A_c - B_table| = {worst:.2e} (tol 1e-3)"


@timed(2, "3-PSK closed expression vs exact oracle", 10.0)
def criterion_2():
    c = build_constellation(3, "3psk")
    alpha = neighbor_stats(c).alpha
    worst = 0.0
    for x in (0.0, 1.0, 4.0, 9.0):
        formula = sep_3psk_exact(x / alpha)
        # the polygon oracle needs a positive SNR; its zero-SNR value is (M-1)/M
        oracle = exact_sep_awgn(c, x / alpha).value if x > 0 else 2.0 / 3.0
        worst = max(worst, abs(formula - oracle))
    at_zero = abs(sep_3psk_exact(0.0) - 2 / 3)
    tiny = abs(exact_sep_awgn(c, 1e-12).value - 2 / 3)
    ok = worst <= 1e-6 and at_zero <= 1e-6 and tiny <= 1e-6
    return ok, (f"max |Eq3 - oracle| = {worst:.2e}; |Eq3(0) - 2/3| = {at_zero:.1e}; "
                f"|oracle(1e-12) - 2/3| = {tiny:.1e} (tol 1e-6)")


@timed(3, "J1 = J2 = 2Q(sqrt(x)) by quadrature; closed C is J3", 1.0)
def criterion_3():
    x = np.linspace(0.0, 30.0, 61)
    target = 2.0 * q_func(np.sqrt(x))
    d1 = float(np.max(np.abs(j1_numeric(x) - target)))
    d2 = float(np.max(np.abs(j2_numeric(x) - target)))
    same = bool(np.array_equal(correction_C_closed(x), j3_closed(x)))
    exact_j1 = bool(np.array_equal(j1_closed(x), target))
    return (max(d1, d2) <= 1e-10 and same and exact_j1,
            f"max |J1 - 2Q| = {d1:.1e}, max |J2 - 2Q| = {d2:.1e} (tol 1e-10); "
            f"C_closed == J3: {same}")


@timed(4, "Rayleigh closed form equals the fading average of the AWGN form", 30.0)
def criterion_4():
    rng = np.random.default_rng(20240)
    orders = [4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048]
    worst = 0.0
    for _ in range(20):
        M = int(rng.choice(orders))
        gbar = float(10 ** rng.uniform(-1.0, 4.0))
        p = resolve_params(M, "regular")
        f = lambda t: sep_hqam_closed(p, t * t * gbar, clamp=False) * 2 * t * math.exp(-t * t)
        ref = integrate.quad(f, 0.0, np.inf, epsabs=1e-13, epsrel=1e-11, limit=200)[0]
        worst = max(worst, abs(sep_hqam_rayleigh(p, gbar, clamp=False) - ref))
    return worst <= 1e-6, f"max |closed - quadrature| over 20 random pairs = {worst:.2e} (tol 1e-6)"


@timed(5, "256-HQAM AE reproduces the published column and beats alt2", 300.0)
def criterion_5():
    c = build_constellation(256, "regular")
    report = table2_report(sweep(c, TABLE2.snr_db, estimators=("eq5", "exact")))
    outside = [f"{r.snr_db:g} dB ({r.ae_recomputed:.4f} vs {r.ae_published:.4f})"
               for r in report.rows if not r.within_tolerance]
    beats_alt2 = all(r.beats_alt2 for r in report.rows)
    detail = (f"max |AE - published| = {report.max_deviation:.4f} (tol {TABLE2_TOL:g})"
              + (f", outside at {', '.join(outside)}" if outside else "")
              + f"; beats alt2 everywhere: {beats_alt2}")
    return report.reproduced and beats_alt2, detail


@timed(6, "256-HQAM relative error below 1e-2 from -5 dB to 18 dB", 300.0)
def criterion_6():
    c = build_constellation(256, "regular")
    grid = np.arange(-5.0, 18.0 + 1e-9, 0.5)
    rows = sweep(c, grid, estimators=("eq5", "exact"))
    beta = np.array([r.rel_err_eq5 for r in rows])
    bad = grid[beta >= 1e-2]
    k = int(np.argmax(beta))
    detail = f"max beta = {beta[k]:.5f} at {grid[k]:g} dB"
    if len(bad):
        detail += f"; beta >= 1e-2 at {', '.join(f'{b:g}' for b in bad)} dB"
    return len(bad) == 0, detail


LEVELS = (1e-1, 1e-2, 1e-3)
N_MC = 10_000_000


def _snr_for_level(fn, level):
    return brentq(lambda db: fn(float(db_to_linear(db))) - level, -20.0, 80.0, xtol=1e-10)


def _concordance(channel):
    failures, worst, vs_oracle = [], 0.0, 0.0
    for M in (16, 64):
        c = build_constellation(M, "regular")
        p = resolve_params(M, "regular")
        if channel == "awgn":
            closed = lambda g: sep_hqam_closed(p, g, clamp=False)
            a_term = lambda g: sep_nn_awgn(p, g, clamp=False)
        else:
            closed = lambda g: sep_hqam_rayleigh(p, g, clamp=False)
            a_term = lambda g: sep_nn_rayleigh(p, g, clamp=False)
        for k, level in enumerate(LEVELS):
            db = _snr_for_level(closed, level)
            g = float(db_to_linear(db))
            est = simulate(c, g, SimConfig(N_MC, seed=1000 * M + k, channel=channel))
            gap = abs(est.sep_hat - closed(g))
            tol = max(3 * est.ci95_halfwidth, 5e-3 * a_term(g))
            worst = max(worst, gap / tol)
            exact = (exact_sep_awgn(c, g) if channel == "awgn" else exact_sep_rayleigh(c, g)).value
            vs_oracle = max(vs_oracle, abs(est.sep_hat - exact) / est.ci95_halfwidth)
            if gap > tol:
                failures.append(f"{M}-HQAM at {db:.2f} dB (|MC - closed| = {gap:.2e} > {tol:.2e})")
    # the simulator itself is checked against the exact oracle for context
    detail = f"worst gap/tolerance = {worst:.2f}; |MC - exact| <= {vs_oracle:.2f} CI95"
    if failures:
        detail += "; over tolerance: " + "; ".join(failures)
    return not failures, detail


@timed(7, "Monte Carlo vs closed form, AWGN", 180.0)
def criterion_7_awgn():
    return _concordance("awgn")


@timed(7, "Monte Carlo vs closed form, Rayleigh", 180.0)
def criterion_7_rayleigh():
    return _concordance("rayleigh")


@timed(8, "property suites", 120.0)
def criterion_8():
    checks = {}
    grid = np.logspace(-2, 4, 200)
    mono = True
    for M, kind in [(4, "regular"), (16, "regular"), (64, "irregular"), (256, "regular")]:
        p = resolve_params(M, kind)
        for fn in (sep_nn_awgn, sep_hqam_closed, sep_hqam_rayleigh, sep_nn_rayleigh):
            mono &= bool(np.all(np.diff(fn(p, grid)) <= 1e-15))
    checks["monotone SEP"] = mono

    pdf_mass = integrate.quad(lambda t: 2 * t * math.exp(-t * t), 0, np.inf)[0]
    second = integrate.quad(lambda t: 2 * t**3 * math.exp(-t * t), 0, np.inf)[0]
    checks["fading density normalized"] = abs(pdf_mass - 1) < 1e-10 and abs(second - 1) < 1e-10

    c16 = build_constellation(16, "regular")
    identical = True
    for channel in ("awgn", "rayleigh"):
        cfg = SimConfig(200_000, seed=3, channel=channel, batch_size=15_000)
        identical &= len({simulate(c16, 8.0, cfg, workers=w) for w in (1, 3, 8)}) == 1
    checks["thread-count determinism"] = identical

    closure = 0.0
    for M, kind in [(3, "3psk"), (16, "regular"), (32, "irregular"), (64, "regular")]:
        c = build_constellation(M, kind)
        for g in (0.5, 10.0, 100.0):
            closure = max(closure, float(np.max(np.abs(transition_matrix(c, g).sum(axis=1) - 1))))
    checks["closure"] = closure <= 1e-8

    failed = [k for k, v in checks.items() if not v]
    return not failed, (f"{len(checks) - len(failed)}/{len(checks)} checks hold; "
                        f"max |sum_j P(j|i) - 1| = {closure:.1e}"
                        + (f"; failed: {', '.join(failed)}" if failed else ""))


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7_awgn, criterion_7_rayleigh, criterion_8]


@pytest.mark.parametrize("criterion", CRITERIA, ids=[c.__name__ for c in CRITERIA])
def test_acceptance(criterion, capsys):
    verdict = criterion()
    with capsys.disabled():
        print("\n" + verdict.line)
    assert verdict.passed, verdict.detail
    assert verdict.seconds < verdict.budget, f"took {verdict.seconds:.1f} s"


if __name__ == "__main__":
    for criterion in CRITERIA:
        print(criterion().line, flush=True)
