"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Each criterion runs its checks in a fresh verify context, so set-up cost
(grids, plans, kernel calibration) counts toward its time limit. One
PASS/FAIL line per criterion is printed in the terminal summary.
"""

from __future__ import annotations

import math
import time

import pytest
from scipy import integrate

from hankelwave.verify import RunConfig, run_verify

ACCEPTANCE_LINES: list[str] = []


def _run(only, **kw):
    t0 = time.perf_counter()
    report = run_verify(RunConfig(only=tuple(only), **kw))
    return report, time.perf_counter() - t0


def _record(number: int, title: str, ok: bool, detail: str):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {title} | {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def _criterion(number, title, checks, limit, extra=None):
    report, elapsed = _run(checks)
    by_name = {c.name: c for c in report.checks}
    assert set(by_name) == set(checks), f"ran {sorted(by_name)}"
    parts = [f"{n}={c.measured:.6g} (tol {c.tolerance:.6g})" for n, c in sorted(by_name.items())]
    ok = report.passed and elapsed <= limit
    extra_ok, extra_text = (True, "") if extra is None else extra(by_name)
    ok = ok and extra_ok
    _record(number, title, ok, "; ".join(parts) + f"; {elapsed:.1f}s <= {limit}s" + extra_text)
    errors = [c.error for c in report.checks if c.error]
    assert not errors, errors
    for c in report.checks:
        assert c.passed, f"{c.name}: measured {c.measured} > {c.tolerance}"
    assert elapsed <= limit, f"took {elapsed:.1f}s, limit {limit}s"
    assert extra_ok
    return by_name


def test_criterion_01_self_reciprocity():
    _criterion(1, "Hankel self-reciprocity", ["hankel.fixed_point", "hankel.round_trip"], 5)


def test_criterion_02_parseval():
    def ten_pairs(c):
        n = len(c["hankel.parseval"].details["residuals"])
        return n == 10, f"; pairs={n}"

    _criterion(2, "Hankel Parseval", ["hankel.parseval"], 5, ten_pairs)


def test_criterion_03_kernel_identities():
    def counts(c):
        probes = len(c["kernel.normalization"].details["probes"])
        triples = c["kernel.product_formula"].details["count"]
        return probes >= 8 and triples == 20, f"; probes={probes}, triples={triples}"

    _criterion(3, "kernel normalization and product formula", ["kernel.normalization", "kernel.product_formula"], 30, counts)


def test_criterion_04_contraction_young():
    def grid(c):
        r = c["translation.contraction"].details["ratios"]
        y = c["convolution.young"].details["ratios"]
        return len(r) == 9 and len(y) == 3, f"; cases={len(r)}+{len(y)}"

    _criterion(4, "translation contraction and Young inequality", ["translation.contraction", "convolution.young"], 60, grid)


def test_criterion_05_convolution_theorem():
    _criterion(5, "convolution theorem (spectral vs direct)", ["convolution.theorem"], 60)


def test_criterion_06_admissibility():
    # independent oracle: int_0^inf w^-3 (w^2 e^-w^2)^2 dw = int w e^-2w^2 dw = 1/4
    oracle, _ = integrate.quad(lambda w: w * math.exp(-2 * w * w), 0, math.inf, epsabs=1e-14)

    def against_oracle(c):
        v = c["wavelet.admissibility"].details["value"]
        return abs(v - oracle) <= 1e-8 and abs(oracle - 0.25) <= 1e-12, f"; value={v:.15g}, quad oracle={oracle:.15g}"

    _criterion(6, "admissibility closed form", ["wavelet.admissibility"], 1, against_oracle)


def test_criterion_07_cwt_parseval():
    _criterion(7, "CWT Parseval with monotone range sweep", ["cwt.parseval", "cwt.parseval_monotone"], 120)


def test_criterion_08_cwt_inversion():
    _criterion(8, "CWT inversion with monotone range sweep", ["cwt.inversion", "cwt.inversion_monotone"], 120)


def test_criterion_09_sp_plancherel():
    def info(c):
        d = c["cwt.sp_plancherel"].details
        return True, (
            f"; sp^2/|f|^2={d['ratio']:.6g}, C={d['plancherel_constant']:.6g}"
            f" [info: ratio to the dw-form constant {d['admissibility_dw']:.4g} is {d['ratio_over_admissibility_dw']:.4f}]"
        )

    _criterion(9, "S_2 Plancherel", ["cwt.sp_plancherel"], 60, info)


def test_criterion_10_besov_bounds():
    def coverage(c):
        cells = c["besov.direct"].details["cells"]
        alphas = sorted({k.split(",")[0] for k in cells})
        funcs = {k.split(",", 1)[1] for k in cells}
        ok = alphas == ["alpha=0.25", "alpha=0.5", "alpha=0.75"] and len(funcs) >= 5
        return ok, f"; {len(cells)} cells, {len(funcs)} functions"

    _criterion(
        10,
        "direct and converse bounds, literal bracket, alpha = 1.5",
        ["besov.direct", "besov.converse", "besov.bracket", "besov.alpha_1_5"],
        300,
        coverage,
    )


@pytest.mark.slow
def test_criterion_11_determinism():
    a, ta = _run((), rng_seed=0)
    b, tb = _run((), rng_seed=0)
    ja, jb = a.to_json().encode(), b.to_json().encode()
    ok = ja == jb
    _record(11, "byte-identical verify JSON", ok, f"{len(ja)} bytes, full runs {ta:.1f}s and {tb:.1f}s, all checks pass={a.passed}")
    assert ok
