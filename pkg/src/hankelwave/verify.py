"""Property-suite runner behind ``hankelwave verify``.

Every check reports a measured value and passes iff ``measured <= tolerance``.
Inequality checks measure ``max lhs / rhs``; monotonicity checks measure the
largest ratio between consecutive residuals. Setting a tolerance to 0 makes
every nontrivial check fail.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable

import numpy as np

from .besov import BesovParams, besov_report, modulus_curve
from .convolution import convolve, translate
from .errors import HankelWaveError, ParameterError
from .hankel import forward, inverse, parseval_residual, plan as make_plan
from .kernels import calibrate_d_constant, kernel_j, translate_callable
from .measure import MeasureParams, SampledFunction, default_grid, lp_norm
from .testfunctions import generate_test_function
from .wavelet import (
    admissibility_constant,
    cwt,
    cwt_invert,
    cwt_parseval,
    geometric_scales,
    hankel_mexican,
    make_wavelet,
    sp_norm,
    spectral_derivatives,
)

__all__ = ["RunConfig", "CheckResult", "VerifyReport", "CHECKS", "run_verify", "load_config", "select_checks"]

SCHEMA = 1

DEFAULT_TOLERANCES = {
    "hankel.fixed_point": 1e-7,
    "hankel.round_trip": 1e-6,
    "hankel.parseval": 1e-6,
    "kernel.normalization": 1e-6,
    "kernel.product_formula": 1e-6,
    "translation.contraction": 1.0 + 1e-4,
    "convolution.young": 1.0 + 1e-4,
    "convolution.theorem": 1e-5,
    "wavelet.admissibility": 1e-8,
    "cwt.parseval": 1e-2,
    "cwt.parseval_monotone": 1.0,
    "cwt.inversion": 2e-2,
    "cwt.inversion_monotone": 1.0,
    "cwt.sp_plancherel": 2e-2,
    "besov.direct": 1.05,
    "besov.converse": 1.05,
    "besov.bracket": 1.0,
    "besov.alpha_1_5": 1.05,
}


class ConfigError(HankelWaveError, ValueError):
    """Invalid run configuration (exit code 2)."""


@dataclass
class RunConfig:
    nu: float = 1.0
    r_max: float = 40.0
    refine: float = 1.0
    wavelet: str = "hankel_mexican:1"
    scales: tuple = (2.0**-5, 2.0**5, 64)
    h_grid: tuple = (2.0**-5, 2.0**5, 64)
    tolerances: dict = field(default_factory=dict)
    rng_seed: int = 0
    json_out: str | None = None
    table_out: str | None = None
    only: tuple = ()
    direct_order: int = 16

    def __post_init__(self):
        if not self.nu > 0:
            raise ConfigError(f"nu must be > 0, got {self.nu}")
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError(f"unknown tolerance keys: {sorted(unknown)}")
        for k, v in self.tolerances.items():
            if not (isinstance(v, (int, float)) and v >= 0 and math.isfinite(v)):
                raise ConfigError(f"tolerance {k} must be a finite number >= 0")
        for name in ("scales", "h_grid"):
            lo, hi, n = getattr(self, name)
            if not (0 < lo < hi) or int(n) < 4:
                raise ConfigError(f"{name} must be (min, max, count) with 0 < min < max, count >= 4")
        if isinstance(self.only, str):
            self.only = tuple(t for t in self.only.split(",") if t)

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def as_dict(self) -> dict:
        d = asdict(self)
        d["scales"] = list(self.scales)
        d["h_grid"] = list(self.h_grid)
        d["only"] = list(self.only)
        d["tolerances"] = {k: self.tolerance(k) for k in sorted(DEFAULT_TOLERANCES)}
        for k in ("json_out", "table_out"):
            d.pop(k)
        return d


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Read a TOML or JSON config; keyword overrides win over file values."""
    data: dict = {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        try:
            if path.suffix.lower() == ".json":
                data = json.loads(text)
            else:
                try:
                    import tomllib
                except ModuleNotFoundError:  # python < 3.11
                    import tomli as tomllib
                data = tomllib.loads(text)
        except ValueError as exc:
            raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    data.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    for key in ("scales", "h_grid", "only"):
        if key in data and isinstance(data[key], list):
            data[key] = tuple(data[key])
    try:
        return RunConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class CheckResult:
    name: str
    reference: str
    measured: float
    tolerance: float
    passed: bool
    details: dict = field(default_factory=dict)
    error: str | None = None

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "reference": self.reference,
            "measured": self.measured,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "details": self.details,
            "error": self.error,
        }


@dataclass
class VerifyReport:
    config: RunConfig
    checks: list
    calibration: dict
    timings: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def infrastructure_failure(self) -> bool:
        return any(c.error is not None for c in self.checks)

    def summary(self) -> dict:
        n_pass = sum(c.passed for c in self.checks)
        return {"total": len(self.checks), "passed": n_pass, "failed": len(self.checks) - n_pass, "pass": self.passed}

    def to_json(self) -> str:
        """Deterministic JSON (sorted keys, no timings)."""
        obj = {
            "schema": SCHEMA,
            "config": self.config.as_dict(),
            "calibration": self.calibration,
            "checks": [c.as_dict() for c in sorted(self.checks, key=lambda c: c.name)],
            "notes": self.notes,
            "summary": self.summary(),
        }
        return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"

    def to_table(self) -> str:
        rows = [f"{'check':<26} {'measured':>12} {'tolerance':>12}  {'result':<6} {'time':>7}  reference"]
        for c in sorted(self.checks, key=lambda c: c.name):
            res = "ERROR" if c.error else ("PASS" if c.passed else "FAIL")
            t = self.timings.get(c.name)
            ts = f"{t:6.2f}s" if t is not None else "      -"
            rows.append(f"{c.name:<26} {c.measured:12.4e} {c.tolerance:12.4e}  {res:<6} {ts}  {c.reference}")
        s = self.summary()
        rows.append(f"{s['passed']}/{s['total']} checks passed")
        return "\n".join(rows) + "\n"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


class Context:
    """Lazily built shared objects for one verify run."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.params = MeasureParams(config.nu)
        self._cache: dict = {}

    def _get(self, key, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def grid(self):
        return self._get("grid", lambda: default_grid(self.params, self.config.r_max, self.config.refine))

    @property
    def plan(self):
        return self._get("plan", lambda: make_plan(self.params, self.grid))

    @property
    def cal(self):
        return self._get("cal", lambda: calibrate_d_constant(self.params))

    @property
    def wavelet(self):
        return self._get("wavelet", lambda: make_wavelet(self.params, self.config.wavelet, plan=self.plan))

    @property
    def wavelet2(self):
        return self._get("wavelet2", lambda: make_wavelet(self.params, "hankel_mexican:2", plan=self.plan))

    @property
    def scales(self):
        lo, hi, n = self.config.scales
        return geometric_scales(lo, hi, int(n))

    @property
    def h_grid(self):
        lo, hi, n = self.config.h_grid
        return geometric_scales(lo, hi, int(n))

    def gaussian(self, width: float) -> SampledFunction:
        return generate_test_function(("gaussian", width), self.grid)

    def besov_family(self):
        def build():
            fam = [(f"gaussian:{w}", self.gaussian(w)) for w in (0.7, 1.0, 1.5)]
            fam.append(("t2_gaussian", SampledFunction.from_callable(self.grid, lambda t: t * t * np.exp(-0.5 * t * t))))
            fam.append(("spectral_decay:1", generate_test_function("spectral_decay:1", self.grid, self.plan)))
            fam.append(("hankel_band:0:3", generate_test_function("hankel_band:0:3", self.grid, self.plan)))
            return fam

        return self._get("besov_family", build)

    def modulus_curve(self, label: str, f: SampledFunction) -> np.ndarray:
        return self._get(("curve", label), lambda: modulus_curve(self.cal, f, self.h_grid, 2.0))

    def scalogram(self, label: str, f: SampledFunction, wavelet=None):
        w = self.wavelet if wavelet is None else wavelet
        return self._get(("scalogram", label, w.name), lambda: cwt(self.plan, self.cal, f, w, self.scales))


# ---------------------------------------------------------------------------
# checks; each returns (measured, details)


def _gauss_widths():
    return (0.5, 1.0, 1.5, 2.0)


def check_fixed_point(ctx: Context):
    g = ctx.gaussian(1.0)
    fh = forward(ctx.plan, g)
    mask = ctx.grid.nodes <= 5.0
    rel = np.abs(fh.values[mask] - g.values[mask]) / np.abs(g.values[mask])
    return float(rel.max()), {"interval": [0.0, 5.0]}


def check_round_trip(ctx: Context):
    errs = {}
    for w in _gauss_widths():
        f = ctx.gaussian(w)
        back = inverse(ctx.plan, forward(ctx.plan, f))
        errs[f"gaussian:{w}"] = lp_norm(back - f, 2) / lp_norm(f, 2)
    return max(errs.values()), {"errors": errs}


def _band_pairs(ctx: Context, n: int = 10):
    rng = np.random.default_rng(ctx.config.rng_seed)
    pairs = []
    for _ in range(n):
        b1 = (rng.uniform(0.0, 0.8), rng.uniform(2.2, 4.0))
        b2 = (rng.uniform(0.0, 0.8), rng.uniform(2.2, 4.0))
        c1, c2 = rng.uniform(0.5, 2.0, size=2)
        f = generate_test_function(("hankel_band", *b1), ctx.grid, ctx.plan) * c1
        g = generate_test_function(("hankel_band", *b2), ctx.grid, ctx.plan) * c2
        pairs.append((b1, b2, f, g))
    return pairs


def check_parseval(ctx: Context):
    res = []
    for b1, b2, f, g in _band_pairs(ctx):
        rel, _ = parseval_residual(ctx.plan, f, g)
        res.append(rel)
    return max(res), {"residuals": res}


def check_normalization(ctx: Context):
    cal = ctx.cal
    return cal.calibration_residual, {
        "probes": {f"{x:g},{y:g}": r for (x, y), r in cal.probe_residuals.items()},
    }


def check_product_formula(ctx: Context):
    rng = np.random.default_rng(ctx.config.rng_seed + 1)
    res = []
    p = ctx.params
    for _ in range(20):
        x, y = rng.uniform(0.1, 4.0, size=2)
        u = rng.uniform(0.0, 5.0)
        lhs = kernel_j(p, x * u) * kernel_j(p, y * u)
        rhs = translate_callable(ctx.cal, lambda z: kernel_j(p, z * u), x, y)
        res.append(abs(float(rhs) - lhs))
    return max(res), {"count": 20}


def check_contraction(ctx: Context):
    f = ctx.gaussian(1.0)
    ratios = {}
    for y in (0.1, 1.0, 3.0):
        tf = translate(ctx.cal, f, y)
        for p in (1.0, 2.0, 4.0):
            ratios[f"p={p:g},y={y:g}"] = lp_norm(tf, p) / lp_norm(f, p)
    return max(ratios.values()), {"ratios": ratios}


def check_young(ctx: Context):
    f, g = ctx.gaussian(1.0), ctx.gaussian(0.6)
    h = convolve(ctx.cal, f, g, plan=ctx.plan)
    ratios = {}
    for p, q, r in ((1.0, 1.0, 1.0), (1.0, 2.0, 2.0), (2.0, 2.0, math.inf)):
        ratios[f"({p:g},{q:g},{r:g})"] = lp_norm(h, r) / (lp_norm(f, p) * lp_norm(g, q))
    return max(ratios.values()), {"ratios": ratios}


def check_convolution_theorem(ctx: Context):
    errs = {}
    for w1, w2 in ((1.0, 0.6), (0.8, 1.5)):
        f, g = ctx.gaussian(w1), ctx.gaussian(w2)
        spec = convolve(ctx.cal, f, g, path="spectral", plan=ctx.plan)
        direct = convolve(ctx.cal, f, g, path="direct", order=ctx.config.direct_order)
        errs[f"{w1:g}#{w2:g}"] = lp_norm(spec - direct, 2) / lp_norm(spec, 2)
    return max(errs.values()), {"discrepancies": errs}


def check_admissibility(ctx: Context):
    # spectral-side integral only; no spatial synthesis needed
    value = admissibility_constant(hankel_mexican(1), MeasureParams(1.0))
    return abs(value - 0.25), {"nu": 1.0, "value": value, "closed_form": 0.25}


def check_cwt_parseval(ctx: Context):
    f = ctx.gaussian(1.0)
    lhs, rhs = cwt_parseval(ctx.plan, ctx.cal, f, f, ctx.wavelet, ctx.scales)
    return abs(lhs - rhs) / abs(rhs), {"lhs": lhs, "rhs": rhs, "scales": len(ctx.scales)}


def _range_sweep(ctx: Context):
    lo, hi, n = ctx.config.scales
    k_max = int(round(math.log2(hi)))
    per_octave = (int(n) - 1) / math.log2(hi / lo)
    ks = list(range(1, k_max + 1))
    return [(k, geometric_scales(2.0**-k, 2.0**k, max(4, int(round(2 * k * per_octave)) + 1))) for k in ks]


def _monotone_measure(values):
    ratios = [b / a for a, b in zip(values[:-1], values[1:])]
    return max(ratios)


def check_cwt_parseval_monotone(ctx: Context):
    f = ctx.gaussian(1.0)
    res = {}
    for k, sc in _range_sweep(ctx):
        lhs, rhs = cwt_parseval(ctx.plan, ctx.cal, f, f, ctx.wavelet, sc)
        res[f"2^-{k}..2^{k}"] = abs(lhs - rhs) / abs(rhs)
    return _monotone_measure(list(res.values())), {"residuals": res}


def check_cwt_inversion(ctx: Context):
    errs = {}
    for w in (0.7, 1.0, 1.5):
        f = ctx.gaussian(w)
        rec = cwt_invert(ctx.plan, ctx.cal, cwt(ctx.plan, ctx.cal, f, ctx.wavelet, ctx.scales), ctx.wavelet)
        errs[f"gaussian:{w}"] = lp_norm(rec - f, 2) / lp_norm(f, 2)
    return max(errs.values()), {"errors": errs}


def check_cwt_inversion_monotone(ctx: Context):
    f = ctx.gaussian(1.0)
    res = {}
    for k, sc in _range_sweep(ctx):
        if k < 2:
            continue
        rec = cwt_invert(ctx.plan, ctx.cal, cwt(ctx.plan, ctx.cal, f, ctx.wavelet, sc), ctx.wavelet)
        res[f"2^-{k}..2^{k}"] = lp_norm(rec - f, 2) / lp_norm(f, 2)
    return _monotone_measure(list(res.values())), {"errors": res}


def check_sp_plancherel(ctx: Context):
    f = ctx.gaussian(1.0)
    s = cwt(ctx.plan, ctx.cal, f, ctx.wavelet, ctx.scales)
    ratio = sp_norm(s, 2.0) ** 2 / lp_norm(f, 2) ** 2
    C = ctx.wavelet.plancherel_constant
    return abs(ratio / C - 1.0), {
        "ratio": ratio,
        "plancherel_constant": C,
        "admissibility_dw": ctx.wavelet.admissibility,
        "ratio_over_admissibility_dw": ratio / ctx.wavelet.admissibility,
    }


def _besov_cells(ctx: Context):
    def build():
        out = []
        for alpha in (0.25, 0.5, 0.75):
            bp = BesovParams(alpha, 2.0, 2.0, ctx.h_grid, ctx.scales)
            for label, f in ctx.besov_family():
                r = besov_report(ctx.cal, f, ctx.wavelet, bp, ctx.scalogram(label, f), curve=ctx.modulus_curve(label, f), label=label)
                out.append(r)
        return out

    return ctx._get("besov_cells", build)


def _cell_rows(reports, side: str):
    rows = {}
    for r in reports:
        b = getattr(r, side)
        rows[f"alpha={r.params.alpha:g},{r.label}"] = {"lhs": b.lhs, "rhs": b.rhs, "constant": b.constant, "slack": b.slack}
    return rows


def check_besov_direct(ctx: Context):
    reps = _besov_cells(ctx)
    m = max(r.direct.lhs / r.direct.rhs for r in reps)
    alt = max(r.direct.lhs / r.direct.alternative["rhs_negative_power"] for r in reps)
    return m, {"cells": _cell_rows(reps, "direct"), "max_ratio_with_negative_power_moment": alt}


def check_besov_converse(ctx: Context):
    reps = _besov_cells(ctx)
    return max(r.converse.lhs / r.converse.rhs for r in reps), {"cells": _cell_rows(reps, "converse")}


def check_besov_bracket(ctx: Context):
    reps = _besov_cells(ctx)
    # position of each ratio inside its bracket in log scale: <= 1 means contained
    worst = 0.0
    rows = {}
    for r in reps:
        lo, hi = r.bracket
        pos = max(math.log(r.ratio / hi) / math.log(hi / lo), math.log(lo / r.ratio) / math.log(hi / lo)) + 1.0
        worst = max(worst, pos)
        rows[f"alpha={r.params.alpha:g},{r.label}"] = {"ratio": r.ratio, "bracket": list(r.bracket)}
    return worst, {"cells": rows}


def check_besov_alpha_15(ctx: Context):
    f = ctx.gaussian(1.0)
    fp = spectral_derivatives(ctx.plan, forward(ctx.plan, f), 1)
    bp = BesovParams(1.5, 2.0, 2.0, ctx.h_grid, ctx.scales)
    w2 = ctx.wavelet2
    r = besov_report(ctx.cal, f, w2, bp, ctx.scalogram("gaussian:1.0", f, w2), derivatives=fp)
    m = max(r.direct.lhs / r.direct.rhs, r.converse.lhs / r.converse.rhs)
    return m, {"report": r.as_dict() | {"params": {"alpha": 1.5}}, "wavelet": w2.name}


@dataclass(frozen=True)
class Check:
    name: str
    reference: str
    run: Callable


CHECKS = (
    Check("hankel.fixed_point", "Gaussian is a fixed point of the self-reciprocal Hankel transform", check_fixed_point),
    Check("hankel.round_trip", "Hankel inversion formula (transform is an involution)", check_round_trip),
    Check("hankel.parseval", "Parseval identity for the Hankel transform", check_parseval),
    Check("kernel.normalization", "unit mass of the triangle kernel D(x, y, .) against dsigma", check_normalization),
    Check("kernel.product_formula", "product formula j(xu) j(yu) = int j(zu) D(x, y, z) dsigma(z)", check_product_formula),
    Check("translation.contraction", "Hankel translation is a contraction on L^p(dsigma)", check_contraction),
    Check("convolution.young", "Young inequality for Hankel convolution, 1/p + 1/q = 1 + 1/r", check_young),
    Check("convolution.theorem", "convolution theorem: transform of f # g is the product of transforms", check_convolution_theorem),
    Check("wavelet.admissibility", "admissibility integral of w^2 exp(-w^2) at nu = 1 equals 1/4", check_admissibility),
    Check("cwt.parseval", "Parseval formula for the continuous Bessel wavelet transform", check_cwt_parseval),
    Check("cwt.parseval_monotone", "Parseval residual shrinks as the scale range widens", check_cwt_parseval_monotone),
    Check("cwt.inversion", "reconstruction formula for the continuous Bessel wavelet transform", check_cwt_inversion),
    Check("cwt.inversion_monotone", "reconstruction error shrinks as the scale range widens", check_cwt_inversion_monotone),
    Check("cwt.sp_plancherel", "S_2 norm of the transform is sqrt(C) times the L^2 norm", check_sp_plancherel),
    Check("besov.direct", "wavelet seminorm bounded by the modulus seminorm (direct inequality)", check_besov_direct),
    Check("besov.converse", "modulus seminorm bounded by the wavelet seminorm (converse inequality)", check_besov_converse),
    Check("besov.bracket", "two-sided equivalence of the seminorms as an interval", check_besov_bracket),
    Check("besov.alpha_1_5", "both inequalities at alpha = 1.5 through the derivative reduction", check_besov_alpha_15),
)


def select_checks(only=()) -> list:
    """``only`` tokens match a check name's group prefix or any substring of it."""
    if not only:
        return list(CHECKS)
    sel = [c for c in CHECKS if any(tok == c.name.split(".")[0] or tok in c.name for tok in only)]
    if not sel:
        raise ConfigError(f"--only {','.join(only)} matches no check; names: {[c.name for c in CHECKS]}")
    return sel


def run_verify(config: RunConfig) -> VerifyReport:
    checks = select_checks(config.only)
    ctx = Context(config)
    results, timings = [], {}
    for chk in sorted(checks, key=lambda c: c.name):
        tol = config.tolerance(chk.name)
        t0 = time.perf_counter()
        try:
            measured, details = chk.run(ctx)
            measured = float(measured)
            results.append(CheckResult(chk.name, chk.reference, measured, tol, bool(measured <= tol), details))
        except ParameterError:
            raise
        except Exception as exc:  # recorded, mapped to exit code 3 by the CLI
            results.append(CheckResult(chk.name, chk.reference, math.nan, tol, False, {}, f"{type(exc).__name__}: {exc}"))
        timings[chk.name] = time.perf_counter() - t0
    calibration = ctx.cal.as_dict()
    notes = {}
    if "wavelet" in ctx._cache:
        w = ctx.wavelet
        notes["wavelet"] = {
            "name": w.name,
            "admissibility_dw": w.admissibility,
            "plancherel_constant": w.plancherel_constant,
            "cancellation_order": w.cancellation_order,
        }
    return VerifyReport(config, results, calibration, timings, notes)
