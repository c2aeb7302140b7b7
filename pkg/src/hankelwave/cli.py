"""Command-line front end.

    hankelwave gen --kind gaussian:1 --out f.csv
    hankelwave hankel --in f.csv --out fhat.csv
    hankelwave convolve f.csv g.csv --out fg.csv --path direct
    hankelwave cwt --wavelet hankel_mexican:1 --scales 0.03125:32:64 --in f.csv --out s.csv
    hankelwave besov --alpha 0.5 --in f.csv --report r.json
    hankelwave verify --only parseval --json report.json
"""

from __future__ import annotations

import json
import os
import sys
from pathlib import Path

import click
import numpy as np

from .besov import BesovParams, besov_report, smoothness_exponent
from .convolution import convolve
from .errors import HankelWaveError, ParameterError
from .hankel import forward, parseval_residual, plan as make_plan
from .kernels import calibrate_d_constant
from .measure import DEFAULT_SEGMENTS, MeasureParams, SampledFunction, default_grid
from .testfunctions import generate_test_function
from .verify import ConfigError, RunConfig, load_config, run_verify
from .wavelet import cwt, geometric_scales, make_wavelet, spectral_derivatives

__all__ = ["main"]

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_INFRA = 0, 1, 2, 3
PARSEVAL_SELF_CHECK = 1e-5


class State:
    def __init__(self, config: RunConfig, seed: int):
        self.config = config
        self.seed = seed
        self.params = MeasureParams(config.nu)

    def grid(self, r_max: float | None = None, panels: int | None = None):
        r = self.config.r_max if r_max is None else r_max
        refine = self.config.refine
        if panels is not None:
            n_default = DEFAULT_SEGMENTS[0][2] + DEFAULT_SEGMENTS[1][2] * (r - 0.5) / 39.5
            refine = panels / n_default
        return default_grid(self.params, r, refine)


def _fail(code: int, msg: str):
    click.echo(f"error: {msg}", err=True)
    sys.exit(code)


def _guard(fn):
    """Map library errors onto the documented exit codes."""

    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ConfigError, ParameterError) as exc:
            _fail(EXIT_CONFIG, str(exc))
        except HankelWaveError as exc:
            _fail(EXIT_INFRA, f"{type(exc).__name__}: {exc}")
        except OSError as exc:
            _fail(EXIT_CONFIG, str(exc))

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def _read(path: str, grid) -> SampledFunction:
    return SampledFunction.from_csv(Path(path).read_text(), grid)


def _write(path: str | None, text: str):
    if path is None or path == "-":
        click.echo(text, nl=False)
    else:
        Path(path).write_text(text)


def _parse_scales(text: str) -> np.ndarray:
    try:
        lo, hi, n = text.split(":")
        return geometric_scales(float(lo), float(hi), int(n))
    except ValueError as exc:
        raise ParameterError(f"--scales expects a_min:a_max:count, got {text!r}") from exc


@click.group()
@click.option("--nu", type=float, default=None, help="Bessel index nu (> 0). Default 1.")
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="TOML or JSON run config.")
@click.option("--seed", type=int, default=None, help="RNG seed for generated data.")
@click.pass_context
def main(ctx, nu, config_path, seed):
    """Hankel transform, Hankel convolution, Bessel wavelets and Besov-Hankel seminorms."""
    try:
        config = load_config(config_path, nu=nu, rng_seed=seed)
        state = State(config, config.rng_seed)
    except (ConfigError, ParameterError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    ctx.obj = state


@main.command()
@click.option("--kind", required=True, help="gaussian:w | hankel_band:lo:hi | spectral_decay:rate | noise:seed")
@click.option("--out", "out", default=None, help="Output path (CSV, or JSON if it ends in .json).")
@click.option("--rmax", type=float, default=None)
@click.pass_obj
@_guard
def gen(state: State, kind, out, rmax):
    """Sample a test function on the default grid."""
    grid = state.grid(rmax)
    f = generate_test_function(kind, grid, seed=state.seed)
    _write(out, f.to_json() + "\n" if out and out.endswith(".json") else f.to_csv())


@main.command()
@click.option("--in", "inp", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", default=None)
@click.option("--rmax", type=float, default=None)
@click.option("--panels", type=int, default=None, help="Total panel count (scales the default grid).")
@click.pass_obj
@_guard
def hankel(state: State, inp, out, rmax, panels):
    """Forward Hankel transform of a CSV profile, with a Parseval self-check."""
    grid = state.grid(rmax, panels)
    p = make_plan(state.params, grid)
    f = _read(inp, grid)
    fh = forward(p, f)
    rel, _ = parseval_residual(p, f, f)
    _write(out, fh.to_csv())
    click.echo(f"parseval self-check residual {rel:.3e}", err=True)
    if rel > PARSEVAL_SELF_CHECK:
        _fail(EXIT_CHECK, f"Parseval self-check residual {rel:.3e} exceeds {PARSEVAL_SELF_CHECK:g}")


@main.command(name="convolve")
@click.argument("f_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("g_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", default=None)
@click.option("--path", "path", type=click.Choice(["direct", "spectral"]), default="spectral", show_default=True)
@click.option("--order", type=int, default=None, help="Gauss-Jacobi order for the direct path.")
@click.pass_obj
@_guard
def convolve_cmd(state: State, f_path, g_path, out, path, order):
    """Hankel convolution of two CSV profiles."""
    grid = state.grid()
    f, g = _read(f_path, grid), _read(g_path, grid)
    cal = calibrate_d_constant(state.params)
    p = make_plan(state.params, grid) if path == "spectral" else None
    h = convolve(cal, f, g, path=path, plan=p, order=order or (16 if path == "direct" else None))
    _write(out, h.to_csv())


@main.command(name="cwt")
@click.option("--in", "inp", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out", default=None)
@click.option("--wavelet", default=None, help="hankel_mexican:n")
@click.option("--scales", default=None, help="a_min:a_max:count (geometric).")
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default=None, help="Default: from --out suffix, else csv.")
@click.pass_obj
@_guard
def cwt_cmd(state: State, inp, out, wavelet, scales, fmt):
    """Continuous Bessel wavelet transform; scalogram as CSV (a,b,coeff) or JSON."""
    grid = state.grid()
    p = make_plan(state.params, grid)
    w = make_wavelet(state.params, wavelet or state.config.wavelet, plan=p, n_derivatives=0)
    sc = _parse_scales(scales) if scales else geometric_scales(*state.config.scales[:2], int(state.config.scales[2]))
    s = cwt(p, None, _read(inp, grid), w, sc)
    fmt = fmt or ("json" if out and out.endswith(".json") else "csv")
    _write(out, s.to_json() + "\n" if fmt == "json" else s.to_csv())


@main.command()
@click.option("--alpha", type=float, required=True)
@click.option("--p", "p_exp", type=float, default=2.0, show_default=True)
@click.option("--q", "q_exp", type=float, default=2.0, show_default=True)
@click.option("--wavelet", default=None, help="hankel_mexican:n (default: enough cancellations for alpha)")
@click.option("--in", "inp", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--report", "report", default=None, help="JSON report path (stdout if omitted).")
@click.pass_obj
@_guard
def besov(state: State, alpha, p_exp, q_exp, wavelet, inp, report):
    """Besov-Hankel seminorms two ways, with the direct and converse bound checks."""
    grid = state.grid()
    p = make_plan(state.params, grid)
    cal = calibrate_d_constant(state.params)
    lo, hi, n = state.config.h_grid
    slo, shi, sn = state.config.scales
    bp = BesovParams(alpha, p_exp, q_exp, geometric_scales(lo, hi, int(n)), geometric_scales(slo, shi, int(sn)))
    wid = wavelet or f"hankel_mexican:{bp.alpha_int + 1}"
    w = make_wavelet(state.params, wid, plan=p)
    f = _read(inp, grid)
    derivs = spectral_derivatives(p, forward(p, f), bp.alpha_int) if bp.alpha_int else None
    s = cwt(p, cal, f, w, bp.scale_grid)
    r = besov_report(cal, f, w, bp, s, derivatives=derivs, label=Path(inp).name)
    obj = r.as_dict()
    obj["schema"] = 1
    obj["nu"] = state.params.nu
    obj["wavelet"] = w.name
    obj["grid"] = grid.spec()
    slope = smoothness_exponent(s, p_exp)
    obj["smoothness_exponent"] = slope.slope
    from .verify import _jsonable

    _write(report, json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n")


@main.command()
@click.option("--only", multiple=True, help="Check group or name substring; repeat or comma-separate.")
@click.option("--json", "json_out", default=None, help="Write the JSON report here.")
@click.option("--table", "table_out", default=None, help="Write the text table here (default stdout).")
@click.option("--calibration-out", default=None, help="Write the D-kernel calibration report here.")
@click.option("--tolerance", "tol", multiple=True, help="Override a tolerance: name=value.")
@click.pass_obj
def verify(state: State, only, json_out, table_out, calibration_out, tol):
    """Run the property suite; exit 0 pass, 1 check failure, 2 config error, 3 infrastructure failure."""
    try:
        tokens = tuple(t for o in only for t in o.split(",") if t)
        overrides = dict(state.config.tolerances)
        for item in tol:
            name, _, val = item.partition("=")
            try:
                overrides[name.strip()] = float(val)
            except ValueError as exc:
                raise ConfigError(f"bad --tolerance {item!r}") from exc
        cfg = load_config(None, **{**state.config.as_dict(), "tolerances": overrides, "only": tokens or state.config.only})
        report = run_verify(cfg)
    except (ConfigError, ParameterError) as exc:
        _fail(EXIT_CONFIG, str(exc))
    except Exception as exc:
        _fail(EXIT_INFRA, f"{type(exc).__name__}: {exc}")
    table = report.to_table()
    if table_out:
        Path(table_out).write_text(table)
    else:
        color = not os.environ.get("NO_COLOR")
        for line in table.splitlines():
            fg = "red" if (" FAIL " in line or " ERROR " in line) else None
            click.secho(line, fg=fg if color else None)
    if json_out:
        Path(json_out).write_text(report.to_json())
    if calibration_out:
        Path(calibration_out).write_text(json.dumps(report.calibration, sort_keys=True, indent=2) + "\n")
    if report.infrastructure_failure:
        sys.exit(EXIT_INFRA)
    sys.exit(EXIT_OK if report.passed else EXIT_CHECK)


if __name__ == "__main__":
    main()
