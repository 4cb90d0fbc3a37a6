"""Command-line frontend: figure-ready CSV/JSON data for every computation.

Every command is deterministic given its effective configuration, which is
resolved as flags > config file > built-in defaults and echoed into a JSON
manifest next to each output.  Output files are written atomically (temp
file + rename).  Exit codes: 0 success, 2 configuration error, 3
accuracy/convergence error.
"""

from __future__ import annotations

import functools
import hashlib
import json
import math
import os
import re
import sys
import tempfile

import click
import numpy as np

from . import bell
from . import sampling as smp
from . import states as st
from . import tomography as tg
from .errors import AccuracyError, ConfigError, DomainError

FIG3A_ANGLES = ("pi/2", "-pi/4", "0", "-3pi/4")  # theta1, theta2, theta1p, theta2p

_ANGLE_RE = re.compile(
    r"^\s*([+-]?)\s*(\d+(?:\.\d+)?)?\s*\*?\s*pi\s*(?:/\s*(\d+(?:\.\d+)?))?\s*$",
    re.IGNORECASE,
)


def parse_angle(text) -> float:
    """Parse '0.7', 'pi', '-pi/2', '3pi/4', '-3*pi/4' into radians."""
    text = str(text).strip()
    m = _ANGLE_RE.match(text)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        return sign * num * math.pi / den
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse angle {text!r}") from None


def parse_values(text) -> list[float]:
    """Parse '0.2,0.54,0.96' (braces tolerated) or 'a:b:step' into a list."""
    text = str(text).strip().strip("{}")
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"range spec must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0 or stop < start:
            raise ConfigError(f"bad range spec {text!r}")
        n = int(round((stop - start) / step))
        return [start + i * step for i in range(n + 1) if start + i * step <= stop + 1e-12]
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse values {text!r}") from None


def parse_named_angles(text, names) -> dict[str, float]:
    """Parse 'tv=0,tup=pi,tvp=pi/2' against an allowed name set."""
    out = {}
    for item in str(text).split(","):
        if not item.strip():
            continue
        if "=" not in item:
            raise ConfigError(f"angle assignment must look like name=value, got {item!r}")
        key, val = item.split("=", 1)
        key = key.strip()
        if key not in names:
            raise ConfigError(f"unknown angle name {key!r}, expected one of {sorted(names)}")
        out[key] = parse_angle(val)
    return out


def load_config_file(path) -> dict[str, str]:
    """Flat key = value text file; '#' starts a comment."""
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    if "lambda" in values:  # flag spelling; the parameter is named lam
        values.setdefault("lam", values["lambda"])
    return values


def atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def format_float(x: float) -> str:
    return f"{x:.12g}"


def write_csv(path: str, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def write_json(path: str, payload: dict) -> None:
    atomic_write_text(path, json.dumps(payload, indent=2, sort_keys=True) + "\n")


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def cli_guard(func):
    """Map package exceptions to the documented exit codes."""

    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (DomainError, ConfigError) as exc:
            click.echo(f"configuration error: {exc}", err=True)
            sys.exit(2)
        except AccuracyError as exc:
            click.echo(f"accuracy error: {exc}", err=True)
            sys.exit(3)

    return wrapper


def resolve(ctx, name, flag_value, cast=str):
    """flags > config file > default (the click default lands here too)."""
    source = ctx.get_parameter_source(name)
    file_values = ctx.obj.get("config_values", {}) if ctx.obj else {}
    if source is not None and source.name == "COMMANDLINE":
        return flag_value
    if name in file_values:
        raw = file_values[name]
        try:
            return cast(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"config file value {name}={raw!r}: {exc}") from None
    return flag_value


def resolve_many(ctx, casts: dict, values: dict) -> dict:
    """Apply the flag > config > default precedence to a set of parameters."""
    return {
        name: resolve(ctx, name, values[name], cast) for name, cast in casts.items()
    }


def build_state(kind, lam, n, r):
    if kind == "epr":
        if lam is None:
            raise ConfigError("--state epr requires --lambda in [0, 1)")
        return st.SqueezedVacuum(lam)
    if kind == "fock-pair":
        if n is None:
            raise ConfigError("--state fock-pair requires --n >= 1")
        return st.FockPairSuperposition(n)
    if kind == "pair-coherent":
        if r is None:
            raise ConfigError("--state pair-coherent requires --r > 0")
        return st.PairCoherent(r)
    raise ConfigError(f"unknown state kind {kind!r}")


def state_params(state) -> dict:
    if isinstance(state, st.SqueezedVacuum):
        return {"kind": "epr", "lambda": state.lam}
    if isinstance(state, st.FockPairSuperposition):
        return {"kind": "fock-pair", "n": state.n}
    if isinstance(state, st.PairCoherent):
        return {"kind": "pair-coherent", "r": state.r}
    return {"kind": type(state).__name__}


def manifest_for(out_path: str, command: str, config: dict, extras: dict | None = None) -> None:
    payload = {
        "command": command,
        "effective_config": config,
        "outputs": {os.path.basename(out_path): sha256_file(out_path)},
    }
    if extras:
        payload.update(extras)
    write_json(out_path + ".manifest.json", payload)


_STATE_OPTIONS = [
    click.option("--state", "kind", type=click.Choice(["epr", "fock-pair", "pair-coherent"]), required=True),
    click.option("--lambda", "lam", type=float, default=None, help="squeezed-vacuum lambda = tanh(s)"),
    click.option("--n", type=int, default=None, help="Fock-pair excitation number"),
    click.option("--r", type=float, default=None, help="pair-coherent amplitude"),
]


def state_options(func):
    for opt in reversed(_STATE_OPTIONS):
        func = opt(func)
    return func


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="key = value file; flags override it")
@click.version_option()
@click.pass_context
def main(ctx, config_path):
    """Tomographic and pseudospin CHSH tests for two-mode states."""
    ctx.ensure_object(dict)
    ctx.obj["config_values"] = load_config_file(config_path) if config_path else {}


@main.command("tomogram")
@state_options
@click.option("--theta1", default="0", help="homodyne angle of mode 1")
@click.option("--theta2", default="0", help="homodyne angle of mode 2")
@click.option("--x-max", type=float, default=2.0)
@click.option("--x-steps", type=int, default=9)
@click.option("--check-radon", is_flag=True, help="cross-check against the numeric Radon projection")
@click.option("--tol", type=float, default=1e-6, help="pass threshold for --check-radon")
@click.option("-o", "--out", default="tomogram.csv", show_default=True)
@click.pass_context
@cli_guard
def cmd_tomogram(ctx, kind, lam, n, r, theta1, theta2, x_max, x_steps, check_radon, tol, out):
    """Closed-form tomogram on an (X1, X2) grid, optional Radon cross-check."""
    p = resolve_many(
        ctx,
        {"lam": float, "n": int, "r": float, "theta1": str, "theta2": str,
         "x_max": float, "x_steps": int, "tol": float},
        dict(lam=lam, n=n, r=r, theta1=theta1, theta2=theta2, x_max=x_max,
             x_steps=x_steps, tol=tol),
    )
    lam, n, r, x_max, x_steps, tol = (
        p["lam"], p["n"], p["r"], p["x_max"], p["x_steps"], p["tol"]
    )
    state = build_state(kind, lam, n, r)
    t1 = parse_angle(p["theta1"])
    t2 = parse_angle(p["theta2"])
    xs = np.linspace(-x_max, x_max, x_steps)

    closed = tg.tomogram_closed_form(state, xs[:, None], t1, xs[None, :], t2)
    header = ["x1", "x2", "theta1", "theta2", "w_closed"]
    radon = None
    if check_radon:
        radon = tg.radon_forward(state, xs[:, None], t1, xs[None, :], t2)
        header.append("w_radon")
    rows = []
    for i, x1 in enumerate(xs):
        for j, x2 in enumerate(xs):
            row = [float(x1), float(x2), t1, t2, float(closed[i, j])]
            if radon is not None:
                row.append(float(radon[i, j]))
            rows.append(row)
    write_csv(out, header, rows)

    config = {
        "state": state_params(state), "theta1": t1, "theta2": t2,
        "x_max": x_max, "x_steps": x_steps, "check_radon": check_radon, "tol": tol,
    }
    extras = {}
    if check_radon:
        max_diff = float(np.max(np.abs(closed - radon)))
        extras["max_abs_difference"] = max_diff
        click.echo(f"max |closed - radon| = {max_diff:.3e}")
        manifest_for(out, "tomogram", config, extras)
        if max_diff >= tol:
            click.echo(f"accuracy error: Radon cross-check exceeds {tol}", err=True)
            sys.exit(3)
        return
    manifest_for(out, "tomogram", config, extras)


@main.command("probs")
@click.option("--state", "kind", type=click.Choice(["epr", "fock-pair", "pair-coherent"]),
              required=True)
@click.option("--lambda", "lam", default=None, help="lambda value or comma list")
@click.option("--n", default=None, help="n value or comma list")
@click.option("--r", default=None, help="r value or comma list")
@click.option("--theta-sum", default="0:6.283185307179586:360", show_default=True,
              help="theta1+theta2 grid as start:stop:step or a comma list")
@click.option("--theta2", default="0", help="fixed theta2 (theta1 carries the sweep)")
@click.option("-o", "--out", default="probs.csv", show_default=True)
@click.pass_context
@cli_guard
def cmd_probs(ctx, kind, lam, n, r, theta_sum, theta2, out):
    """Sign-binned probabilities w_pp, w_pm, w_mp, w_mm along an angle sweep.

    The state parameter may be a comma list (e.g. --lambda 0.20,0.54,0.96);
    one CSV block per value.
    """
    p = resolve_many(
        ctx,
        {"lam": str, "n": str, "r": str, "theta_sum": str, "theta2": str},
        dict(lam=lam, n=n, r=r, theta_sum=theta_sum, theta2=theta2),
    )
    t2 = parse_angle(p["theta2"])
    sums = parse_values(p["theta_sum"])
    param_flag = {"epr": p["lam"], "fock-pair": p["n"], "pair-coherent": p["r"]}[kind]
    if param_flag is None:
        raise ConfigError(f"--state {kind} needs its parameter flag")
    values = parse_values(str(param_flag))

    rows = []
    for value in values:
        state = build_state(
            kind,
            value if kind == "epr" else None,
            int(value) if kind == "fock-pair" else None,
            value if kind == "pair-coherent" else None,
        )
        for s in sums:
            probs = tg.sign_binned_closed_form(state, s - t2, t2)
            rows.append([value, probs.theta1, probs.theta2, *probs.as_tuple()])
    write_csv(out, ["param", "theta1", "theta2", "w_pp", "w_pm", "w_mp", "w_mm"], rows)
    manifest_for(out, "probs", {
        "state_kind": kind, "param_values": values, "theta2": t2,
        "theta_sum_count": len(sums),
    })


@main.command("bell-scan")
@click.option("--state", "kind", type=click.Choice(["epr", "fock-pair", "pair-coherent"]),
              required=True)
@click.option("--lambda", "lam", default=None, help="lambda sweep: start:stop:step or comma list")
@click.option("--n", default=None, help="n sweep: start:stop:step or comma list")
@click.option("--r", default=None, help="r sweep: start:stop:step or comma list")
@click.option("--mode", type=click.Choice(["tomographic", "pseudospin", "both"]), default="both",
              show_default=True)
@click.option("--angles", default="t1=pi/2,t2=-pi/4,t1p=0,t2p=-3pi/4", show_default=True,
              help="homodyne angles for the tomographic CHSH")
@click.option("--ps-angles", default="tv=pi/4,tup=-pi/2,tvp=-pi/4", show_default=True,
              help="fixed pseudospin angles; theta_u is maximized over a grid")
@click.option("--theta-u-steps", type=int, default=361, show_default=True)
@click.option("--cutoff", type=int, default=32, show_default=True,
              help="Fock cutoff for the pair-coherent pseudospin oracle")
@click.option("--quad-order", type=int, default=96, show_default=True)
@click.option("-o", "--out", default="bell_scan.csv", show_default=True)
@click.option("--summary", default=None, help="JSON summary path (default OUT.summary.json)")
@click.pass_context
@cli_guard
def cmd_bell_scan(ctx, kind, lam, n, r, mode, angles, ps_angles, theta_u_steps,
                  cutoff, quad_order, out, summary):
    """B (tomographic) and calB (pseudospin) along a state-parameter sweep.

    The sweep rides the state parameter flag, e.g.
    ``bell-scan --state pair-coherent --r 0.5:1.5:0.01``.
    """
    p = resolve_many(
        ctx,
        {"lam": str, "n": str, "r": str, "angles": str, "ps_angles": str,
         "theta_u_steps": int, "cutoff": int, "quad_order": int},
        dict(lam=lam, n=n, r=r, angles=angles, ps_angles=ps_angles,
             theta_u_steps=theta_u_steps, cutoff=cutoff, quad_order=quad_order),
    )
    theta_u_steps, cutoff, quad_order = p["theta_u_steps"], p["cutoff"], p["quad_order"]
    sweep_flag = {"epr": p["lam"], "fock-pair": p["n"], "pair-coherent": p["r"]}[kind]
    if sweep_flag is None:
        raise ConfigError(f"--state {kind} needs its parameter flag carrying the sweep")
    sweep_vals = parse_values(str(sweep_flag))
    named = parse_named_angles(p["angles"], {"t1", "t2", "t1p", "t2p"})
    quad = bell.BellAnglesQuadrature(
        named.get("t1", math.pi / 2), named.get("t1p", 0.0),
        named.get("t2", -math.pi / 4), named.get("t2p", -3 * math.pi / 4),
    )
    ps = parse_named_angles(p["ps_angles"], {"tv", "tup", "tvp"})
    tv, tup, tvp = ps.get("tv", math.pi / 4), ps.get("tup", -math.pi / 2), ps.get("tvp", -math.pi / 4)
    tu_grid = np.linspace(0.0, 2.0 * math.pi, theta_u_steps)

    do_tomo = mode in ("tomographic", "both")
    do_ps = mode in ("pseudospin", "both")
    header = ["param", "theta1", "theta2", "theta1p", "theta2p"]
    if do_tomo:
        header.append("B_tomographic")
    if do_ps:
        header += ["B_pseudospin_max", "theta_u_argmax"]

    rows = []
    tomo_series, ps_series = [], []
    for value in sweep_vals:
        state = build_state(
            kind,
            value if kind == "epr" else None,
            int(round(value)) if kind == "fock-pair" else None,
            value if kind == "pair-coherent" else None,
        )
        row = [value, quad.theta1, quad.theta2, quad.theta1p, quad.theta2p]
        if do_tomo:
            def e_tomo(a, b):
                return bell.correlation_tomographic(
                    tg.sign_binned_closed_form(state, a, b, order=quad_order))
            b_val = bell.chsh(*[e_tomo(a, b) for a, b in quad.pairs()])
            row.append(b_val)
            tomo_series.append(b_val)
        if do_ps:
            corr = _pseudospin_correlation_fn(state, cutoff)
            vals = np.array([
                bell.chsh(corr(tu, tv), corr(tu, tvp), corr(tup, tv), corr(tup, tvp))
                for tu in tu_grid
            ])
            best = int(np.argmax(vals))
            row += [float(vals[best]), float(tu_grid[best])]
            ps_series.append(float(vals[best]))
        rows.append(row)
    write_csv(out, header, rows)

    config = {
        "state_kind": kind, "sweep": sweep_vals, "mode": mode,
        "angles": {"theta1": quad.theta1, "theta2": quad.theta2,
                   "theta1p": quad.theta1p, "theta2p": quad.theta2p},
        "ps_angles": {"theta_v": tv, "theta_up": tup, "theta_vp": tvp},
        "cutoff": cutoff, "quad_order": quad_order,
    }
    extras = {}
    if do_tomo:
        extras["tomographic"] = _series_summary(sweep_vals, tomo_series)
    if do_ps:
        extras["pseudospin"] = _series_summary(sweep_vals, ps_series)
    summary_path = summary or out + ".summary.json"
    write_json(summary_path, {"method": mode, "effective_config": config, **extras})
    manifest_for(out, "bell-scan", config, extras)
    for label in ("tomographic", "pseudospin"):
        if label in extras and extras[label]["violating_intervals"]:
            click.echo(f"{label}: B > 2 on {extras[label]['violating_intervals']}")


def _series_summary(params, values) -> dict:
    values = list(values)
    best = int(np.argmax(values))
    intervals = []
    inside = False
    start = None
    for p, v in zip(params, values):
        if v > 2.0 and not inside:
            inside, start = True, p
        elif v <= 2.0 and inside:
            intervals.append([start, prev_p])
            inside = False
        prev_p = p
    if inside:
        intervals.append([start, params[-1]])
    return {
        "max_B": float(values[best]),
        "argmax_param": float(params[best]),
        "violating_intervals": intervals,
    }


def _pseudospin_correlation_fn(state, cutoff):
    """Closed form for the EPR/Fock-pair states; Fock oracle for pair-coherent.

    The pair-coherent Bessel-ratio coefficient exceeds 1 near r = 1.05, so
    its curve is generated from the density-matrix expectation instead (the
    discrepancy is reported by `tomobell.bell.pair_coherent_sx_report`).
    """
    if isinstance(state, st.PairCoherent):
        dm = st.density_matrix(state, cutoff)
        xval = bell.correlation_pseudospin(dm, [1, 0, 0], [1, 0, 0])
        zval = bell.correlation_pseudospin(dm, [0, 0, 1], [0, 0, 1])

        def corr(tu, tv_):
            return zval * math.cos(tu) * math.cos(tv_) + xval * math.sin(tu) * math.sin(tv_)

        return corr
    return lambda tu, tv_: bell.closed_form_correlation(state, tu, tv_)


@main.command("pseudospin")
@click.option("--state", "kind", type=click.Choice(["epr", "fock-pair", "pair-coherent"]),
              default=None, help="benchmark state (or use --dm)")
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--n", type=int, default=None)
@click.option("--r", type=float, default=None)
@click.option("--dm", "dm_path", type=click.Path(exists=True), default=None,
              help="two-mode density-matrix JSON instead of --state")
@click.option("--cutoff", type=int, default=64, show_default=True)
@click.option("--angles", default="tv=0,tup=pi,tvp=pi/2", show_default=True)
@click.option("--theta-u-steps", type=int, default=361, show_default=True)
@click.option("--source", type=click.Choice(["auto", "closed", "fock"]), default="auto",
              show_default=True, help="correlation source for benchmark states")
@click.option("--dump-dm", default=None, help="write the density matrix used to this JSON path")
@click.option("-o", "--out", default="pseudospin.csv", show_default=True)
@click.pass_context
@cli_guard
def cmd_pseudospin(ctx, kind, lam, n, r, dm_path, cutoff, angles, theta_u_steps, source,
                   dump_dm, out):
    """calB(theta_u) curve at fixed theta_v, theta_u', theta_v'."""
    p = resolve_many(
        ctx,
        {"angles": str, "cutoff": int, "theta_u_steps": int, "source": str},
        dict(angles=angles, cutoff=cutoff, theta_u_steps=theta_u_steps, source=source),
    )
    named = parse_named_angles(p["angles"], {"tv", "tup", "tvp"})
    tv, tup, tvp = named.get("tv", 0.0), named.get("tup", math.pi), named.get("tvp", math.pi / 2)
    cutoff, theta_u_steps, source = p["cutoff"], p["theta_u_steps"], p["source"]

    if dm_path is not None:
        dm = st.DensityMatrix.load(dm_path)
        corr = _fock_correlation_fn(dm)
        label = {"kind": "explicit-fock", "path": dm_path}
    else:
        if kind is None:
            raise ConfigError("pseudospin needs either --state or --dm")
        state = build_state(kind, lam, n, r)
        label = state_params(state)
        use_fock = source == "fock" or (source == "auto" and isinstance(state, st.PairCoherent))
        if use_fock:
            dm = st.density_matrix(state, cutoff)
            corr = _fock_correlation_fn(dm)
        else:
            dm = None
            corr = lambda tu, tv_: bell.closed_form_correlation(state, tu, tv_)
        if dump_dm:
            (dm or st.density_matrix(state, cutoff)).save(dump_dm)

    tu_grid = np.linspace(0.0, 2.0 * math.pi, theta_u_steps)
    rows = []
    for tu in tu_grid:
        b_val = bell.chsh(corr(tu, tv), corr(tu, tvp), corr(tup, tv), corr(tup, tvp))
        rows.append([float(tu), b_val])
    write_csv(out, ["theta_u", "B"], rows)
    best = max(rows, key=lambda row: row[1])
    manifest_for(out, "pseudospin", {
        "state": label, "cutoff": cutoff, "source": source,
        "theta_v": tv, "theta_up": tup, "theta_vp": tvp, "theta_u_steps": theta_u_steps,
    }, {"max_B": best[1], "theta_u_argmax": best[0]})
    click.echo(f"max calB = {best[1]:.6f} at theta_u = {best[0]:.6f}")


def _fock_correlation_fn(dm):
    def corr(tu, tv_):
        u = [math.sin(tu), 0.0, math.cos(tu)]
        v = [math.sin(tv_), 0.0, math.cos(tv_)]
        return bell.correlation_pseudospin(dm, u, v)

    return corr


@main.command("optimize")
@state_options
@click.option("--mode", type=click.Choice(["tomographic", "pseudospin"]), default="tomographic",
              show_default=True)
@click.option("--cutoff", type=int, default=32, show_default=True)
@click.option("--grid-points", type=int, default=24, show_default=True)
@click.option("--quad-order", type=int, default=96, show_default=True)
@click.option("-o", "--out", default="optimize.json", show_default=True)
@click.pass_context
@cli_guard
def cmd_optimize(ctx, kind, lam, n, r, mode, cutoff, grid_points, quad_order, out):
    """Maximize the CHSH value over the four measurement angles."""
    p = resolve_many(
        ctx,
        {"lam": float, "n": int, "r": float, "cutoff": int, "grid_points": int,
         "quad_order": int},
        dict(lam=lam, n=n, r=r, cutoff=cutoff, grid_points=grid_points,
             quad_order=quad_order),
    )
    lam, n, r, cutoff = p["lam"], p["n"], p["r"], p["cutoff"]
    grid_points, quad_order = p["grid_points"], p["quad_order"]
    state = build_state(kind, lam, n, r)
    if mode == "tomographic":
        def corr(t1, t2):
            return bell.correlation_tomographic(
                tg.sign_binned_closed_form(state, t1, t2, order=quad_order))
    else:
        corr = _pseudospin_correlation_fn(state, cutoff)
    angles, value = bell.maximize_chsh(corr, grid_points=grid_points)
    reduced = angles.reduced()
    payload = {
        "method": mode,
        "state": state_params(state),
        "max_B": value,
        "argmax_angles": {
            "theta1": reduced.theta1, "theta1p": reduced.theta1p,
            "theta2": reduced.theta2, "theta2p": reduced.theta2p,
        },
        "effective_config": {"grid_points": grid_points, "cutoff": cutoff,
                             "quad_order": quad_order},
    }
    write_json(out, payload)
    click.echo(f"max B = {value:.8f}")


@main.command("sample")
@state_options
@click.option("--theta1", default="0")
@click.option("--theta2", default="0")
@click.option("--count", type=int, default=100000, show_default=True)
@click.option("--seed", type=int, default=20240901, show_default=True)
@click.option("-o", "--out", default="batch.csv", show_default=True)
@click.pass_context
@cli_guard
def cmd_sample(ctx, kind, lam, n, r, theta1, theta2, count, seed, out):
    """Seeded Monte Carlo homodyne batch; CSV (X1, X2) plus JSON sidecar."""
    p = resolve_many(
        ctx,
        {"lam": float, "n": int, "r": float, "theta1": str, "theta2": str,
         "count": int, "seed": int},
        dict(lam=lam, n=n, r=r, theta1=theta1, theta2=theta2, count=count, seed=seed),
    )
    state = build_state(kind, p["lam"], p["n"], p["r"])
    t1 = parse_angle(p["theta1"])
    t2 = parse_angle(p["theta2"])
    count, seed = p["count"], p["seed"]
    batch = smp.sample_state(state, t1, t2, count, seed)
    est = smp.estimate_probs(batch)
    write_csv(out, ["X1", "X2"], [[float(a), float(b)] for a, b in batch.pairs])
    sidecar = {
        "state": state_params(state),
        "theta1": t1,
        "theta2": t2,
        "seed": seed,
        "count": count,
        "acceptance_rate": batch.acceptance_rate,
        "estimated_probs": {
            "w_pp": est.probs.w_pp, "w_pm": est.probs.w_pm,
            "w_mp": est.probs.w_mp, "w_mm": est.probs.w_mm,
        },
        "standard_errors": dict(zip(("w_pp", "w_pm", "w_mp", "w_mm"), est.errors())),
    }
    write_json(os.path.splitext(out)[0] + ".json", sidecar)
    manifest_for(out, "sample", sidecar)


@main.command("reconstruct")
@click.option("--tomogram", "tomogram_kind",
              type=click.Choice(["vacuum", "single-photon", "epr-marginal"]), required=True)
@click.option("--lambda", "lam", type=float, default=None, help="lambda for epr-marginal")
@click.option("--cutoff", type=int, default=6, show_default=True)
@click.option("-o", "--out", default="rho.json", show_default=True)
@click.pass_context
@cli_guard
def cmd_reconstruct(ctx, tomogram_kind, lam, cutoff, out):
    """Kernel reconstruction of a single-mode density matrix from a tomogram."""
    p = resolve_many(ctx, {"lam": float, "cutoff": int}, dict(lam=lam, cutoff=cutoff))
    lam, cutoff = p["lam"], p["cutoff"]
    if tomogram_kind == "vacuum":
        fn = tg.vacuum_quadrature_density
    elif tomogram_kind == "single-photon":
        fn = functools.partial(tg.fock_quadrature_density, 1)
    else:
        if lam is None:
            raise ConfigError("--tomogram epr-marginal requires --lambda")
        fn = functools.partial(tg.epr_marginal_density, lam)
    rho, diagnostics = tg.kernel_reconstruct_density(fn, cutoff)
    i_idx, j_idx = np.nonzero(np.abs(rho) > 1e-14)
    payload = {
        "cutoff": cutoff,
        "entries": [
            [int(i), int(j), float(rho[i, j].real), float(rho[i, j].imag)]
            for i, j in zip(i_idx, j_idx)
        ],
        "trace_deficit": 1.0 - float(rho.diagonal().real.sum()),
        "diagnostics": diagnostics,
        "effective_config": {"tomogram": tomogram_kind, "lambda": lam, "cutoff": cutoff},
    }
    write_json(out, payload)
    click.echo(f"trace = {rho.diagonal().real.sum():.6f}")


@main.command("figures")
@click.option("--out-dir", default="figures", show_default=True)
@click.option("--points", type=int, default=360, show_default=True,
              help="angle-grid density for the curve datasets")
@click.option("--r-sweep", default="0.5:1.5:0.01", show_default=True)
@click.option("--cutoff", type=int, default=64, show_default=True)
@click.pass_context
@cli_guard
def cmd_figures(ctx, out_dir, points, r_sweep, cutoff):
    """Regenerate all six figure datasets at the published parameters."""
    p = resolve_many(
        ctx,
        {"points": int, "r_sweep": str, "cutoff": int},
        dict(points=points, r_sweep=r_sweep, cutoff=cutoff),
    )
    points, r_sweep, cutoff = p["points"], p["r_sweep"], p["cutoff"]
    os.makedirs(out_dir, exist_ok=True)
    theta_grid = np.linspace(0.0, 2.0 * math.pi, points, endpoint=False)
    tu_grid = np.linspace(0.0, 2.0 * math.pi, points + 1)
    files = {}

    # fig1a / fig2a: w_pp etc. vs theta1 + theta2
    for name, state_list, param_name in (
        ("fig1a", [st.SqueezedVacuum(v) for v in (0.20, 0.54, 0.96)], "lambda"),
        ("fig2a", [st.FockPairSuperposition(v) for v in (1, 3, 5)], "n"),
    ):
        rows = []
        for state in state_list:
            value = getattr(state, "lam", None) if param_name == "lambda" else state.n
            for s in theta_grid:
                probs = tg.sign_binned_closed_form(state, s, 0.0)
                rows.append([float(value), probs.theta1, probs.theta2, *probs.as_tuple()])
        path = os.path.join(out_dir, f"{name}.csv")
        write_csv(path, [param_name, "theta1", "theta2", "w_pp", "w_pm", "w_mp", "w_mm"], rows)
        files[f"{name}.csv"] = path

    # fig1b: pseudospin calB vs theta_u for the squeezed vacuum
    rows = []
    for lam in (0.20, 0.54, 0.96):
        state = st.SqueezedVacuum(lam)
        for tu in tu_grid:
            b_val = bell.chsh(
                bell.closed_form_correlation(state, tu, math.pi / 4),
                bell.closed_form_correlation(state, tu, -math.pi / 4),
                bell.closed_form_correlation(state, -math.pi / 2, math.pi / 4),
                bell.closed_form_correlation(state, -math.pi / 2, -math.pi / 4),
            )
            rows.append([lam, float(tu), b_val])
    path = os.path.join(out_dir, "fig1b.csv")
    write_csv(path, ["lambda", "theta_u", "B"], rows)
    files["fig1b.csv"] = path

    # fig2b: Fock pair n = 1, theta_v = 0, theta_u' = pi, theta_v' = pi/2
    state = st.FockPairSuperposition(1)
    rows = []
    for tu in tu_grid:
        b_val = bell.chsh(
            bell.closed_form_correlation(state, tu, 0.0),
            bell.closed_form_correlation(state, tu, math.pi / 2),
            bell.closed_form_correlation(state, math.pi, 0.0),
            bell.closed_form_correlation(state, math.pi, math.pi / 2),
        )
        rows.append([1, float(tu), b_val])
    path = os.path.join(out_dir, "fig2b.csv")
    write_csv(path, ["n", "theta_u", "B"], rows)
    files["fig2b.csv"] = path

    # fig3a: tomographic B(r) at theta1 = pi/2, theta2 = -pi/4, theta1' = 0,
    # theta2' = -3 pi/4
    t1, t2, t1p, t2p = (parse_angle(a) for a in FIG3A_ANGLES)
    quad = bell.BellAnglesQuadrature(t1, t1p, t2, t2p)
    rows = []
    fig3a_vals = []
    r_values = parse_values(r_sweep)
    for rv in r_values:
        state = st.PairCoherent(rv)
        def e_tomo(a, b):
            return bell.correlation_tomographic(tg.sign_binned_closed_form(state, a, b))
        b_val = bell.chsh(*[e_tomo(a, b) for a, b in quad.pairs()])
        rows.append([rv, t1, t2, t1p, t2p, b_val])
        fig3a_vals.append(b_val)
    path = os.path.join(out_dir, "fig3a.csv")
    write_csv(path, ["r", "theta1", "theta2", "theta1p", "theta2p", "B"], rows)
    files["fig3a.csv"] = path

    # fig3b: pseudospin calB vs theta_u for r = 1.05 (Fock-oracle correlation)
    report = bell.pair_coherent_sx_report(1.05, cutoff)
    corr = _pseudospin_correlation_fn(st.PairCoherent(1.05), cutoff)
    rows = []
    for tu in tu_grid:
        b_val = bell.chsh(
            corr(tu, 0.0), corr(tu, math.pi / 2),
            corr(math.pi, 0.0), corr(math.pi, math.pi / 2),
        )
        rows.append([1.05, float(tu), b_val])
    path = os.path.join(out_dir, "fig3b.csv")
    write_csv(path, ["r", "theta_u", "B"], rows)
    files["fig3b.csv"] = path

    config = {
        "points": points, "r_sweep": r_values, "cutoff": cutoff,
        "fig1_lambdas": [0.20, 0.54, 0.96], "fig2_ns": [1, 3, 5], "fig3b_r": 1.05,
    }
    manifest = {
        "command": "figures",
        "effective_config": config,
        "outputs": {name: sha256_file(p) for name, p in files.items()},
        "fig3a": _series_summary(r_values, fig3a_vals),
        "fig3b_discrepancy": {
            "r": report.r, "cutoff": report.cutoff,
            "bessel_coefficient": report.bessel,
            "fock_expectation": report.fock,
            "difference": report.difference,
            "fock_oracle_used": True,
        },
    }
    write_json(os.path.join(out_dir, "manifest.json"), manifest)
    click.echo(f"wrote {len(files) + 1} files to {out_dir}")


if __name__ == "__main__":
    main()
