"""Command line front end: coefficient inspection, layer analysis, steady
and time-dependent channel runs, and the self-validation suite.

Exit codes: 0 success, 1 numerical failure, 2 usage or configuration
error.
"""

import configparser
import math
import os
import sys
from dataclasses import dataclass, field

import click
import numpy as np

from . import coeffs as C
from . import model as mdl
from . import boundary as bnd
from . import steady1d as st
from . import fem1d as fem
from . import validation
from .coeffs import CoefficientError, StructuralMismatchError
from .fem1d import ConfigError


def _fmt(v):
    return format(float(v), ".17g")


def _parse_eta(text):
    eta = float(text)
    if not (eta == math.inf or eta > 3.0):
        raise ConfigError("eta must exceed 3 (or be inf)")
    return eta


# ---------------------------------------------------------------------------
# scenario configuration files

_SCHEMA = {
    "model": {"eta", "kn", "knbar", "chi", "bc_mode"},
    "walls": {"theta_left", "theta_right", "v_left", "v_right"},
    "mesh": {"h"},
    "time": {"dt", "t_end"},
    "output": {"dir", "snapshots", "svg"},
}


@dataclass
class ScenarioConfig:
    eta: float = 5.0
    kn: float = None
    knbar: float = None
    chi: float = 1.0
    bc_mode: str = "modified"
    theta_left: float = 0.0
    theta_right: float = 0.0
    v_left: float = 0.0
    v_right: float = 0.0
    h: float = 1.0 / 1000.0
    dt: float = 1.0 / 4000.0
    t_end: float = 4.0
    out_dir: str = "."
    snapshots: tuple = ()
    svg: bool = False

    def fem_config(self, outputs=None):
        return fem.FemConfig(
            h=self.h, dt=self.dt, t_end=self.t_end, eta=self.eta,
            kn=self.kn, knbar=self.knbar, chi=self.chi,
            walls=((self.theta_left, self.v_left),
                   (self.theta_right, self.v_right)),
            bc_mode=self.bc_mode,
            outputs=self.snapshots if outputs is None else outputs)

    @property
    def kn_resolved(self):
        if self.kn is not None:
            return self.kn
        return C.kn_convert(self.knbar, self.eta)


def parse_scenario_config(path):
    cp = configparser.ConfigParser()
    read = cp.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    cfg = ScenarioConfig()
    for section in cp.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section '{section}'")
        for key, val in cp.items(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown config key '{section}.{key}'")
            if section == "model":
                if key == "eta":
                    cfg.eta = _parse_eta(val)
                elif key == "bc_mode":
                    cfg.bc_mode = val.strip()
                else:
                    setattr(cfg, key, float(val))
            elif section == "walls":
                setattr(cfg, key, float(val))
            elif section == "mesh":
                cfg.h = float(val)
            elif section == "time":
                setattr(cfg, key, float(val))
            elif section == "output":
                if key == "dir":
                    cfg.out_dir = val.strip()
                elif key == "svg":
                    cfg.svg = cp.getboolean(section, key)
                else:
                    cfg.snapshots = tuple(
                        float(t) for t in val.replace(",", " ").split())
    if (cfg.kn is None) == (cfg.knbar is None):
        raise ConfigError("exactly one of model.kn and model.knbar "
                          "must be set")
    return cfg


# ---------------------------------------------------------------------------
# minimal SVG line charts (pure view layer; CSV carries the data)

_SVG_COLORS = ("#1f5fa8", "#c23b22", "#3a7d44", "#8a5fa8", "#b8860b")


def write_svg_chart(path, x, series, title="", xlabel="x", ylabel=""):
    """Hand-assembled line chart: axes, polylines, legend."""
    wpx, hpx = 640, 420
    ml, mr, mt, mb = 70, 20, 40, 50
    iw, ih = wpx - ml - mr, hpx - mt - mb
    x = np.asarray(x, dtype=float)
    ys = {k: np.asarray(v, dtype=float) for k, v in series.items()}
    x0, x1 = float(np.min(x)), float(np.max(x))
    allv = np.concatenate(list(ys.values()))
    y0, y1 = float(np.min(allv)), float(np.max(allv))
    if y1 - y0 < 1e-300:
        y0, y1 = y0 - 1.0, y1 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def px(v):
        return ml + (v - x0) / (x1 - x0) * iw

    def py(v):
        return mt + (y1 - v) / (y1 - y0) * ih

    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{wpx}" '
        f'height="{hpx}" viewBox="0 0 {wpx} {hpx}">',
        f'<rect width="{wpx}" height="{hpx}" fill="white"/>',
        f'<text x="{wpx / 2:.0f}" y="24" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{title}</text>',
        f'<line x1="{ml}" y1="{mt + ih}" x2="{ml + iw}" y2="{mt + ih}" '
        'stroke="black"/>',
        f'<line x1="{ml}" y1="{mt}" x2="{ml}" y2="{mt + ih}" '
        'stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        lines.append(
            f'<text x="{px(xv):.1f}" y="{mt + ih + 18}" '
            'text-anchor="middle" font-family="sans-serif" '
            f'font-size="11">{xv:.3g}</text>')
        lines.append(
            f'<text x="{ml - 8}" y="{py(yv) + 4:.1f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{yv:.3g}</text>')
    lines.append(
        f'<text x="{ml + iw / 2:.0f}" y="{hpx - 10}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="13">{xlabel}</text>')
    if ylabel:
        lines.append(
            f'<text x="16" y="{mt + ih / 2:.0f}" text-anchor="middle" '
            f'transform="rotate(-90 16 {mt + ih / 2:.0f})" '
            f'font-family="sans-serif" font-size="13">{ylabel}</text>')
    for i, (name, y) in enumerate(ys.items()):
        color = _SVG_COLORS[i % len(_SVG_COLORS)]
        pts = " ".join(f"{px(a):.2f},{py(b):.2f}" for a, b in zip(x, y))
        lines.append(f'<polyline points="{pts}" fill="none" '
                     f'stroke="{color}" stroke-width="1.5"/>')
        ly = mt + 16 + 16 * i
        lines.append(f'<line x1="{ml + iw - 120}" y1="{ly - 4}" '
                     f'x2="{ml + iw - 96}" y2="{ly - 4}" stroke="{color}" '
                     'stroke-width="2"/>')
        lines.append(f'<text x="{ml + iw - 90}" y="{ly}" '
                     f'font-family="sans-serif" font-size="12">{name}</text>')
    lines.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# commands


@click.group()
def main():
    """Simulation laboratory for linear moment models of rarefied
    channel flows."""


def _numerical_guard(fn):
    try:
        fn()
    except (ConfigError,) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except (CoefficientError, StructuralMismatchError, ValueError,
            FloatingPointError, np.linalg.LinAlgError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


def _coeff_rows(mc, bc):
    rows = [(f"k{i}", mc.k[i], mc.source.value) for i in range(11)]
    rows += [("l1", mc.l1, mc.source.value), ("l2", mc.l2, mc.source.value)]
    groups = (("m1", bc.m1), ("m2", bc.m2), ("m3", bc.m3), ("m4", bc.m4),
              ("m5", bc.m5), ("m6", bc.m6))
    for name, vals in groups:
        if vals is None:
            rows.append((name, None, bc.source.value))
        else:
            for j, v in enumerate(vals):
                rows.append((f"{name}{j + 1}", v, bc.source.value))
    rows.append(("m71", bc.m71, bc.source.value))
    rows.append(("m81", bc.m81, bc.source.value))
    return rows


@main.command("coeffs")
@click.option("--eta", default=None, help="power index of the built-in "
              "model (5, 7, 10, 17 or inf)")
@click.option("--matrices", default=None,
              help="collision matrix file (or name resolved through "
              "R13_DATA_DIR) to derive coefficients from")
@click.option("--chi", default=1.0, show_default=True,
              help="wall accommodation coefficient")
@click.option("--out", default=None, help="also write the table as CSV")
def cmd_coeffs(eta, matrices, chi, out):
    """Print transport and wall coefficients with their provenance."""
    def work():
        if (eta is None) == (matrices is None):
            raise ConfigError("give exactly one of --eta and --matrices")
        if matrices is not None:
            path = matrices if os.path.exists(matrices) \
                else C.find_collision_file(matrices)
            cms = C.CollisionMatrixSet.from_file(path)
            mc, basis, A, L = C.derive(cms)
            bc, _ = bnd.derive_bc(basis, A, L, chi=chi)
        else:
            mc, bc = C.load_builtin(_parse_eta(eta), chi=chi)
        rows = _coeff_rows(mc, bc)
        click.echo(f"{'name':<6} {'value':<26} source")
        for name, val, src in rows:
            sval = "-" if val is None else _fmt(val)
            click.echo(f"{name:<6} {sval:<26} {src}")
        if out:
            with open(out, "w") as fh:
                fh.write("name,value,source\n")
                for name, val, src in rows:
                    sval = "" if val is None else _fmt(val)
                    fh.write(f"{name},{sval},{src}\n")
    _numerical_guard(work)


@main.command("layers")
@click.option("--eta", required=True)
@click.option("--kn", required=True, type=float)
@click.option("--out", default=None, help="write the spectrum as CSV")
def cmd_layers(eta, kn, out):
    """Layer decay rates of the steady temperature problem."""
    def work():
        ev = _parse_eta(eta)
        if kn <= 0.0:
            raise ConfigError("kn must be positive")
        mc, _ = C.load_builtin(ev)
        sp = bnd.reduce_to_ode(mc, kn)
        if sp.degenerate:
            click.echo(f"lambda1 = {_fmt(sp.lambda1)}  (single layer: "
                       "degenerate spectrum)")
        else:
            click.echo(f"lambda1 = {_fmt(sp.lambda1)}")
            click.echo(f"lambda2 = {_fmt(sp.lambda2)}")
        if out:
            lam2 = math.nan if sp.degenerate else sp.lambda2
            b = sp.b
            with open(out, "w") as fh:
                fh.write("eta,kn,lambda1,lambda2,b11,b12,b21,b22\n")
                fh.write(",".join([_fmt(ev), _fmt(kn), _fmt(sp.lambda1),
                                   _fmt(lam2), _fmt(b[0, 0]), _fmt(b[0, 1]),
                                   _fmt(b[1, 0]), _fmt(b[1, 1])]) + "\n")
    _numerical_guard(work)


@main.command("steady")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def cmd_steady(config_path):
    """Analytic steady heat-transfer profiles from a scenario config."""
    def work():
        cfg = parse_scenario_config(config_path)
        mc, bc = C.load_builtin(cfg.eta, chi=cfg.chi)
        sol = st.solve_fourier_steady(mc, bc, cfg.kn_resolved,
                                      (cfg.theta_left, cfg.theta_right))
        os.makedirs(cfg.out_dir, exist_ok=True)
        csv_path = os.path.join(cfg.out_dir, "steady.csv")
        with open(csv_path, "w") as fh:
            st.write_profile_csv(sol, fh)
        click.echo(f"wrote {csv_path}")
        if cfg.svg:
            svg_path = os.path.join(cfg.out_dir, "steady.svg")
            write_svg_chart(svg_path, sol.x,
                            {"theta": sol.profiles["theta"],
                             "q2": sol.profiles["q2"]},
                            title="steady heat-transfer channel",
                            ylabel="theta, q2")
            click.echo(f"wrote {svg_path}")
    _numerical_guard(work)


def _write_snapshot_csv(path, snap, mc, kn):
    rec = mdl.recover_stress_heat(snap.x, snap.u, mc, kn)
    cols = (["t", "x"] + list(snap.names)
            + ["q1", "q2", "sig12", "sig22"])
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for i in range(snap.x.size):
            vals = [snap.t, snap.x[i]] + [snap.u[i, j]
                                          for j in range(len(snap.names))]
            vals += [rec[k][i] for k in ("q1", "q2", "sig12", "sig22")]
            fh.write(",".join(_fmt(v) for v in vals) + "\n")


@main.command("run")
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
def cmd_run(config_path):
    """Time-dependent channel run from a scenario config."""
    def work():
        cfg = parse_scenario_config(config_path)
        fc = cfg.fem_config()
        mc, bc = C.load_builtin(cfg.eta, chi=cfg.chi)
        snaps, series = fem.run_scenario(fc, coeffs=mc, bc=bc)
        os.makedirs(cfg.out_dir, exist_ok=True)
        kn = cfg.kn_resolved
        written = set()
        for snap in snaps:
            name = f"snapshot_t{snap.t:.6f}".rstrip("0").rstrip(".")
            if name in written:
                continue
            written.add(name)
            path = os.path.join(cfg.out_dir, name + ".csv")
            _write_snapshot_csv(path, snap, mc, kn)
            click.echo(f"wrote {path}")
            if cfg.svg:
                write_svg_chart(
                    path[:-4] + ".svg", snap.x,
                    {"theta": snap.field("theta"),
                     "v1": snap.field("v1")},
                    title=f"channel state at t = {snap.t:g}",
                    ylabel="theta, v1")
                click.echo(f"wrote {path[:-4] + '.svg'}")
        series_path = os.path.join(cfg.out_dir, "series.csv")
        with open(series_path, "w") as fh:
            fh.write("t,entropy,residual\n")
            for i in range(series.t.size):
                fh.write(",".join(_fmt(v) for v in
                                  (series.t[i], series.entropy[i],
                                   series.residual[i])) + "\n")
        click.echo(f"wrote {series_path}")
    _numerical_guard(work)


@main.command("validate")
@click.option("--criteria", default=None,
              help="comma-separated criterion numbers (default: all)")
def cmd_validate(criteria):
    """Run the acceptance suite and exit nonzero on any failure."""
    ids = None
    if criteria:
        try:
            ids = [int(t) for t in criteria.replace(",", " ").split()]
            if any(i not in validation.CRITERIA for i in ids):
                raise ValueError
        except ValueError:
            click.echo("error: --criteria must list numbers 1-9", err=True)
            sys.exit(2)
    results = validation.run(ids)
    failed = False
    for i, ok, detail in results:
        click.echo(f"criterion {i}: {'PASS' if ok else 'FAIL'} - {detail}")
        failed |= not ok
    sys.exit(1 if failed else 0)


if __name__ == "__main__":
    main()
