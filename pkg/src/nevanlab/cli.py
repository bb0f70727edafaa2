"""Command-line front end.

Every command resolves its configuration as built-in defaults, then the JSON
file given by ``--config``, then explicit flags.  Scalar summaries are JSON
(with the resolved config and package version embedded), sweeps are CSV, and
plot data are two-column text files.  Floats are written in shortest
round-trip form so identical runs give byte-identical files.

Exit codes: 0 success, 2 configuration error, 3 numerical non-convergence,
4 theorem or operation precondition failure.
"""

from __future__ import annotations

import argparse
import cmath
import io
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .bounds import GrowthTrend, assemble_verdict, bounds_table
from .densities import IntervalSet, density_limits, density_profile, log_periodic_set
from .errors import ConfigError, DomainError, NumericalError, PreconditionError, UnsupportedRangeError
from .functions import Polynomial, parse_function
from .logcplx import LogComplex, RadialGrid
from .nevanlinna import (alpha_regularity, characteristic_sweep, order_estimates, petrenko_deviation,
                         xi_estimate)
from .odelab import (ARC_BUDGET, _arc_budget, Coefficients, Bundle, counting_sweep, growth_probe, integrate_to,
                     lambda_estimate, order_proxy_slope, bank_laine_residual_states, wronskian)

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_PRECONDITION = 0, 2, 3, 4

COMMANDS = ("characteristic", "deviation", "xi", "density", "oscillate", "growth", "bounds", "report")

DEFAULTS = {
    "fn": None, "A": None, "B": None,
    "rmin": 1.0, "rmax": 100.0, "points": None, "per_decade": 48, "spacing": "geometric",
    "initial_count": 512, "refine_tol": 1e-9, "tol": 1e-10, "tail_fraction": 0.5,
    "theta_count": 64, "ic": None, "random_ics": False, "seed": 0,
    "intervals": None, "log_periodic": None,
    "probes": 20, "probe_radius": 5.0, "rays": 16,
    "mu": None, "rho": None, "N": None, "alpha": None, "beta": 0.0, "beta_plus": None, "xi": None,
    "out": None,
}

# grid defaults that differ per command
COMMAND_DEFAULTS = {
    "xi": {"rmin": 1.0, "rmax": 1000.0},
    "density": {"rmin": 1.0, "rmax": 1e10},
    "oscillate": {"rmin": 2.0, "rmax": 40.0},
    "growth": {"rmin": 5.0, "rmax": 40.0},
    "report": {"rmin": 2.0, "rmax": 40.0},
}


# -- formatting -------------------------------------------------------------------------------

def fmt(x) -> str:
    """Shortest round-trip text of a number for CSV cells; empty for None."""
    if x is None:
        return ""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def jsonable(x):
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        v = float(x)
        if math.isnan(v):
            return None
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return x


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def plot_text(xlabel, ylabel, pts) -> str:
    buf = io.StringIO()
    buf.write(f"# {xlabel} {ylabel}\n")
    for x, y in pts:
        if y is not None:
            buf.write(f"{fmt(x)} {fmt(y)}\n")
    return buf.getvalue()


class Output:
    """Main output to stdout or ``<out>/<command>.<ext>``; side files only with an out directory."""

    def __init__(self, out_dir, command):
        self.dir = out_dir
        self.command = command
        if out_dir:
            os.makedirs(out_dir, exist_ok=True)

    def side(self, name, text):
        if not self.dir:
            return None
        path = os.path.join(self.dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        return name

    def main(self, ext, text):
        if self.dir:
            self.side(f"{self.command}.{ext}", text)
        else:
            sys.stdout.write(text)


def json_text(payload, cfg) -> str:
    # the output location is not part of the experiment, so it stays out of the record
    resolved = {k: v for k, v in cfg.items() if k != "out"}
    doc = {"version": __version__, "command": cfg["command"], "config": resolved, "result": payload}
    return json.dumps(jsonable(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"


# -- configuration --------------------------------------------------------------------------------

def _ic(text):
    try:
        parts = [complex(t.replace(" ", "").replace("i", "j")) for t in text.split(",")]
    except ValueError as exc:
        raise ConfigError(f"bad initial condition {text!r}") from exc
    if len(parts) != 2:
        raise ConfigError(f"initial condition needs two values f(0),f'(0): {text!r}")
    return parts


def _ic_repr(v):
    return fmt(v.real) if v.imag == 0 else f"{fmt(v.real)}{'+' if v.imag >= 0 else '-'}{fmt(abs(v.imag))}j"


def resolve_config(args) -> dict:
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                filecfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(filecfg, dict):
            raise ConfigError("config file must hold a JSON object")
        unknown = sorted(set(filecfg) - set(DEFAULTS) - {"command"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        cfg.update(filecfg)
    for key in DEFAULTS:
        v = getattr(args, key, None)
        if v is not None and v is not False:
            cfg[key] = v
    cfg["command"] = args.command
    if cfg["ic"] is not None:
        ics = cfg["ic"] if isinstance(cfg["ic"], list) else [cfg["ic"]]
        cfg["ic"] = [",".join(_ic_repr(c) for c in _ic(str(t))) for t in ics]
    _validate(cfg)
    return cfg


def _validate(cfg):
    for k in ("rmin", "rmax", "refine_tol", "tol", "tail_fraction", "probe_radius", "beta"):
        try:
            cfg[k] = float(cfg[k])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{k} must be a number") from exc
    for k in ("per_decade", "initial_count", "theta_count", "seed", "probes", "rays"):
        if int(cfg[k]) != cfg[k]:
            raise ConfigError(f"{k} must be an integer")
        cfg[k] = int(cfg[k])
    if cfg["points"] is not None:
        cfg["points"] = int(cfg["points"])
    if cfg["spacing"] not in ("geometric", "linear"):
        raise ConfigError("spacing must be geometric or linear")
    if not 0 < cfg["rmin"] < cfg["rmax"]:
        raise ConfigError("grid needs 0 < rmin < rmax")
    if cfg["points"] is not None and cfg["points"] < 1:
        raise ConfigError("grid needs at least one point")
    if not 1e-13 <= cfg["tol"] <= 1e-6:
        raise ConfigError("tol must lie in [1e-13, 1e-6]")


def make_grid(cfg) -> RadialGrid:
    if cfg["spacing"] == "linear":
        pts = cfg["points"] if cfg["points"] is not None else max(2, int(cfg["per_decade"]))
        return RadialGrid.linear(cfg["rmin"], cfg["rmax"], pts)
    return RadialGrid.geometric(cfg["rmin"], cfg["rmax"], cfg["points"], cfg["per_decade"])


def _need(cfg, key, flag=None):
    if cfg[key] is None:
        raise ConfigError(f"--{flag or key} is required for {cfg['command']}")
    try:
        return parse_function(str(cfg[key]))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def _ics(cfg, count, default):
    if cfg["random_ics"]:
        rng = np.random.default_rng(cfg["seed"])
        vals = np.round(rng.normal(size=(count, 4)), 6)
        return [(complex(a, b), complex(c, d)) for a, b, c, d in vals]
    if cfg["ic"] is None:
        return default
    ics = [tuple(_ic(t)) for t in cfg["ic"]]
    if len(ics) != count:
        raise ConfigError(f"{cfg['command']} needs {count} --ic value(s), got {len(ics)}")
    return ics


# -- commands ------------------------------------------------------------------------------------

def cmd_characteristic(cfg, out):
    f = _need(cfg, "fn")
    samples = characteristic_sweep(f, make_grid(cfg), cfg["initial_count"], cfg["refine_tol"])
    rows = []
    for s in samples:
        rows.append((s.r, s.T, s.logM, s.logL, s.ratio, s.T / s.logM if s.logM > 0 else None))
    out.main("csv", csv_text(("r", "T", "logM", "logL", "ratio_logM_over_T", "alpha_inst"), rows))
    return samples


def cmd_deviation(cfg, out):
    f = _need(cfg, "fn")
    samples = characteristic_sweep(f, make_grid(cfg), cfg["initial_count"], cfg["refine_tol"])
    dev = petrenko_deviation(samples, cfg["tail_fraction"])
    a, disp = alpha_regularity(samples, cfg["tail_fraction"])
    rho, mu = order_estimates(samples, cfg["tail_fraction"])
    res = {"beta_minus": dev.beta_minus, "beta_plus": dev.beta_plus, "alpha_hat": a, "dispersion": disp,
           "rho_hat": rho, "mu_hat": mu, "window": list(dev.tail_window)}
    out.main("json", json_text(res, cfg))
    return res


def cmd_xi(cfg, out):
    f = _need(cfg, "fn")
    est = xi_estimate(f, make_grid(cfg), cfg["theta_count"])
    th = [math.pi * (2 * k + 1) / est.theta_grid_size for k in range(est.theta_grid_size)]
    table = out.side("xi_directions.csv", csv_text(("theta", "bounded"), zip(th, est.classification)))
    res = {"xi": est.xi, "theta_count": est.theta_grid_size, "slope_threshold": est.slope_threshold,
           "per_direction": table}
    out.main("json", json_text(res, cfg))
    return res


def cmd_density(cfg, out):
    if cfg["log_periodic"] is not None:
        F = log_periodic_set(int(cfg["log_periodic"]))
    elif cfg["intervals"] is not None:
        F = IntervalSet.parse(str(cfg["intervals"]))
    else:
        raise ConfigError("density needs --intervals or --log-periodic")
    grid = make_grid(cfg)
    ud, ld, ul, ll = density_limits(F, grid)
    rs = np.array([r for r in grid if r > 1])
    dens, logdens = density_profile(F, rs)
    table = out.side("density_profile.csv", csv_text(("r", "dens", "logdens"), zip(rs, dens, logdens)))
    res = {"upper_dens": ud, "lower_dens": ld, "upper_logdens": ul, "lower_logdens": ll,
           "intervals": [list(iv) for iv in F.intervals], "profile": table}
    out.main("json", json_text(res, cfg))
    return res


def _probe_points(count, radius):
    # a deterministic spiral of probes with radii up to ``radius``
    return [radius * (k + 1) / count * cmath.exp(2.39996322972865332j * k) for k in range(count)]


def cmd_oscillate(cfg, out):
    A = _need(cfg, "A")
    ic1, ic2 = _ics(cfg, 2, [(1.0, 0.0), (1.0, 1.0)])
    grid = make_grid(cfg)
    reps = counting_sweep(A, None, ic1, ic2, grid, cfg["tol"])
    lam = lambda_estimate(reps, cfg["tail_fraction"])
    n_table = out.side("n_table.csv", csv_text(("r", "n", "N", "winding_raw", "rays"),
                                               [(r.r, r.n, r.N, r.winding_raw, r.samples) for r in reps]))

    w0 = complex(ic1[0]) * complex(ic2[1]) - complex(ic1[1]) * complex(ic2[0])
    if w0 == 0:
        raise PreconditionError("Wronskian vanishes: the solutions are linearly dependent")
    c = LogComplex.from_complex(w0)
    pairs = []
    drift = 0.0
    for z in _probe_points(cfg["probes"], min(cfg["probe_radius"], cfg["rmax"])):
        s1, s2 = integrate_to(A, None, [ic1, ic2], z, cfg["tol"])
        pairs.append((s1, s2))
        w = wronskian(s1, s2)
        drift = max(drift, abs(w.to_complex() - w0) / abs(w0))
    residual = bank_laine_residual_states(A, pairs, c)

    verdicts = []
    md = A.metadata
    trans = not isinstance(A, Polynomial)
    if md.order is not None:
        rho = float(md.order.value)
        base = {"rho": rho, "transcendental": trans}
        if md.lower_order is not None:
            base["mu"] = float(md.lower_order.value)
        verdicts.append(assemble_verdict("BankLaine66", base, lam.value))
        if 0.5 <= rho < 1:
            verdicts.append(assemble_verdict("Rossi77", base, lam.value))
        if md.alpha is not None and 0 < md.alpha.value <= 1:
            verdicts.append(assemble_verdict(
                "Thm12", dict(base, alpha=float(md.alpha.value), beta=cfg["beta"]), lam.value))
    res = {"n_table": n_table, "lambda_hat": lam.value, "too_few_zeros": lam.too_few_zeros,
           "lambda_upper_bound": lam.upper_bound, "n_final": reps[-1].n, "N_final": reps[-1].N,
           "bank_laine_residual": residual, "wronskian_drift": drift,
           "ics": [[_ic_repr(complex(v)) for v in ic] for ic in (ic1, ic2)],
           "verdicts": [_verdict_dict(v) for v in verdicts]}
    out.main("json", json_text(res, cfg))
    return res, reps


def _verdict_dict(v):
    return {"theorem_id": v.theorem_id, "inputs": v.inputs, "predicted_bound": v.predicted_bound,
            "measured": v.measured, "hypothesis_satisfied": v.hypothesis_satisfied,
            "conclusion_consistent": v.conclusion_consistent, "notes": list(v.notes)}


def _ray0_bounded(A, B, ic, cfg, budget=ARC_BUDGET):
    """Largest scale of the solution along the positive axis, up to where the step budget allows."""
    coeffs = Coefficients(A, B)
    radii = [r for r in make_grid(cfg) if _arc_budget(coeffs, 0.0, r) <= budget]
    if not radii:
        return None, None
    b = Bundle(coeffs, [ic], cfg["tol"])
    out_y, out_K = b.ray(0.0, radii[-1], radii)
    mx = np.maximum(np.abs(out_y[:, 0]), np.abs(out_y[:, 1]))
    scale = float(np.max(out_K[:, 0] * math.log(2.0) + np.log(mx)))
    return radii[-1], scale


def cmd_growth(cfg, out):
    A = _need(cfg, "A")
    B = _need(cfg, "B")
    (ic,) = _ics(cfg, 1, [(1.0, 0.0)])
    grid = make_grid(cfg)
    probe = growth_probe(A, B, ic, grid, cfg["tol"], cfg["rays"])
    lo, hi = grid.radii[0], grid.radii[-1]
    s_prev = order_proxy_slope(probe, lo, 2 * lo)
    s_top = order_proxy_slope(probe, hi / 2, hi)
    table = out.side("order_proxy.csv", csv_text(("r", "loglog_scale"), probe.points))

    # coefficient quantities feeding the theorem hypotheses
    xi_grid = RadialGrid.geometric(1.0, 1000.0, per_decade=cfg["per_decade"])
    xi_a = cfg["xi"] if cfg["xi"] is not None else xi_estimate(A, xi_grid, cfg["theta_count"]).xi
    b_samples = characteristic_sweep(B, grid, cfg["initial_count"], cfg["refine_tol"])
    beta_minus = petrenko_deviation(b_samples, cfg["tail_fraction"]).beta_minus
    rho_b, mu_b = order_estimates(b_samples, cfg["tail_fraction"])
    mu_source = "measured"
    # a finite-scale slope cannot decide a strict inequality at the threshold, so a
    # catalog lower order takes precedence, and an explicit --mu over both
    if B.metadata.lower_order is not None and math.isfinite(B.metadata.lower_order.value):
        mu_b, mu_source = float(B.metadata.lower_order.value), "catalog"
    if cfg["mu"] is not None:
        mu_b, mu_source = cfg["mu"], "config"
    coef_order = 0.0
    for f in (A, B):
        if f.metadata.order is not None:
            coef_order = max(coef_order, float(f.metadata.order.value))
        elif not isinstance(f, Polynomial):
            coef_order = max(coef_order, rho_b)
    trans_b = not isinstance(B, Polynomial)
    trend = None
    if s_prev is not None and s_top is not None:
        trend = GrowthTrend(s_prev, s_top, coef_order)
    verdicts = [
        assemble_verdict("Thm33", {"xi": xi_a, "beta_minus": beta_minus, "transcendental": trans_b}, trend),
        assemble_verdict("Thm35", {"xi": xi_a, "mu": mu_b, "transcendental": trans_b}, trend),
        assemble_verdict("Cond18", {"xi": xi_a, "mu": mu_b, "transcendental": trans_b}, trend),
    ]
    r0, scale0 = _ray0_bounded(A, B, ic, cfg)
    res = {"order_proxy": table, "slope_first_octave": s_prev, "slope_last_octave": s_top,
           "unbounded_trend": trend.unbounded if trend else None,
           "bounded_on_positive_axis": None if scale0 is None else scale0 <= 0.5,
           "positive_axis_radius": r0, "positive_axis_max_log_scale": scale0,
           "rays_used": len(probe.rays_used), "rays_skipped": len(probe.rays_skipped),
           "xi_A": xi_a, "beta_minus_B": beta_minus, "mu_B": mu_b, "mu_B_source": mu_source,
           "verdicts": [_verdict_dict(v) for v in verdicts]}
    out.main("json", json_text(res, cfg))
    return res


def cmd_bounds(cfg, out):
    keys = ("mu", "rho", "N", "alpha", "beta_plus", "xi")
    if all(cfg[k] is None for k in keys):
        raise ConfigError("bounds needs at least one of --mu --rho --N --alpha --beta-plus --xi")
    kw = {k: cfg[k] for k in keys}
    if kw["N"] is not None:
        kw["N"] = int(kw["N"])
    res = bounds_table(beta=cfg["beta"], **kw)
    out.main("json", json_text(res, cfg))
    return res


def cmd_report(cfg, out):
    if not cfg["out"]:
        raise ConfigError("report needs --out DIR")
    if cfg["fn"] is None and cfg["A"] is None:
        raise ConfigError("report needs --fn and/or --A")
    files = []
    grid = make_grid(cfg)
    if cfg["fn"] is not None:
        f = _need(cfg, "fn")
        samples = characteristic_sweep(f, grid, cfg["initial_count"], cfg["refine_tol"])
        files.append(out.side("characteristic.csv", csv_text(
            ("r", "T", "logM", "logL", "ratio_logM_over_T", "alpha_inst"),
            [(s.r, s.T, s.logM, s.logL, s.ratio, s.T / s.logM if s.logM > 0 else None) for s in samples])))
        files.append(out.side("ratio_vs_r.txt", plot_text("r", "logM_over_T", [(s.r, s.ratio) for s in samples])))
    if cfg["A"] is not None and cfg["B"] is None:
        A = _need(cfg, "A")
        ic1, ic2 = _ics(cfg, 2, [(1.0, 0.0), (1.0, 1.0)])
        reps = counting_sweep(A, None, ic1, ic2, grid, cfg["tol"])
        files.append(out.side("n_table.csv", csv_text(("r", "n", "N", "winding_raw", "rays"),
                                                      [(r.r, r.n, r.N, r.winding_raw, r.samples) for r in reps])))
        files.append(out.side("n_vs_r.txt", plot_text("r", "n", [(r.r, r.n) for r in reps])))
    if cfg["A"] is not None and cfg["B"] is not None:
        A, B = _need(cfg, "A"), _need(cfg, "B")
        (ic,) = _ics(cfg, 1, [(1.0, 0.0)])
        probe = growth_probe(A, B, ic, grid, cfg["tol"], cfg["rays"])
        files.append(out.side("loglog_growth_vs_logr.txt", plot_text(
            "log_r", "loglog_scale", [(math.log(r), v) for r, v in probe.points])))
    out.main("json", json_text({"files": files}, cfg))
    return files


HANDLERS = {
    "characteristic": cmd_characteristic, "deviation": cmd_deviation, "xi": cmd_xi, "density": cmd_density,
    "oscillate": cmd_oscillate, "growth": cmd_growth, "bounds": cmd_bounds, "report": cmd_report,
}


# -- parser ----------------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nevanlab", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=f"nevanlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON file mirroring the flags; flags override it")
        sp.add_argument("--out", help="output directory (default: main output to stdout)")
        sp.add_argument("--rmin", type=float)
        sp.add_argument("--rmax", type=float)
        sp.add_argument("--points", type=int)
        sp.add_argument("--per-decade", dest="per_decade", type=int)
        sp.add_argument("--spacing", choices=("geometric", "linear"))
        sp.add_argument("--tail-fraction", dest="tail_fraction", type=float)
        sp.add_argument("--seed", type=int)
        if name in ("characteristic", "deviation", "xi", "report"):
            sp.add_argument("--fn", help="function id, e.g. exp, airy, ml:0.75, poly:1,0,1")
        if name in ("characteristic", "deviation", "growth", "report"):
            sp.add_argument("--initial-count", dest="initial_count", type=int)
            sp.add_argument("--refine-tol", dest="refine_tol", type=float)
        if name in ("xi", "growth"):
            sp.add_argument("--theta-count", dest="theta_count", type=int)
        if name in ("oscillate", "growth", "report"):
            sp.add_argument("--A", dest="A", help="coefficient of f' (growth) or of f (oscillate)")
            sp.add_argument("--tol", type=float)
            sp.add_argument("--ic", action="append", help="f(0),f'(0); repeat for a second solution")
            sp.add_argument("--random-ics", dest="random_ics", action="store_true",
                            help="draw the initial conditions from --seed")
        if name in ("growth", "report"):
            sp.add_argument("--B", dest="B", help="coefficient of f")
            sp.add_argument("--rays", type=int)
        if name == "oscillate":
            sp.add_argument("--probes", type=int)
            sp.add_argument("--probe-radius", dest="probe_radius", type=float)
        if name == "density":
            sp.add_argument("--intervals", help='"a:b,c:d" or a JSON array of pairs')
            sp.add_argument("--log-periodic", dest="log_periodic", type=int,
                            help="union of [e^2k, e^(2k+1)] for k = 0..K")
        if name in ("bounds", "growth", "oscillate"):
            sp.add_argument("--mu", type=float)
            sp.add_argument("--xi", type=float)
            sp.add_argument("--beta", type=float)
        if name == "bounds":
            sp.add_argument("--rho", type=float)
            sp.add_argument("--N", dest="N", type=int)
            sp.add_argument("--alpha", type=float)
            sp.add_argument("--beta-plus", dest="beta_plus", type=float)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        HANDLERS[cfg["command"]](cfg, Output(cfg["out"], cfg["command"]))
    except (ConfigError, DomainError) as exc:
        print(f"nevanlab: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PreconditionError as exc:
        print(f"nevanlab: precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except (NumericalError, UnsupportedRangeError) as exc:
        print(f"nevanlab: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
