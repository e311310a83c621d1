"""Command-line sweeps and verification reports.

Parameters come from an INI file (``--config``) with one section per
subcommand, overridden by ``-p key=value`` on the command line. Swept keys
accept ``start:stop:step`` (inclusive), ``log:a:b:n`` (n points from 10^a to
10^b) or a comma list.
"""
from __future__ import annotations

import argparse
import configparser
import io
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .cavity_io import CavityParams, dephasing_lambda, scattering_coeffs
from .cluster_model import rec_int_metrics, seq_int_metrics
from .errors import ConditioningError, ParameterError, UnsupportedError
from .gaussian_chi import verification_report
from .gkp_state import MeasurementWindow
from .hybrid_gate import required_amplitude
from .swap_rate import (
    V_MAX_FRACTION,
    db_to_eta,
    hashing_from_x,
    rate,
    rate_envelope,
    threshold_x,
)
from .transduction import mean_pauli_fidelity

EXIT_CONFIG = 2
EXIT_DOMAIN = 3
EXIT_CHECK_FAILED = 1


class ConfigError(ValueError):
    pass


def parse_grid(text: str) -> list[float]:
    """Expand a grid expression into a list of floats."""
    s = str(text).strip()
    try:
        if s.startswith("log:"):
            _, a, b, n = s.split(":")
            n = int(n)
            if n < 1:
                raise ConfigError(f"log grid needs n >= 1: {s!r}")
            return [float(x) for x in np.logspace(float(a), float(b), n)]
        if ":" in s:
            start, stop, step = (float(x) for x in s.split(":"))
            if not step > 0:
                raise ConfigError(f"grid step must be positive: {s!r}")
            if stop < start:
                raise ConfigError(f"grid stop below start: {s!r}")
            n = int(math.floor((stop - start) / step + 1e-9)) + 1
            return [start + i * step for i in range(n)]
        vals = [float(x) for x in s.split(",") if x.strip()]
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(f"cannot parse grid {s!r}: {exc}") from None
    if not vals:
        raise ConfigError("empty grid")
    return vals


def _scalar(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"expected a number, got {text!r}") from None


@dataclass
class Command:
    defaults: dict
    grids: tuple
    strings: tuple = ()
    columns: tuple = field(default_factory=tuple)


COMMANDS: dict[str, Command] = {
    "cavity": Command(
        {"C": "log:0:4:41", "zeta": "1", "delta_a_over_gamma": "5", "delta_c_over_kappa": "0", "eta_bs": "0.99"},
        grids=("C", "zeta"),
        columns=("zeta", "C", "r0_re", "r0_im", "r1_re", "r1_im", "lc1_abs", "la1_abs", "lambda_abs_sq"),
    ),
    "teleport-fidelity": Command(
        {
            "direction": "M->G",
            "C": "log:0:4:41",
            "zeta": "1,0.95,0.9",
            "sigma": "0.1,0.2,0.3",
            "eta_bs": "0.99",
            "delta_a_over_gamma": "5",
            "delta_c_over_kappa": "0",
            "v": "0",
            "p_meas": "0",
        },
        grids=("C", "zeta", "sigma"),
        strings=("direction",),
        columns=("sigma", "zeta", "C", "mean_fidelity"),
    ),
    "swap-rate": Command(
        {"half_loss_db": "0:12:0.25", "sigma0_sq": "0", "v": "opt", "v_max_fraction": str(V_MAX_FRACTION),
         "loss_map": "pure_loss"},
        grids=("half_loss_db",),
        strings=("v", "loss_map"),
        columns=("half_loss_db", "v_opt", "p_c", "p_f", "fidelity", "hashing", "rate", "d2_bound"),
    ),
    "threshold": Command({}, grids=(), columns=("x_star", "fidelity", "hashing")),
    "cluster": Command(
        {"n": "1:20:1", "lambda_abs": "0.99", "tau": "1", "eps": "0.01", "nbar": "0", "gkp_nbar": "none"},
        grids=("n",),
        strings=("gkp_nbar",),
        columns=("n", "seq_dephasing", "seq_duration", "rec_dephasing", "rec_duration",
                 "rec_added_variance_last", "rec_added_variance_total"),
    ),
    "chi-check": Command({"trials": "100"}, grids=(), columns=("check", "passed", "worst_deviation")),
}


def load_params(command: str, config_path: str | None, overrides: list[str]) -> dict:
    cmd = COMMANDS[command]
    params = dict(cmd.defaults)
    if config_path:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        try:
            with open(config_path, encoding="utf-8") as fh:
                cp.read_file(fh)
        except (OSError, configparser.Error) as exc:
            raise ConfigError(f"cannot read config {config_path!r}: {exc}") from None
        if cp.has_section(command):
            params.update(cp.items(command))
    for item in overrides:
        if "=" not in item:
            raise ConfigError(f"override must be key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    unknown = sorted(set(params) - set(cmd.defaults))
    if unknown:
        raise ConfigError(f"unknown parameter(s) for {command}: {', '.join(unknown)}")
    out = {}
    for k, v in params.items():
        if k in cmd.grids:
            out[k] = parse_grid(v)
        elif k in cmd.strings:
            out[k] = v
        else:
            out[k] = _scalar(v)
    return out


# --- subcommand bodies: each returns a list of row tuples --------------------------------------


def _cavity_row(args):
    zeta, C, da, dc, eta_bs = args
    cav = CavityParams.from_cooperativity(C, zeta, da, dc)
    r0 = scattering_coeffs(cav, coupled=False).r
    c1 = scattering_coeffs(cav, coupled=True)
    lam = dephasing_lambda(required_amplitude(eta_bs), cav)
    return (zeta, C, r0.real, r0.imag, c1.r.real, c1.r.imag, abs(c1.l_c), abs(c1.l_a), abs(lam) ** 2)


def _pmap(fn, tasks, jobs):
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def run_cavity(p, jobs, seed):
    tasks = [(z, C, p["delta_a_over_gamma"], p["delta_c_over_kappa"], p["eta_bs"])
             for z in p["zeta"] for C in p["C"]]
    return _pmap(_cavity_row, tasks, jobs)


def run_teleport(p, jobs, seed):
    direction = p["direction"].replace("→", "->").upper()
    if direction not in ("M->G", "G->M"):
        raise ConfigError(f"direction must be M->G or G->M, got {p['direction']!r}")
    MeasurementWindow(p["v"])
    rows = []
    for s in p["sigma"]:
        for z in p["zeta"]:
            curve = mean_pauli_fidelity(
                direction, p["C"], z, s, p["eta_bs"], p["delta_a_over_gamma"], p["delta_c_over_kappa"],
                p["v"], p["p_meas"], jobs=jobs,
            )
            rows.extend((s, z, C, f) for C, f in curve)
    return rows


def run_swap(p, jobs, seed):
    grid = sorted(p["half_loss_db"])
    if p["v"].strip().lower() == "opt":
        pts = rate_envelope(grid, p["v_max_fraction"], p["sigma0_sq"], p["loss_map"], jobs=jobs)
    else:
        v = _scalar(p["v"])
        pts = [rate(p["sigma0_sq"], db_to_eta(db), v, p["loss_map"]) for db in grid]
    return [(db, q.v, q.p_c, q.p_f, q.fidelity, q.hashing, q.rate, q.d2_bound) for db, q in zip(grid, pts)]


def run_threshold(p, jobs, seed):
    x = threshold_x()
    return [(x, 1 / (1 + x) ** 2, hashing_from_x(x))]


def run_cluster(p, jobs, seed):
    gkp_nbar = None if p["gkp_nbar"].strip().lower() == "none" else _scalar(p["gkp_nbar"])
    rows = []
    for n in p["n"]:
        if n != int(n):
            raise ConfigError(f"n must be integer-valued, got {n!r}")
        n = int(n)
        s = seq_int_metrics(n, p["lambda_abs"], p["tau"])
        r = rec_int_metrics(n, p["lambda_abs"], p["tau"], p["eps"], p["nbar"], gkp_nbar)
        added = r.per_pass_gkp_variance_added
        rows.append((n, s.dephasing, s.duration, r.dephasing, r.duration, added[-1], sum(added)))
    return rows


def run_chi_check(p, jobs, seed):
    trials = int(p["trials"])
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    return verification_report(seed=seed, trials=trials)


RUNNERS = {
    "cavity": run_cavity,
    "teleport-fidelity": run_teleport,
    "swap-rate": run_swap,
    "threshold": run_threshold,
    "cluster": run_cluster,
    "chi-check": run_chi_check,
}


# --- output ------------------------------------------------------------------------------------


def _fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return format(float(x), ".17g")
    return str(x)


def _json_value(x):
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else _fmt(x)
    return x


def _param_text(v) -> str:
    if isinstance(v, list):
        return ",".join(_param_text(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


def render(command: str, params: dict, seed: int, rows, fmt: str) -> str:
    cols = COMMANDS[command].columns
    if fmt == "json":
        doc = {
            "command": command,
            "version": __version__,
            "seed": seed,
            "parameters": {k: _param_text(v) for k, v in sorted(params.items())},
            "columns": list(cols),
            "records": [{c: _json_value(v) for c, v in zip(cols, row)} for row in rows],
        }
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    buf = io.StringIO()
    buf.write(f"# gkpmem {__version__} {command}\n")
    buf.write(f"# seed = {seed}\n")
    for k, v in sorted(params.items()):
        buf.write(f"# {k} = {_param_text(v)}\n")
    buf.write(",".join(cols) + "\n")
    for row in rows:
        buf.write(",".join(_fmt(v) for v in row) + "\n")
    return buf.getvalue()


def _error(kind: str, exc: Exception, code: int) -> int:
    record = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    sys.stderr.write(json.dumps(record) + "\n")
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gkpmem", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gkpmem {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="INI file; the [%s] section is read" % name)
        sp.add_argument("--out", help="output path (default: stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default="csv")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--jobs", type=int, default=1)
        sp.add_argument("-p", "--param", action="append", default=[], metavar="KEY=VALUE",
                        help="override a parameter")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        params = load_params(args.command, args.config, args.param)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG)
    try:
        rows = RUNNERS[args.command](params, args.jobs, args.seed)
    except ConfigError as exc:
        return _error("config", exc, EXIT_CONFIG)
    except (ParameterError, UnsupportedError, ConditioningError) as exc:
        return _error("domain", exc, EXIT_DOMAIN)
    text = render(args.command, params, args.seed, rows, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.command == "chi-check":
        for name, ok, worst in rows:
            sys.stderr.write(f"{'PASS' if ok else 'FAIL'} {name} (worst {worst:.3g})\n")
        if not all(ok for _, ok, _ in rows):
            return EXIT_CHECK_FAILED
    return 0


if __name__ == "__main__":
    sys.exit(main())
