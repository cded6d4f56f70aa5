"""Command-line front end: sweeps over the analytic model, Monte Carlo and allocation.

Every command writes one CSV row per evaluated point. The first line is a
``#`` comment with the generation time; everything below it depends only on
the inputs, so reruns with the same configuration produce identical bodies.
"""

import argparse
import csv
import io
import math
import os
import re
import sys
import tempfile
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__, _accel
from .allocate import (RateEvaluator, SearchGrids, algorithm1, exhaustive_search, oma_sweep,
                       rate_region_sweep)
from .analytic import NetworkParams, QuadratureError, coverage_result, throughput_from_coverage
from .fsic import Allocation, db_to_linear, linear_to_db
from .simulate import default_sim_radius, simulate_coverage_grid
from .spectral import ConfigError, OverlapConfig, interference_factor

FIGURES = {
    "fig2": ["ifactor", "--alpha", "0:0.05:1", "--beta-grid", "auto"],
    "fig3": ["coverage-mc", "--alpha", "0.25,0.75", "--beta-frac", "0,0.5", "--theta-db", "-10:1:10",
             "--trials", "200000", "--seed", "7"],
    "fig4": ["rate-region", "--alpha", "0,0.2,0.5,1", "--p1", "0:0.05:1", "--oma"],
    "fig5": ["coverage-analytic", "--alpha", "0.1,0.25,0.5,0.75,1", "--beta-frac", "0.5",
             "--theta-db", "-10:0.5:10"],
    "fig6": ["coverage-analytic", "--alpha", "0:0.01:1", "--beta-frac", "0.5", "--theta-db", "-1,0,1"],
    "fig7": ["coverage-analytic", "--alpha", "0,0.25,0.5,0.75,1", "--beta-frac", "0.5",
             "--theta-db", "-10:0.5:15"],
    "fig8": ["coverage-analytic", "--alpha", "0:0.01:1", "--beta-frac", "0.5", "--theta-db", "-1,0,1"],
    "fig9": ["sweep-alpha", "--alpha", "0.05:0.05:1", "--tmt", "0.05,0.25"],
    "fig10": ["coverage-analytic", "--alpha", "0:0.01:1", "--beta-frac", "0,0.5,1", "--theta-db", "0"],
}
# coverage and rates against the power split
FIGURES["power-split"] = ["coverage-analytic", "--alpha", "0.35,0.75", "--beta-frac", "0,0.5",
                          "--p1", "0:0.02:1", "--theta-db", "0"]

NETWORK_COLUMNS = ["lam", "eta", "sigma2"]
GRID_COLUMNS = ["theta_db_lo", "theta_db_hi", "theta_db_step", "p_step", "beta_divisions"]


def _db(x):
    return float(linear_to_db(x))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def parse_number(text):
    """A float, also accepting exact fractions such as ``1/3``."""
    try:
        return float(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"not a number: {text!r}") from None


def parse_grid(text):
    """``a:step:b`` (inclusive), a comma list, or a single number."""
    text = str(text).strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ConfigError(f"grid must look like start:step:stop, got {text!r}")
        lo, step, hi = (parse_number(s) for s in parts)
        if not step > 0 or hi < lo:
            raise ConfigError(f"grid {text!r} needs a positive step and stop >= start")
        n = int(math.floor((hi - lo) / step + 1e-9)) + 1
        return [round(lo + k * step, 12) for k in range(n)]
    return [parse_number(s) for s in text.split(",") if s.strip()]


def load_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment. Keys use the long option names."""
    out = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return "" if v is None else str(v)


def write_csv(path, columns, rows, header):
    """Write atomically: a temp file in the target directory, then ``os.replace``."""
    buf = io.StringIO()
    buf.write(f"# {header}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for row in rows:
        w.writerow([_fmt(row.get(c)) for c in columns])
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(prefix=".pnoma-", suffix=".csv.tmp", dir=os.path.dirname(target))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _network(args):
    sigma2 = args.sigma2 if args.sigma2 is not None else db_to_linear(args.noise_db)
    return NetworkParams(lam=args.lam, eta=args.eta, sigma2=float(sigma2))


def _grids(args):
    g = SearchGrids(theta_db_lo=args.theta_db_lo, theta_db_hi=args.theta_db_hi, theta_db_step=args.theta_db_step,
                    p_step=args.p_step, beta_divisions=args.beta_divisions)
    if not (g.theta_db_step > 0 and g.p_step > 0 and g.beta_divisions >= 1 and g.theta_db_hi >= g.theta_db_lo):
        raise ConfigError("search grids need positive steps, beta_divisions >= 1 and theta_db_hi >= theta_db_lo")
    return g


def _provenance(p, grids=None):
    row = {"lam": p.lam, "eta": p.eta, "sigma2": p.sigma2}
    if grids is not None:
        row.update(theta_db_lo=grids.theta_db_lo, theta_db_hi=grids.theta_db_hi,
                   theta_db_step=grids.theta_db_step, p_step=grids.p_step, beta_divisions=grids.beta_divisions)
    return row


def _overlaps(args):
    """``(alpha, beta)`` pairs from ``--alpha`` with ``--beta`` or ``--beta-frac``."""
    alphas = parse_grid(args.alpha)
    if args.beta is not None and args.beta_frac is not None:
        raise ConfigError("give either --beta or --beta-frac, not both")
    out = []
    for a in alphas:
        if args.beta_frac is not None:
            for x in parse_grid(args.beta_frac):
                if not 0.0 <= x <= 1.0:
                    raise ConfigError(f"beta fraction must lie in [0, 1], got {x}")
                out.append(OverlapConfig(a, x * (1.0 - a)))
        else:
            for b in parse_grid(args.beta if args.beta is not None else "0"):
                out.append(OverlapConfig(a, b))
    return out


def _allocations(args):
    theta1 = parse_grid(args.theta_db)
    theta2 = parse_grid(args.theta2_db) if args.theta2_db is not None else None
    out = []
    for p1 in parse_grid(args.p1):
        for t1 in theta1:
            for t2 in (theta2 if theta2 is not None else [t1]):
                out.append((p1, t1, t2, Allocation.from_db(p1, t1, t2)))
    return out


COVERAGE_COLUMNS = ["alpha", "beta", "p1", "theta1_db", "theta2_db", "i_factor", "bw1", "bw2", "branch",
                    "p_cov1", "p_cov2", "r1", "r2", "r_tot", "quad_error"] + NETWORK_COLUMNS
MC_COLUMNS = COVERAGE_COLUMNS[:-3] + ["mc_cov1", "mc_cov2", "mc_half_width1", "mc_half_width2", "trials",
                                      "seed", "r_sim"] + NETWORK_COLUMNS


def _coverage_rows(args, p):
    rows, points = [], []
    for cfg in _overlaps(args):
        for p1, t1, t2, a in _allocations(args):
            res = coverage_result(cfg, a, p)
            r1 = float(throughput_from_coverage(cfg.bw1, res.p_cov1, a.theta1))
            r2 = float(throughput_from_coverage(cfg.bw2, res.p_cov2, a.theta2))
            rows.append({"alpha": cfg.alpha, "beta": cfg.beta, "p1": p1, "theta1_db": t1, "theta2_db": t2,
                         "i_factor": cfg.i_factor, "bw1": cfg.bw1, "bw2": cfg.bw2, "branch": res.branch.name,
                         "p_cov1": res.p_cov1, "p_cov2": res.p_cov2, "r1": r1, "r2": r2, "r_tot": r1 + r2,
                         "quad_error": res.quadrature_error, **_provenance(p)})
            points.append((cfg, a))
    return rows, points


def cmd_ifactor(args, p):
    alphas = parse_grid(args.alpha)
    rows = []
    for a in alphas:
        beta_max = 1.0 - a
        if args.beta_grid == "auto":
            betas = [beta_max * k / 10 for k in range(11)] if a < 1 else [0.0]
        else:
            # pairs outside the triangle are skipped so one beta grid can span all alphas
            betas = [b for b in parse_grid(args.beta_grid) if b <= beta_max + 1e-12]
        for b in betas:
            cfg = OverlapConfig(a, b)
            rows.append({"alpha": cfg.alpha, "beta": cfg.beta, "beta_max": beta_max,
                         "beta_frac": cfg.beta / beta_max if beta_max > 0 else 0.0,
                         "bw1": cfg.bw1, "bw2": cfg.bw2, "i_factor": interference_factor(cfg.alpha, cfg.beta)})
    return ["alpha", "beta", "beta_max", "beta_frac", "bw1", "bw2", "i_factor"], rows


def cmd_coverage_analytic(args, p):
    rows, _ = _coverage_rows(args, p)
    return COVERAGE_COLUMNS, rows


def cmd_coverage_mc(args, p):
    rows, points = _coverage_rows(args, p)
    r_sim = args.r_sim if args.r_sim is not None else default_sim_radius(p.lam)
    mc = simulate_coverage_grid(points, p, args.trials, args.seed, r_sim=r_sim, threads=args.threads)
    for row, m in zip(rows, mc):
        row.update(mc_cov1=m.p_cov1, mc_cov2=m.p_cov2, mc_half_width1=m.half_width1, mc_half_width2=m.half_width2,
                   trials=m.n_trials, seed=m.seed, r_sim=r_sim)
    return MC_COLUMNS, rows


RATE_REGION_COLUMNS = ["scheme", "alpha", "p1", "bw1", "beta", "theta1_db", "theta2_db", "r1", "r2", "r_tot",
                       "branch"] + NETWORK_COLUMNS + GRID_COLUMNS


def cmd_rate_region(args, p):
    g = _grids(args)
    p1s = parse_grid(args.p1)
    if any(not 0.0 <= x <= 1.0 for x in p1s):
        raise ConfigError("p1 values must lie in [0, 1]")
    rows = []
    prov = _provenance(p, g)
    for a in parse_grid(args.alpha):
        OverlapConfig(a, 0.0)
        for pt in rate_region_sweep(a, p1s, g, p):
            rows.append({"scheme": "pnoma", "alpha": a, "p1": pt.p1, "beta": pt.beta,
                         "theta1_db": _db(pt.theta1), "theta2_db": _db(pt.theta2),
                         "r1": pt.r1, "r2": pt.r2, "r_tot": pt.r_tot, "branch": pt.branch.name, **prov})
    if args.oma:
        bw1s = parse_grid(args.bw1)
        if any(not 0.0 < x < 1.0 for x in bw1s):
            raise ConfigError("bw1 values must lie in (0, 1)")
        for pt in oma_sweep(bw1s, g, p):
            rows.append({"scheme": "oma", "bw1": pt.bw1, "theta1_db": _db(pt.theta1),
                         "theta2_db": _db(pt.theta2), "r1": pt.r1, "r2": pt.r2, "r_tot": pt.r_tot,
                         **prov})
    return RATE_REGION_COLUMNS, rows


ALLOCATE_COLUMNS = ["method", "alpha", "tmt", "feasible", "beta", "p1", "p2", "theta1_db", "theta2_db", "r1",
                    "r2", "r_tot", "branch", "eval_count", "exhaustive_eval_count", "beta_iterations",
                    "infeasibility_reason"] + NETWORK_COLUMNS + GRID_COLUMNS


def _allocation_rows(alphas, tmts, methods, g, p):
    rows = []
    prov = _provenance(p, g)
    for a in alphas:
        OverlapConfig(a, 0.0)
        ev = RateEvaluator(a, g, p)
        for T in tmts:
            if T < 0:
                raise ConfigError(f"TMT must be non-negative, got {T}")
            for m in methods:
                out = (algorithm1 if m == "algorithm1" else exhaustive_search)(a, T, g, p, ev)
                rows.append({"method": m, "alpha": a, "tmt": T, "feasible": out.feasible, "beta": out.beta,
                             "p1": out.p1, "p2": out.p2, "theta1_db": _db(out.theta1),
                             "theta2_db": _db(out.theta2), "r1": out.r1, "r2": out.r2,
                             "r_tot": out.r_tot, "branch": out.branch.name, "eval_count": out.eval_count,
                             "exhaustive_eval_count": g.exhaustive_evaluations(a),
                             "beta_iterations": out.beta_iterations,
                             "infeasibility_reason": out.infeasibility_reason.value, **prov})
    return rows


def _methods(name):
    return ["algorithm1", "exhaustive"] if name == "both" else [name]


def cmd_allocate(args, p):
    rows = _allocation_rows([args.alpha], [args.tmt], _methods(args.method), _grids(args), p)
    return ALLOCATE_COLUMNS, rows


def cmd_sweep_alpha(args, p):
    rows = _allocation_rows(parse_grid(args.alpha), parse_grid(args.tmt), _methods(args.method), _grids(args), p)
    return ALLOCATE_COLUMNS, rows


COMMANDS = {
    "ifactor": cmd_ifactor,
    "coverage-analytic": cmd_coverage_analytic,
    "coverage-mc": cmd_coverage_mc,
    "rate-region": cmd_rate_region,
    "allocate": cmd_allocate,
    "sweep-alpha": cmd_sweep_alpha,
}


def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat key = value file; command-line flags override it")
    common.add_argument("-o", "--output", default="-", help="CSV path ('-' for stdout)")
    common.add_argument("--lam", type=parse_number, default=10.0, help="BS intensity")
    common.add_argument("--eta", type=parse_number, default=4.0, help="path-loss exponent")
    common.add_argument("--noise-db", type=parse_number, default=-90.0, help="noise power in dB")
    common.add_argument("--sigma2", type=parse_number, default=None, help="linear noise power (overrides --noise-db)")
    common.add_argument("--threads", type=int, default=None, help="worker threads (default: PNOMA_THREADS)")
    common.add_argument("--backend", choices=["auto", "numba", "numpy"], default="auto")

    coverage = _Parser(add_help=False)
    coverage.add_argument("--alpha", "--alpha-grid", dest="alpha", default="0.25")
    coverage.add_argument("--beta", default=None, help="absolute beta values")
    coverage.add_argument("--beta-frac", default=None, help="beta as a fraction of 1 - alpha")
    coverage.add_argument("--p1", default="1/3")
    coverage.add_argument("--theta-db", default="0", help="UE1 threshold (and UE2's unless --theta2-db)")
    coverage.add_argument("--theta2-db", default=None)

    grids = _Parser(add_help=False)
    d = SearchGrids()
    grids.add_argument("--theta-db-lo", type=parse_number, default=d.theta_db_lo)
    grids.add_argument("--theta-db-hi", type=parse_number, default=d.theta_db_hi)
    grids.add_argument("--theta-db-step", type=parse_number, default=d.theta_db_step)
    grids.add_argument("--p-step", type=parse_number, default=d.p_step)
    grids.add_argument("--beta-divisions", type=int, default=d.beta_divisions)

    parser = _Parser(prog="pnoma", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pnoma {__version__}")
    parser.add_argument("--figure", choices=sorted(FIGURES), help="run the preset sweep for a figure")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    sp = sub.add_parser("ifactor", parents=[common], help="interference factor over (alpha, beta)")
    sp.add_argument("--alpha", "--alpha-grid", dest="alpha", default="0:0.05:1")
    sp.add_argument("--beta-grid", default="auto", help="'auto' (ten steps of 1 - alpha) or a grid")

    sub.add_parser("coverage-analytic", parents=[common, coverage], help="analytic coverage and throughput")

    sp = sub.add_parser("coverage-mc", parents=[common, coverage], help="analytic and Monte Carlo coverage")
    sp.add_argument("--trials", type=int, default=200_000)
    sp.add_argument("--seed", type=int, default=7)
    sp.add_argument("--r-sim", type=parse_number, default=None, help="simulation window radius")

    sp = sub.add_parser("rate-region", parents=[common, grids], help="max cell sum rate per power split")
    sp.add_argument("--alpha", "--alpha-grid", dest="alpha", default="0,0.2,0.5,1")
    sp.add_argument("--p1", default="0:0.05:1")
    sp.add_argument("--oma", action="store_true", help="append the orthogonal-access sweep")
    sp.add_argument("--bw1", default="0.05:0.05:0.95", help="OMA bandwidth split of UE1")

    for name, alpha_default, helptext in (("allocate", None, "TMT-constrained allocation for one alpha"),
                                          ("sweep-alpha", "0.05:0.05:1", "TMT-constrained allocation over alpha")):
        sp = sub.add_parser(name, parents=[common, grids], help=helptext)
        if alpha_default is None:
            sp.add_argument("--alpha", type=parse_number, default=0.25)
            sp.add_argument("--tmt", type=parse_number, default=0.05)
        else:
            sp.add_argument("--alpha", "--alpha-grid", dest="alpha", default=alpha_default)
            sp.add_argument("--tmt", default="0.05,0.25")
        sp.add_argument("--method", choices=["algorithm1", "exhaustive", "both"], default="algorithm1")
    return parser


_NEGATIVE = re.compile(r"^-[0-9.]")

_BOOL = {"1": True, "true": True, "yes": True, "on": True, "0": False, "false": False, "no": False, "off": False}


def _expand(argv):
    """Resolve ``--figure`` presets and a config file's ``command`` key into a full argv."""
    argv = list(argv)
    if "--figure" in argv or any(a.startswith("--figure=") for a in argv):
        pre = _Parser(add_help=False)
        pre.add_argument("--figure", choices=sorted(FIGURES))
        ns, rest = pre.parse_known_args(argv)
        if rest and rest[0] in COMMANDS:
            raise ConfigError("--figure selects the command itself; pass only option overrides")
        return FIGURES[ns.figure] + rest
    if not argv or argv[0] not in COMMANDS:
        pre = _Parser(add_help=False)
        pre.add_argument("--config")
        ns, _ = pre.parse_known_args(argv)
        if ns.config:
            cmd = load_config(ns.config).get("command")
            if cmd is not None:
                if cmd not in COMMANDS:
                    raise ConfigError(f"unknown command {cmd!r} in {ns.config}")
                return [cmd] + argv
    return argv


def _glue_negative_values(argv):
    # argparse takes "-10:1:10" for an option; bind such values to their flag
    out = []
    for tok in argv:
        if out and out[-1].startswith("--") and "=" not in out[-1] and _NEGATIVE.match(tok):
            out[-1] = f"{out[-1]}={tok}"
        else:
            out.append(tok)
    return out


def parse_args(argv):
    parser = build_parser()
    argv = _glue_negative_values(_expand(argv))
    if not argv or argv[0] in ("-h", "--help", "--version"):
        return parser.parse_args(argv or ["--help"])
    args = parser.parse_args(argv)
    if args.command is None:
        raise ConfigError("no command given")
    if args.config:
        sp = parser._subparsers._group_actions[0].choices[args.command]
        known = {a.dest: a for a in sp._actions}
        values = load_config(args.config)
        values.pop("command", None)
        updates = {}
        for key, raw in values.items():
            if key not in known or key in ("config", "help"):
                raise ConfigError(f"unknown config key {key!r} for command {args.command}")
            action = known[key]
            if isinstance(action, argparse._StoreTrueAction):
                if raw.lower() not in _BOOL:
                    raise ConfigError(f"config key {key!r} expects a boolean, got {raw!r}")
                updates[key] = _BOOL[raw.lower()]
            else:
                updates[key] = raw
        # flags win: re-parse with the file's values as defaults
        sp.set_defaults(**updates)
        args = parser.parse_args(argv)
    return args


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse_args(argv)
        if args.backend != "auto":
            _accel.set_backend(args.backend)
        if args.threads is not None:
            if args.threads < 1:
                raise ConfigError("--threads must be at least 1")
            os.environ["PNOMA_THREADS"] = str(args.threads)
        p = _network(args)
        columns, rows = COMMANDS[args.command](args, p)
        stamp = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        write_csv(args.output, columns, rows, f"pnoma {__version__} {args.command} generated {stamp}")
    except ConfigError as exc:
        print(f"pnoma: invalid configuration: {exc}", file=sys.stderr)
        return 1
    except QuadratureError as exc:
        print(f"pnoma: quadrature failure: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
