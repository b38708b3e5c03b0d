"""Command line entry point.

Exit codes: 0 success, 1 configuration or usage error, 2 numerical failure,
3 scientific verdict FAIL (``contract`` and ``sweep``).  Every failure also
writes a one-line JSON error record to stderr and ``error.json`` in the
output directory.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from ..errors import (ConfigError, DomainError, NumericalBlowupError, ProfileError,
                      ShiftWindowError, ShockLabError)
from .config import TOP, RunConfig, config_keys, parse_config, render_config
from .io import write_csv, write_keyvalue
from .report import emit_report


OK, CONFIG_ERROR, NUMERICAL_FAILURE, VERDICT_FAIL = 0, 1, 2, 3
SUBCOMMANDS = ("endstates", "profile", "simulate", "contract", "sweep", "poincare",
               "inequalities", "ledger", "report")
# short flags accepted next to the --section-key form
ALIASES = {("shock", "v_minus"): "--v-minus", ("shock", "u_minus"): "--u-minus",
           ("shock", "eps"): "--eps", ("shock", "family"): "--family",
           ("model", "alpha"): "--alpha", ("time", "T"): "--T", (TOP, "seed"): "--seed"}


class UsageError(Exception):
    def __init__(self, message, usage):
        super().__init__(message)
        self.usage = usage


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message, self.format_usage())


# {{{ argument plumbing

def _flag(sec, key):
    return f"--{sec}-{key}".replace("_", "-") if sec != TOP else f"--{key}"


def _dest(sec, key):
    return f"ov__{sec}__{key}"


def _add_common(p):
    p.add_argument("--config", help="path to the run configuration file")
    p.add_argument("--output", help="output directory (overrides config and SHOCKLAB_OUTPUT)")
    g = p.add_argument_group("config overrides")
    for sec, key in config_keys():
        names = [_flag(sec, key)]
        if (sec, key) in ALIASES and ALIASES[(sec, key)] not in names:
            names.append(ALIASES[(sec, key)])
        g.add_argument(*names, dest=_dest(sec, key), metavar="VALUE")
    g.add_argument("--bump", action="append", metavar="SPEC",
                   help="perturbation bump 'target, shape, center, width, amplitude'")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="shocklab", description="Viscous shock contraction laboratory")
    sub = p.add_subparsers(dest="command", metavar="subcommand", parser_class=_Parser)
    helps = {
        "endstates": "solve the jump conditions", "profile": "sample the viscous profile",
        "simulate": "run the PDE solver", "contract": "co-integrate PDE and shift",
        "sweep": "vanishing viscosity sweep", "poincare": "search the Poincare functional",
        "inequalities": "sample the relative functional bounds",
        "ledger": "estimate ledger of a contraction run", "report": "summarize a run directory",
    }
    subs = {name: sub.add_parser(name, help=h) for name, h in helps.items()}
    for name, sp in subs.items():
        _add_common(sp)
    sp = subs["poincare"]
    sp.add_argument("--delta", type=float, default=0.01)
    sp.add_argument("--C1", type=float, default=4.0)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--grid", type=int, default=1025)
    sp.add_argument("--bisect", action="store_true", help="also report the empirical delta boundary")
    sp = subs["inequalities"]
    sp.add_argument("--samples", type=int, default=100_000)
    sp.add_argument("--local-samples", type=int, default=1_000_000)
    sp.add_argument("--deltas", default="0.01,0.02,0.05,0.1,0.2")
    sp = subs["report"]
    sp.add_argument("--directory", help="run directory (defaults to the output directory)")
    sp.add_argument("--no-figures", action="store_true")
    return p


def load_config(args) -> RunConfig:
    text = ""
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError([f"cannot read config: {exc}"]) from None
    overrides = {}
    for sec, key in config_keys():
        val = getattr(args, _dest(sec, key), None)
        if val is not None:
            overrides[(sec, key)] = val
    for i, b in enumerate(args.bump or (), 1):
        overrides[("perturbation", f"bump{1000 + i}")] = b
    return parse_config(text, overrides)


def output_dir(args, cfg: RunConfig | None) -> Path:
    if getattr(args, "output", None):
        return Path(args.output)
    env = os.environ.get("SHOCKLAB_OUTPUT")
    if env:
        return Path(env)
    return Path(cfg.output.directory if cfg else RunConfig().output.directory)

# }}}


# {{{ pipelines

def _end_states(cfg):
    from ..model import solve_rankine_hugoniot
    s = cfg.shock
    return solve_rankine_hugoniot(s.v_minus, s.u_minus, s.eps, s.family)


def _profile(cfg):
    from ..model import GasModel
    from ..profiles import build_profile
    return build_profile(_end_states(cfg), GasModel(cfg.model.alpha),
                         cfg.numerics.L, cfg.numerics.N)


def cmd_endstates(cfg, out: Path) -> int:
    es = _end_states(cfg)
    pairs = [("v_minus", es.v_minus), ("u_minus", es.u_minus), ("v_plus", es.v_plus),
             ("u_plus", es.u_plus), ("sigma", es.sigma), ("eps", es.eps),
             ("family", es.family.value if hasattr(es.family, "value") else str(es.family)),
             ("rh_residual", float(es.rh_residual()))]
    for k, v in pairs:
        print(f"{k} = {v!r}" if isinstance(v, float) else f"{k} = {v}")
    write_keyvalue(out / "endstates.csv", pairs)
    return OK


def cmd_profile(cfg, out: Path) -> int:
    from ..profiles import shock_residual, verify_tails
    prof = _profile(cfg)
    write_csv(out / "profile.csv", ["xi", "v", "u", "h", "dv"],
              zip(prof.grid.tolist(), prof.v_tilde.tolist(), prof.u_tilde.tolist(),
                  prof.h_tilde.tolist(), prof.dv_tilde.tolist()))
    checks = [(f"residual_{k}", float(v)) for k, v in shock_residual(prof).items()]
    try:
        tails = verify_tails(prof)
        checks += [(f.name, float(getattr(tails, f.name))) for f in fields(tails)]
    except ProfileError as exc:
        checks.append(("tails", str(exc)))
    write_keyvalue(out / "profile_checks.csv", checks)
    for k, v in checks:
        print(f"{k} = {v}")
    return OK


def cmd_simulate(cfg, out: Path) -> int:
    from ..dynamics import simulate
    traj = simulate(cfg)
    cols = ["t", "min_v", "max_v", "entropy_residual", "mass_defect", "boundary_leak"]
    write_csv(out / "monitors.csv", cols,
              ([getattr(m, c) for c in cols] for m in traj.monitors))
    _write_snapshots(out / "snapshots.csv", traj.snapshots)
    last = traj.snapshots[-1]
    print(f"t = {last.t!r}  min_v = {float(last.v.min())!r}  max_v = {float(last.v.max())!r}")
    return OK


def _write_snapshots(path, states):
    def rows():
        for s in states:
            for x, v, h in zip(s.grid.tolist(), s.v.tolist(), s.h.tolist()):
                yield (float(s.t), x, v, h)
    write_csv(path, ["t", "xi", "v", "h"], rows())


def _contract(cfg):
    from ..shift import run_contraction
    return run_contraction(cfg)


def _write_contraction(res, cfg, out: Path):
    from ..shift import TRACE_COLUMNS
    sigma = _end_states(cfg).sigma
    tr = res.trace
    header = list(TRACE_COLUMNS) + ["sigma_t", "static_shift"]
    rows = [r + [sigma * r[0], sigma * r[0] + r[1]] for r in tr.rows()]
    write_csv(out / "trace.csv", header, rows)
    details = {k: v for k, v in res.details.items() if k != "snapshots"}
    write_keyvalue(out / "contract_summary.csv", details.items())
    _write_ledger(res, out)


def _write_ledger(res, out: Path):
    write_csv(out / "ledger.csv", ["family", "ratio", "n_samples"],
              ((r.family, float(r.ratio), r.n_samples) for r in res.ledger))


def cmd_contract(cfg, out: Path) -> int:
    res = _contract(cfg)
    _write_contraction(res, cfg, out)
    d = res.details
    print(f"verdict: {'PASS' if res.verdict else 'FAIL'}")
    print(f"wre monotone: {'PASS' if d['wre_monotone'] else 'FAIL'}")
    print(f"wre: {d['wre0']!r} -> {d['wreT']!r}   X(T) = {d['X_T']!r}")
    if res.first_violation is not None:
        print(f"first violation at t = {res.first_violation!r}")
    return OK if res.verdict else VERDICT_FAIL


def cmd_ledger(cfg, out: Path) -> int:
    res = _contract(cfg)
    _write_ledger(res, out)
    for r in res.ledger:
        print(f"{r.family:>12s}  {r.ratio!r:>24s}  n={r.n_samples}")
    return OK


def sweep_config(cfg):
    from ..limits import SweepConfig
    from ..model import GasModel
    return SweepConfig(end_states=_end_states(cfg), model=GasModel(cfg.model.alpha),
                       perturbation=cfg.perturbation, nu_list=tuple(cfg.sweep.nu_list),
                       T=cfg.time.T, L=cfg.sweep.L, dx=cfg.sweep.dx, lam=cfg.weight.lam,
                       delta3=cfg.functionals.delta3, delta0=cfg.functionals.delta0,
                       cfl=cfg.numerics.cfl, positivity_floor=cfg.numerics.positivity_floor)


def check_sweep(cfg) -> None:
    """Constraints that only matter when the sweep runs."""
    problems = []
    sw, eps = cfg.sweep, cfg.shock.eps
    if eps * sw.L < 20:
        problems.append(f"sweep.L: eps*L = {eps * sw.L:g} must be at least 20")
    try:
        cfg.perturbation.check_support(sw.L)
    except DomainError as exc:
        problems.append(f"perturbation (sweep domain): {exc}")
    if problems:
        raise ConfigError(problems)


def cmd_sweep(cfg, out: Path) -> int:
    from ..limits import run_sweep, static_shift
    check_sweep(cfg)
    rep = run_sweep(sweep_config(cfg))
    header = ["nu", "E0", "bd", "gap", "X_T", "max_abs_X", "drift_ratio",
              "eta_max", "vphi_int", "diss_int", "verdict", "error"]
    rows, xrows = [], []
    for r in rep.runs:
        ok = r.error is None
        rows.append([r.nu, r.initial.E0, r.initial.bd, r.initial.gap,
                     float(r.X_nu[-1]) if ok else math.nan,
                     float(np.max(np.abs(r.X_nu))) if ok else math.nan,
                     r.drift_ratio, *r.triple, r.verdict, r.error or ""])
        if ok:
            st = static_shift(rep, r)
            xrows += [(r.nu, float(t), float(x), float(s)) for t, x, s in zip(r.t, r.X_nu, st)]
    write_csv(out / "sweep.csv", header, rows)
    write_csv(out / "sweep_X.csv", ["nu", "t", "X_nu", "static_shift"], xrows)
    nus = [r.nu for r in rep.runs]
    write_csv(out / "sweep_gaps.csv", ["nu_a", "nu_b", "l1_gap"],
              [(a, b, g) for a, b, g in zip(nus, nus[1:], rep.l1_gaps)])
    write_keyvalue(out / "sweep_summary.csv",
                   [("drift_constant", rep.drift_constant),
                    ("triple_constant", rep.triple_constant),
                    ("gaps_decreasing", rep.gaps_decreasing)])
    for row in rows:
        print(f"nu = {row[0]:<6g} X(T) = {row[4]!r:<24} drift ratio = {row[6]!r}")
    print("L1 gaps: " + ", ".join(repr(g) for g in rep.l1_gaps))
    if not rep.ok:
        for r in rep.runs:
            if r.error:
                print(f"nu = {r.nu:g} failed: {r.error}", file=sys.stderr)
        return NUMERICAL_FAILURE
    return OK if rep.gaps_decreasing else VERDICT_FAIL


def cmd_poincare(cfg, out: Path, args) -> int:
    from ..inequality_lab import delta_boundary, poincare_search
    s = poincare_search(args.delta, args.C1, args.samples, cfg.seed, n_grid=args.grid)
    dmax = delta_boundary(args.C1, seed=cfg.seed) if args.bisect else math.nan
    write_csv(out / "poincare.csv",
              ["delta", "C1", "n_samples", "seed", "max_R", "sampled_max", "delta_max"],
              [[args.delta, args.C1, args.samples, cfg.seed, s.max_R, s.sampled_max, dmax]])
    write_csv(out / "poincare_argmax.csv", ["y", "W"], s.rows())
    print(f"max R = {s.max_R!r} (best random sample {s.sampled_max!r})")
    if args.bisect:
        print(f"empirical delta boundary = {dmax!r}")
    return OK


def cmd_inequalities(cfg, out: Path, args) -> int:
    from ..inequality_lab import check_local_expansions, check_phi_bounds
    try:
        deltas = tuple(float(x) for x in args.deltas.split(","))
    except ValueError:
        raise ConfigError([f"--deltas: cannot parse {args.deltas!r}"]) from None
    vm = cfg.shock.v_minus
    g = check_phi_bounds(vm, args.samples, cfg.seed)
    write_keyvalue(out / "phi_bounds.csv", g.rows())
    loc = check_local_expansions(vm, deltas, args.local_samples, cfg.seed)
    names = [f.name for f in fields(loc.rows[0])] if loc.rows else []
    write_csv(out / "local_expansions.csv", names,
              ([getattr(r, n) for n in names] for r in loc.rows))
    for k, v in g.rows():
        print(f"{k} = {v!r}")
    for r in loc.rows:
        print(asdict(r))
    return OK

# }}}


def _error_record(command, code, exc, out: Path | None):
    rec = {"subcommand": command, "exit_code": code, "error": type(exc).__name__,
           "message": str(exc)}
    if isinstance(exc, ConfigError):
        rec["violations"] = list(exc.violations)
    if isinstance(exc, NumericalBlowupError):
        rec["t"] = exc.t
    line = json.dumps(rec, sort_keys=True)
    print(line, file=sys.stderr)
    if out is not None:
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / "error.json").write_text(line + "\n")
        except OSError:
            pass


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(exc.usage)
        _error_record(argv[0] if argv else None, CONFIG_ERROR, exc, None)
        return CONFIG_ERROR
    if args.command is None:
        sys.stderr.write(parser.format_usage())
        _error_record(None, CONFIG_ERROR, UsageError("missing subcommand", ""), None)
        return CONFIG_ERROR

    cfg, out = None, None
    try:
        cfg = load_config(args)
        out = output_dir(args, cfg)
        if args.command == "report":
            d = Path(args.directory) if args.directory else out
            path = emit_report(d, figures=not args.no_figures)
            print(path)
            return OK
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.ini").write_text(render_config(cfg))
        handler = {"endstates": cmd_endstates, "profile": cmd_profile,
                   "simulate": cmd_simulate, "contract": cmd_contract,
                   "sweep": cmd_sweep, "ledger": cmd_ledger}.get(args.command)
        if handler is not None:
            return handler(cfg, out)
        if args.command == "poincare":
            return cmd_poincare(cfg, out, args)
        return cmd_inequalities(cfg, out, args)
    except ConfigError as exc:
        for v in exc.violations:
            print(f"config error: {v}", file=sys.stderr)
        _error_record(args.command, CONFIG_ERROR, exc, out or output_dir(args, None))
        return CONFIG_ERROR
    except (NumericalBlowupError, ProfileError, ShiftWindowError) as exc:
        _error_record(args.command, NUMERICAL_FAILURE, exc, out)
        return NUMERICAL_FAILURE
    except (DomainError, ShockLabError) as exc:
        _error_record(args.command, CONFIG_ERROR, exc, out)
        return CONFIG_ERROR


if __name__ == "__main__":
    sys.exit(main())
