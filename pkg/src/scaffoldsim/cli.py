"""Command line front end.

Subcommands:
  run <config>        run an experiment described by a config file
  preset <name>       run one of the built-in benchmark presets
  validate <config>   check a config file and echo the effective values
  tensor <file>       print the orientation moments and cell tensors
  rates <out.csv>     export dense samples of the four rate factors

Exit status: 0 success, 1 solver/runtime failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .config import (ConfigError, PRESETS, load_config, preset_config,
                     resolve_out_dir)
from .experiment import load_tensor_file, run_experiment
from .fibers import NotSPDError, acg_moment, build_tensors, restrict_2d
from .ode import IntegrationError
from .params import ParameterSet
from .pde import PdeSolverError
from .rates import alpha1_chi, alpha1_s, alpha2_chi, alpha2_s


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    return _execute(cfg, args.out)


def _cmd_preset(args) -> int:
    cfg = preset_config(args.name)
    return _execute(cfg, args.out)


def _execute(cfg, cli_out) -> int:
    out_dir = resolve_out_dir(cfg, cli_out)
    result = run_experiment(cfg, out_dir)
    for line in result["summary"]:
        print(line)
    print(f"outputs written to {out_dir}")
    return 0


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"config ok: model={cfg.model}, t_end={cfg.t_end} h, seed={cfg.seed}")
    user_keys = [k for k, v in cfg.provenance.items() if v == "user"]
    for k in sorted(user_keys):
        print(f"  {k} = {cfg.effective[k]}")
    if not user_keys:
        print("  (all defaults)")
    return 0


def _fmt_matrix(name, mat) -> str:
    rows = ["  ".join(f"{v: .6e}" for v in row) for row in np.atleast_2d(mat)]
    return f"{name} =\n  " + "\n  ".join(rows)


def _cmd_tensor(args) -> int:
    mat = load_tensor_file(args.file)
    p = ParameterSet()
    if args.kind == "A":
        M = acg_moment(mat)
        print(_fmt_matrix("A", mat))
        print(_fmt_matrix("M (second moment)", M))
    elif args.kind == "D1":
        M = np.asarray(mat) / (p.s1 ** 2 / p.lambda10)
        print(_fmt_matrix("M (from D1)", M))
    else:
        raise ConfigError("tensor command supports kind A or D1")
    tn = build_tensors(M, p)
    print(_fmt_matrix("D1 [um^2/h]", tn.D1))
    print(_fmt_matrix("D2 [um^2/h]", tn.D2))
    print(_fmt_matrix("D1 (planar restriction)", restrict_2d(tn.D1)))
    print(_fmt_matrix("D2 (planar restriction)", restrict_2d(tn.D2)))
    return 0


def _cmd_rates(args) -> int:
    p = ParameterSet(chi_c=args.chi_c) if args.chi_c else ParameterSet()
    n = args.points
    S = np.linspace(args.s_lo, args.s_hi, n)
    chi = np.linspace(0.0, args.chi_hi * p.chi_c, n)
    with open(args.out, "w", newline="\n") as f:
        f.write("S,alpha1_S,alpha2_S,chi,alpha1_chi,alpha2_chi\n")
        for k in range(n):
            f.write(",".join(repr(float(v)) for v in (
                S[k], alpha1_s(S[k], p), alpha2_s(S[k], p),
                chi[k], alpha1_chi(chi[k], p), alpha2_chi(chi[k], p))) + "\n")
    print(f"wrote {n} samples to {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scaffoldsim",
                                 description="Cell seeding simulations on fibrous scaffolds")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a config file")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="output directory (overrides config and environment)")
    p_run.set_defaults(func=_cmd_run)

    p_pre = sub.add_parser("preset", help=f"run a benchmark preset {sorted(PRESETS)}")
    p_pre.add_argument("name", choices=sorted(PRESETS))
    p_pre.add_argument("--out")
    p_pre.set_defaults(func=_cmd_preset)

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(func=_cmd_validate)

    p_ten = sub.add_parser("tensor", help="print diffusion tensors for a matrix file")
    p_ten.add_argument("file")
    p_ten.add_argument("--kind", choices=["A", "D1"], default="A")
    p_ten.set_defaults(func=_cmd_tensor)

    p_rat = sub.add_parser("rates", help="export dense rate-function samples")
    p_rat.add_argument("out")
    p_rat.add_argument("--points", type=int, default=400)
    p_rat.add_argument("--s-lo", type=float, default=0.0)
    p_rat.add_argument("--s-hi", type=float, default=4.0)
    p_rat.add_argument("--chi-hi", type=float, default=4.0,
                       help="upper chi bound in multiples of chi_c")
    p_rat.add_argument("--chi-c", type=float, default=None, dest="chi_c")
    p_rat.set_defaults(func=_cmd_rates)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except (IntegrationError, PdeSolverError, NotSPDError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except (FileNotFoundError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
