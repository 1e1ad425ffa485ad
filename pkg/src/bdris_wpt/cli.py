"""Command-line entry point: ``bdris-wpt <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 solver failure.
"""

import argparse
import sys

import numpy as np

from . import experiments
from ._validation import ContractError, NumericalError, SignalError
from .config import load_config, preset

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3

ALGORITHMS = ("sdr", "sdp", "sca", "it", "dris")


def _int_list(text):
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _float_list(text):
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="INI config file (overrides the preset)")
    common.add_argument("--preset", default="desk", choices=("paper-wifi", "desk"))
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--out", help="output directory")
    common.add_argument("--algorithm", action="append", choices=ALGORITHMS,
                        help="beamforming algorithm; repeat for several")
    common.add_argument("--realizations", type=int)
    common.add_argument("--p-t-dbm", type=float, dest="p_t_dbm", help="transmit power budget in dBm")
    common.add_argument("--workers", type=int, default=1, help="process pool size for Monte-Carlo loops")

    parser = argparse.ArgumentParser(prog="bdris-wpt", description="BD-RIS assisted wireless power transfer experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run-convergence", parents=[common], help="per-iteration DC current traces")
    p.add_argument("--cells", default="4x2,8x4", help="comma-separated MxN cells")

    p = sub.add_parser("sweep-m", parents=[common], help="mean DC current against M")
    p.add_argument("--values", type=_int_list, default=(4, 8, 12, 16))
    p.add_argument("--N", type=int, help="number of subcarriers")

    p = sub.add_parser("sweep-n", parents=[common], help="mean DC current against N")
    p.add_argument("--values", type=_int_list, default=(1, 2, 4, 8))
    p.add_argument("--M", type=int, help="surface size")

    p = sub.add_parser("waveform-report", parents=[common], help="gains, power allocation, PAPR and envelopes")
    p.add_argument("--alphas", type=_float_list, default=(0.1, 1.0, 10.0))
    p.add_argument("--powers-dbm", type=_float_list, default=(30.0, 50.0))
    p.add_argument("--M", type=int, default=32)
    p.add_argument("--N", type=int, default=8)

    p = sub.add_parser("compare-ris", parents=[common], help="D-RIS versus BD-RIS")
    p.add_argument("--m-values", type=_int_list, default=(4, 8, 16))
    p.add_argument("--n-values", type=_int_list, default=(1, 2, 4, 8))
    p.add_argument("--channels", default="los,rician")

    p = sub.add_parser("dr-table", parents=[common], help="dominance ratio of the two relaxations")
    p.add_argument("--setups", default="4x8,8x4,8x8,12x8", help="comma-separated MxN setups")
    return parser


def _cells(text):
    try:
        return tuple(tuple(int(v) for v in cell.lower().split("x")) for cell in text.split(","))
    except ValueError:
        raise ContractError(f"expected MxN cells such as 4x2,8x4, got {text!r}") from None


def resolve_config(args):
    cfg = load_config(args.config, preset(args.preset)) if args.config else preset(args.preset)
    changes = {}
    if args.seed is not None:
        changes["seed"] = args.seed
    if args.out is not None:
        changes["out_dir"] = args.out
    if args.realizations is not None:
        changes["realizations"] = args.realizations
    if args.p_t_dbm is not None:
        changes["P_T_dBm"] = args.p_t_dbm
    if getattr(args, "M", None) is not None and args.command == "sweep-n":
        changes["M"] = args.M
    if getattr(args, "N", None) is not None and args.command == "sweep-m":
        changes["N"] = args.N
    try:
        return cfg.replace(**changes)
    except (TypeError, ValueError) as exc:
        raise ContractError(str(exc)) from None


def run(args):
    cfg = resolve_config(args)
    algs = tuple(args.algorithm) if args.algorithm else None
    if args.command == "run-convergence":
        tables = experiments.run_convergence(cfg, algs or ("sdr", "sca", "it"), _cells(args.cells))
    elif args.command == "sweep-m":
        tables = experiments.sweep_m(cfg, args.values, algs or ("sdr", "it"), args.workers)
    elif args.command == "sweep-n":
        tables = experiments.sweep_n(cfg, args.values, algs or ("sdr", "it"), args.workers)
    elif args.command == "waveform-report":
        tables = experiments.waveform_report(cfg, args.alphas, args.powers_dbm, args.M, args.N,
                                             algorithm=(algs or ("it",))[0])
    elif args.command == "compare-ris":
        tables = experiments.compare_architectures(cfg, args.m_values, args.n_values, tuple(args.channels.split(",")),
                                                   args.workers)
    else:
        tables = experiments.dr_table(cfg, _cells(args.setups), cfg.realizations if args.realizations else 5)
    return experiments.save_tables(tables, cfg)


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        paths = run(args)
    except (NumericalError, SignalError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValueError as exc:  # ContractError and dataclass validation
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for path in paths:
        print(path)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
