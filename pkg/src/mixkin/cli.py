"""``mixkin`` command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import logging
import sys

from .errors import ConfigError, MixkinError, NumericalError
from .harness import load_config, parse_config, riemann_differences, run_preset, species_distance
from .stepper import SCHEMES

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

logger = logging.getLogger("mixkin")


def _nx_list(text):
    try:
        values = [int(v) for v in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected integers, got {text!r}") from None
    if not values:
        raise argparse.ArgumentTypeError("empty resolution list")
    return values


def _common(parser):
    parser.add_argument("--out", help="output directory (default from config or ./out/<command>)")
    parser.add_argument("--serial", action="store_true", help="single-threaded BLAS for reproducible output")
    parser.add_argument("--plots", action="store_true", help="also write SVG line plots")
    parser.add_argument("-v", "--verbose", action="store_true")


def build_parser():
    parser = argparse.ArgumentParser(prog="mixkin", description="Semi-Lagrangian BGK solver for inert gas mixtures.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run an experiment described by a JSON config")
    run.add_argument("--config", required=True)
    _common(run)

    acc = sub.add_parser("accuracy", help="self-convergence table on the smooth periodic preset")
    acc.add_argument("--scheme", required=True, choices=sorted(SCHEMES))
    acc.add_argument("--eps", required=True, type=float)
    acc.add_argument("--nx", required=True, type=_nx_list, nargs="+", help="e.g. 40,80,160,320")
    _common(acc)

    ind = sub.add_parser("indiff", help="four identical gases against a single gas")
    ind.add_argument("--eps", required=True, type=float)
    ind.add_argument("--nx", required=True, type=int)
    ind.add_argument("--scheme", default="BDF3-QCW35", choices=sorted(SCHEMES))
    _common(ind)

    rie = sub.add_parser("riemann", help="kinetic Riemann problem, optionally against an Euler reference")
    rie.add_argument("--eps", required=True, type=float)
    rie.add_argument("--kappa", required=True, type=float)
    rie.add_argument("--euler", choices=("single", "multi"))
    rie.add_argument("--nx", type=int, default=200)
    rie.add_argument("--euler-nx", type=int, default=2000)
    rie.add_argument("--scheme", default="BDF3-QCW35", choices=sorted(SCHEMES))
    _common(rie)
    return parser


def _serial_limits(serial):
    if not serial:
        return contextlib.nullcontext()
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=1)


def _config_for(args):
    if args.command == "run":
        cfg = load_config(args.config)
        return cfg.model_copy(update={"plots": True}) if args.plots else cfg
    if args.command == "accuracy":
        resolutions = [n for group in args.nx for n in group]
        data = {"preset": "accuracy", "scheme": args.scheme, "regime": {"epsilon": args.eps},
                "resolutions": resolutions, "output_dir": "out/accuracy"}
    elif args.command == "indiff":
        data = {"preset": "indiff_four", "scheme": args.scheme, "regime": {"epsilon": args.eps},
                "grid": {"nx": args.nx}, "output_dir": "out/indiff"}
    else:
        data = {"preset": "riemann_kinetic", "scheme": args.scheme,
                "regime": {"epsilon": args.eps, "kappa": args.kappa},
                "grid": {"nx": args.nx}, "euler": {"nx": args.euler_nx}, "output_dir": "out/riemann"}
    data["plots"] = args.plots
    return parse_config(data)


def _report(args, cfg, art):
    s = art.summary
    if "convergence" in s:
        print("Nx,error,rate")
        for nx, err, rate in s["convergence"]:
            print(f"{nx},{err!r},{'' if rate is None else repr(rate)}")
    if "discrepancy" in s:
        for name, value in s["discrepancy"].items():
            print(f"discrepancy_{name}={value!r}")
    for key in sorted(s):
        if key.startswith("mass_drift"):
            print(f"{key}={s[key]!r}")
    if args.command == "riemann" and args.euler:
        _riemann_reference(args, cfg, art)
    print(f"artifacts written to {art.out_dir}")


def _riemann_reference(args, cfg, kinetic):
    ref = cfg.model_copy(update={"preset": f"riemann_euler_{args.euler}"})
    art = run_preset(ref, kinetic.out_dir / f"euler_{args.euler}")
    x, moments = kinetic.fields["moments"]
    x_ref, reference = art.fields["euler_moments"]
    if args.euler == "single":
        for key, value in riemann_differences(x, moments, x_ref, reference).items():
            print(f"{key}={value!r}")
    else:
        for s, value in enumerate(species_distance(x, moments, x_ref, reference), start=1):
            print(f"n_{s}_l1={value!r}")


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config_for(args)
        with _serial_limits(args.serial):
            art = run_preset(cfg, args.out)
            _report(args, cfg, art)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except MixkinError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
