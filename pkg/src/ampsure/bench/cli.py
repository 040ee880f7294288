"""Command-line entry point: ``ampsure <subcommand> [--config FILE] [--profile P] ...``."""

import argparse
import logging
import sys

from ..errors import AmpSureError
from .experiment import MODES, PROFILES, describe_error, load_config, run_experiment

HELP = {
    "recover": "D-AMP recovery of every dataset image (fallback denoiser, or --weights)",
    "train": "train a denoiser on noisy copies of the dataset images",
    "joint": "pretrain, then alternate D-AMP recovery and MC-SURE training",
    "compare-estimators": "score the measurement- and image-domain noise estimators",
    "sure-check": "compare mean MC-SURE with the true MSE over noise draws",
    "eval": "PSNR of recovered images against the dataset",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="ampsure", description=__doc__.split(":")[0])
    parser.add_argument("-v", "--verbose", action="count", default=0, help="more logging (repeatable)")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    for mode in MODES:
        p = sub.add_parser(mode, help=HELP[mode], description=HELP[mode])
        p.add_argument("--config", help="key = value configuration file (UTF-8)")
        p.add_argument("--profile", choices=sorted(PROFILES), help="operator profile with its switch and round defaults")
        p.add_argument("--seed", type=int, help="master seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--dataset", help="image directory, or 'synthetic'")
        p.add_argument("--rate", help="sampling rate(s) M/N, comma separated")
        p.add_argument("--weights", help="initial denoiser weights (.ampw)")
        p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                       help="override any config key (repeatable)")
        if mode == "eval":
            p.add_argument("--recovered", help="directory with recovered images named <image_id>.pgm")
    return parser


def _overrides(args):
    out = {}
    for item in args.set:
        if "=" not in item:
            raise SystemExit(f"ampsure: --set expects KEY=VALUE, got {item!r}")
        k, v = (t.strip() for t in item.split("=", 1))
        k = k.replace("-", "_")
        out["rates" if k == "rate" else k] = v
    for name in ("seed", "out", "dataset", "weights", "recovered"):
        v = getattr(args, name, None)
        if v is not None:
            out[name] = v
    if args.rate is not None:
        out["rates"] = args.rate
    return out


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.profile, _overrides(args))
        code = run_experiment(cfg, args.command)
    except AmpSureError as exc:
        print(f"ampsure {args.command}: {describe_error(exc)}", file=sys.stderr)
        return 2
    if code == 0:
        print(f"ampsure {args.command}: outputs written to {cfg.out}")
    return code


if __name__ == "__main__":
    sys.exit(main())
