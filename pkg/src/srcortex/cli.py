"""Command-line entry point.

Exit codes: 0 success, 1 usage/config errors, 2 runtime failures.
"""

import argparse
import math
import sys

from .core import ModelConfig
from .experiment import ExperimentConfig, run_experiment, run_sweep
from .stimuli import StimulusSpec

SWEEPABLE = ("tau", "alpha", "lam", "sigma_mu", "dt", "dtau", "tol")


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit with code 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> _Parser:
    p = _Parser(
        prog="srcortex",
        description=(
            "Run an orientation-lifted WC/LHE completion model on a "
            "Poggendorff stimulus or an input image."
        ),
    )
    p.add_argument("--model", choices=["wc", "lhe"], required=True)
    src = p.add_mutually_exclusive_group()
    src.add_argument(
        "--stimulus",
        choices=["classic", "gratings"],
        help="generated test figure (default: gratings unless --input is given)",
    )
    src.add_argument("--input", metavar="PATH", help="PGM/PNG image to process")
    p.add_argument("--N", type=int, default=200, help="stimulus size in pixels")
    p.add_argument("--K", type=int, default=16, help="number of orientations")
    p.add_argument("--bw", type=int, default=5, help="angular profile order")
    p.add_argument("--lambda", dest="lam", type=float, default=2.0,
                   help="fidelity weight")
    p.add_argument("--alpha", type=float, default=8.0, help="sigmoid slope")
    p.add_argument("--sigma-mu", type=float, default=1.0,
                   help="local-mean Gaussian std (pixels)")
    p.add_argument("--dt", type=float, default=0.15, help="descent step")
    p.add_argument("--dtau", type=float, default=0.01, help="heat solver step")
    p.add_argument("--tau", type=float, default=5.0, help="kernel diffusion time")
    p.add_argument("--tol", type=float, default=1e-4, help="stopping threshold")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--poly-degree", type=int, default=9,
                   help="odd degree of the LHE contrast fit")
    p.add_argument("--sweep", metavar="PARAM=v1,v2,...",
                   help=f"run once per value of one of {', '.join(SWEEPABLE)}")
    p.add_argument("--out", metavar="DIR", default="out", help="output directory")
    p.add_argument("--forcing", choices=["continuous", "discrete-paper"],
                   default="continuous")
    p.add_argument("--sigma-sign", choices=["paper", "flipped"], default="paper")
    return p


def _parse_sweep(text: str):
    param, _, tail = text.partition("=")
    param = param.strip()
    if param not in SWEEPABLE:
        raise ValueError(f"cannot sweep {param!r}; choose one of {SWEEPABLE}")
    values = tuple(float(v) for v in tail.split(",") if v.strip())
    if not values:
        raise ValueError("sweep needs at least one value")
    return param, values


def config_from_args(args) -> ExperimentConfig:
    model_cfg = ModelConfig(
        model=args.model,
        lam=args.lam,
        alpha=args.alpha,
        sigma_mu=args.sigma_mu,
        dt=args.dt,
        dtau=args.dtau,
        tau=args.tau,
        tol=args.tol,
        poly_degree=args.poly_degree,
        max_iters=args.max_iters,
        forcing=args.forcing,
        sigma_sign=args.sigma_sign,
    )
    stimulus = None
    if args.input is None:
        kind = args.stimulus or "gratings"
        period = 25.0 * args.N / 200.0 if kind == "gratings" else 0.0
        stimulus = StimulusSpec(
            n_pixels=args.N,
            bar_width=30.0 * args.N / 200.0,
            incidence_angle=math.pi / 3.0,
            grating_period=period,
        )
    sweep_param, sweep_values = (None, ())
    if args.sweep:
        sweep_param, sweep_values = _parse_sweep(args.sweep)
    return ExperimentConfig(
        model_cfg=model_cfg,
        out_dir=args.out,
        stimulus=stimulus,
        input_path=args.input,
        n_orient=args.K,
        profile_order=args.bw,
        sweep_param=sweep_param,
        sweep_values=sweep_values,
    )


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits on usage errors and --help
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
    except ValueError as exc:
        print(f"srcortex: error: {exc}", file=sys.stderr)
        return 1
    try:
        if cfg.sweep_param is not None:
            reports = run_sweep(cfg)
            for value, rep in zip(cfg.sweep_values, reports):
                print(f"{cfg.sweep_param}={value:g}: offset_px={rep['offset_px']}")
        else:
            rep = run_experiment(cfg)
            print(
                f"done: iterations={rep['iterations']} "
                f"converged={rep['converged']} offset_px={rep['offset_px']}"
            )
    except Exception as exc:
        print(f"srcortex: runtime error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
