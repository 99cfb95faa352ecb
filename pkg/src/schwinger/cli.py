"""Command-line front end.

Exit code 1 marks invalid input or configuration and 2 a numerical failure
such as a failed fit or an empty post-selection. Worker count comes from SCHWINGER_WORKERS.
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from .errors import NumericalError, OptimizationError
from .hamiltonian import (
    analytic_rate_1p1,
    analytic_rate_3p1,
    build_parity_hamiltonian,
)
from .pipeline import (
    MODES,
    DecaySeries,
    ExperimentConfig,
    build_rate_table,
    fit_decay,
    mass_tag,
    run_benchmark,
    run_curve,
)
from .vqe import optimize

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL = 0, 1, 2


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _window(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"window must look like A:B, got {text!r}") from None
    if not lo < hi:
        raise argparse.ArgumentTypeError(f"empty window {text!r}")
    return lo, hi


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", default="default",
                        help="TOML config file, or 'default' for the benchmark settings")
    common.add_argument("--seed", type=int, help="override the master seed")
    common.add_argument("--convention", choices=("literal", "paper"),
                        help="normalization of the integrated (3+1)D rate")
    common.add_argument("--out", type=Path, help="output directory")

    parser = _Parser(prog="schwinger", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("hamiltonian", parents=[common], help="dump a parity-sector Hamiltonian")
    p.add_argument("--mprime", type=float, help="effective mass (default: bare mass)")
    p.add_argument("--sector", choices=("even", "odd"), default="even")
    p.add_argument("--free", action="store_true", help="drop the electric field (eE = 0)")

    p = sub.add_parser("vqe", parents=[common], help="optimize the vacuum ansatz for one m'")
    p.add_argument("--mprime", type=float, required=True)

    p = sub.add_parser("curve", parents=[common], help="vacuum persistence curve for one m'")
    p.add_argument("--mprime", type=float, required=True)
    p.add_argument("--mode", choices=MODES, default="exact")

    p = sub.add_parser("fit", parents=[common], help="fit the decay rate of a stored curve")
    p.add_argument("--mprime", type=float, required=True)
    p.add_argument("--mode", choices=MODES, default="exact")
    p.add_argument("--window", type=_window, help="open fit interval A:B (default: configured)")
    p.add_argument("--input", type=Path, help="curve CSV (default: OUT/curves/<mode>_<mprime>.csv)")

    p = sub.add_parser("rates", parents=[common], help="fit stored curves and integrate over m'")
    p.add_argument("--mode", choices=MODES, default="noiseless")

    p = sub.add_parser("benchmark", parents=[common], help="full reproduction: all masses and modes")
    p.add_argument("--mode", choices=MODES, action="append",
                   help="restrict to these modes (repeatable)")

    p = sub.add_parser("analytic", parents=[common], help="continuum rates")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--eE", type=float, required=True)
    p.add_argument("--pperp-max", type=float, help="also integrate up to this transverse momentum")
    p.add_argument("--step", type=float, default=0.2, help="m' grid step for the integral")
    return parser


def load_config(args) -> ExperimentConfig:
    config = ExperimentConfig() if args.config == "default" else ExperimentConfig.from_toml(args.config)
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.convention is not None:
        overrides["convention"] = args.convention
    if getattr(args, "command", None) == "benchmark" and args.mode:
        overrides["modes"] = tuple(dict.fromkeys(args.mode))
    return replace(config, **overrides) if overrides else config


def _emit(data):
    print(json.dumps(data, indent=2, sort_keys=True))


def _echo_config(out: Path, config: ExperimentConfig):
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.json").write_text(json.dumps(config.to_dict(), indent=2, sort_keys=True) + "\n")


def _curve_path(out: Path, mode: str, mprime: float) -> Path:
    return out / "curves" / f"{mode}_{mass_tag(mprime)}.csv"


def cmd_hamiltonian(args, config):
    params = config.lattice_for(args.mprime if args.mprime is not None else config.lattice.m)
    if args.free:
        params = params.with_field(0.0)
    text = build_parity_hamiltonian(args.sector, params).dump()
    if args.out:
        _echo_config(args.out, config)
        (args.out / f"hamiltonian_{args.sector}_{mass_tag(params.m)}.txt").write_text(text)
    sys.stdout.write(text)


def cmd_vqe(args, config):
    h0 = build_parity_hamiltonian("even", config.lattice_for(args.mprime).with_field(0.0))
    try:
        result, status = optimize(h0, opts=config.vqe), EXIT_OK
    except OptimizationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        result, status = exc.best, EXIT_NUMERICAL
    record = result.to_record(args.mprime, config.lattice.a)
    if args.out:
        _echo_config(args.out, config)
        (args.out / f"vqe_{mass_tag(args.mprime)}.json").write_text(
            json.dumps(record, indent=2, sort_keys=True) + "\n")
    _emit(record)
    return status


def cmd_curve(args, config):
    series = run_curve(config, args.mprime, args.mode)
    if series.degraded:
        print(f"warning: VQE fidelity {series.vqe_fidelity:.4f} below threshold", file=sys.stderr)
    if args.out:
        _echo_config(args.out, config)
        path = _curve_path(args.out, args.mode, args.mprime)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(series.to_csv())
    sys.stdout.write(series.to_csv())


def _load_series(path: Path, mprime: float, mode: str) -> DecaySeries:
    if not path.is_file():
        raise UsageError(f"curve file {path} not found; run `schwinger curve` first")
    return DecaySeries.from_csv(path.read_text(), mprime, mode)


def cmd_fit(args, config):
    path = args.input or _curve_path(args.out or Path("."), args.mode, args.mprime)
    series = _load_series(path, args.mprime, args.mode)
    window = args.window or config.window(args.mprime)
    fit = fit_decay(series, window, config.lattice.volume)
    _emit({
        "mprime": args.mprime,
        "mode": args.mode,
        "window": list(window),
        "gamma": fit.gamma,
        "gamma_stderr": fit.gamma_stderr,
        "c1": fit.c1,
        "n_points": fit.n_points,
    })


def cmd_rates(args, config):
    out = args.out or Path(".")
    curves = {m: _load_series(_curve_path(out, args.mode, m), m, args.mode) for m in config.mass_grid}
    table = build_rate_table(config, curves, args.mode)
    data = table.to_dict()
    data["selected"] = data["gamma_3p1"][config.convention]
    _emit(data)
    if any(v is None for v in table.gamma_3p1.values()):
        return EXIT_NUMERICAL


def cmd_benchmark(args, config):
    out = args.out or Path("benchmark_out")
    result = run_benchmark(config, out_dir=out)
    summary = {
        mode: {c: (None if v is None else v.value) for c, v in t.gamma_3p1.items()}
        for mode, t in result.tables.items()
    }
    _emit({"out": str(out), "gamma_3p1": summary, "failures": result.failures})
    if result.failures:
        return EXIT_NUMERICAL


def cmd_analytic(args, config):
    data = {"m": args.m, "eE": args.eE, "gamma_1p1": analytic_rate_1p1(args.m, args.eE)}
    if args.pperp_max is not None:
        conv = args.convention or "literal"
        data["gamma_3p1"] = analytic_rate_3p1(args.m, args.eE, args.pperp_max, args.step, conv)
        data["convention"] = conv
    _emit(data)


COMMANDS = {
    "hamiltonian": cmd_hamiltonian,
    "vqe": cmd_vqe,
    "curve": cmd_curve,
    "fit": cmd_fit,
    "rates": cmd_rates,
    "benchmark": cmd_benchmark,
    "analytic": cmd_analytic,
}


def cli_dispatch(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        config = load_config(args)
        return COMMANDS[args.command](args, config) or EXIT_OK
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def main():
    sys.exit(cli_dispatch())


if __name__ == "__main__":
    main()
