"""Vacuum persistence at one effective mass in all four modes, side by side.

    python3 scripts/decay_curves.py --mprime 1.4 --out runs/curves_1.4
"""
import argparse
from pathlib import Path

from schwinger.pipeline import MODES, ExperimentConfig, fit_decay, mass_tag, run_curves


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--mprime", type=float, default=1.4)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path)
    args = ap.parse_args()

    cfg = ExperimentConfig(seed=args.seed)
    curves = run_curves(cfg, args.mprime, MODES)
    print("t      " + "  ".join(f"{m:>10}" for m in MODES))
    for i, t in enumerate(cfg.time_grid):
        print(f"{t:.2f}   " + "  ".join(f"{curves[m].pvac[i]:10.4f}" for m in MODES))

    window = cfg.window(args.mprime)
    print(f"\nfit window {window[0]} < t < {window[1]}")
    for mode in MODES:
        fit = fit_decay(curves[mode], window, cfg.lattice.volume)
        print(f"{mode:>10}: Gamma = {fit.gamma:.3f} +- {fit.gamma_stderr:.3f}, c1 = {fit.c1:.3f}")

    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)
        for mode, series in curves.items():
            (args.out / f"{mode}_{mass_tag(args.mprime)}.csv").write_text(series.to_csv())
        print(f"\nwrote {args.out}")


if __name__ == "__main__":
    main()
