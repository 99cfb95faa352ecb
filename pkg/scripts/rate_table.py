"""Fitted (1+1)D rates per effective mass against the continuum formula, plus the integrated rate.

    python3 scripts/rate_table.py --out runs/benchmark
"""
import argparse
from pathlib import Path

from schwinger.hamiltonian import analytic_rate_1p1
from schwinger.pipeline import ExperimentConfig, analytic_table, run_benchmark


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--out", type=Path, help="also write the full output bundle here")
    args = ap.parse_args()

    cfg = ExperimentConfig(seed=args.seed)
    result = run_benchmark(cfg, out_dir=args.out)
    modes = list(result.tables)
    print("m'     analytic  " + "  ".join(f"{m:>10}" for m in modes))
    for m in cfg.mass_grid:
        row = []
        for mode in modes:
            entry = next(e for e in result.tables[mode].entries if e.mprime == m)
            row.append(f"{entry.gamma:10.3f}" if entry.gamma is not None else f"{'failed':>10}")
        print(f"{m:.1f}   {analytic_rate_1p1(m, cfg.lattice.eE):8.3f}  " + "  ".join(row))

    analytic = analytic_table(cfg)["gamma_3p1"]
    print("\nintegrated (3+1)D rate      paper-match    literal")
    print(f"{'analytic':>22}   {analytic['paper']:11.4f}  {analytic['literal']:9.4f}")
    for mode in modes:
        g = result.tables[mode].gamma_3p1
        print(f"{mode:>22}   {g['paper'].value:11.4f}  {g['literal'].value:9.4f}")
    if result.failures:
        print("\nfailures:", result.failures)


if __name__ == "__main__":
    main()
