"""Tuned distance of the Kuramoto network versus frequency spread.

Each spread value gets the first four rows of the bundled Kuramoto schedule
(estimate, ADAM, BFGS, resample). Results go to sweep.csv.

    python scripts/run_kuramoto_sweep.py --s 1.2 4.5
"""

import argparse
import logging

from behavtune.cli import cmd_sweep_spread, demo_config_dict
from behavtune.config import config_from_dict


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--s", type=float, nargs="+", default=None,
                    help="spread values (default: the config's sweep_s)")
    ap.add_argument("--output-dir", default="out/kuramoto_sweep")
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    d = demo_config_dict("kuramoto")
    d["output_dir"] = args.output_dir
    results = cmd_sweep_spread(config_from_dict(d), args.s, args.workers)
    print(f"{'s':>6s} {'baseline':>12s} {'tuned':>12s} {'factor':>8s}")
    for r in results:
        if r["reason"]:
            print(f"{r['s']:6g} failed: {r['reason']}")
            continue
        factor = r["d_rho_baseline"] / r["d_rho_tuned"]
        print(f"{r['s']:6g} {r['d_rho_baseline']:12.5g} {r['d_rho_tuned']:12.5g} {factor:8.1f}")


if __name__ == "__main__":
    main()
