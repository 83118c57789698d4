"""Tune the 10-node diffusive network against the two-node specification.

Runs the bundled schedule, writes the usual report files plus the epsilon
curve, and prints one line per schedule row.

    python scripts/run_diffusive_demo.py --output-dir out/diffusive
"""

import argparse
import logging
from pathlib import Path

from behavtune.cli import cmd_curve, cmd_tune, demo_config_dict
from behavtune.config import apply_overrides, config_from_dict


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--output-dir", default="out/diffusive")
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--repetitions", type=int, default=None,
                    help="repetitions of the 100-sample tuning row")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    d = demo_config_dict("diffusive")
    if args.repetitions is not None:
        for row in d["schedule"]:
            if "repetitions" in row:
                row["repetitions"] = args.repetitions
    cfg = config_from_dict(apply_overrides(d, [("output_dir", f'"{args.output_dir}"')]))
    rep = cmd_tune(cfg, args.workers)
    cmd_curve(cfg)
    for row in rep["rows"]:
        print(f"{row['label']:<45s} {row['value']:.6g}   ({row['wall_time']:.1f}s)")
    print(f"baseline {rep['baseline']:.6g} -> resampled {rep['final_resampled']:.6g}")
    print(f"outputs in {Path(cfg.output_dir).resolve()}")


if __name__ == "__main__":
    main()
