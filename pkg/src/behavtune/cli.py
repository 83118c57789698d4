"""Command line: estimate, tune, curve, sweep-spread, demo.

Exit codes: 0 ok, 2 config error, 3 integration failure, 4 missing prerequisite data.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from importlib import resources
from pathlib import Path
from typing import Optional

from behavtune.config import ConfigError, ExperimentConfig, apply_overrides, config_from_dict
from behavtune.distance import CSV_SCHEMA, read_fits_csv
from behavtune.pipeline import run_schedule, write_curve, write_json, write_outputs, report_dict
from behavtune.trajectory import NonFiniteState

log = logging.getLogger("behavtune")

EXIT_OK, EXIT_CONFIG, EXIT_INTEGRATION, EXIT_MISSING = 0, 2, 3, 4
DEMOS = ("diffusive", "kuramoto")
SWEEP_ROWS = 4


class MissingData(RuntimeError):
    pass


def demo_config_dict(name: str) -> dict:
    return json.loads(resources.files("behavtune").joinpath(f"configs/{name}.json").read_text())


def _parse_overrides(extra: list[str]) -> list[tuple[str, str]]:
    out = []
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or "." not in tok.split("=", 1)[0]:
            raise ConfigError(f"unrecognized argument {tok!r}")
        if "=" in tok:
            key, val = tok[2:].split("=", 1)
        else:
            if i + 1 >= len(extra):
                raise ConfigError(f"override {tok} needs a value")
            key, val = tok[2:], extra[i + 1]
            i += 1
        out.append((key, val))
        i += 1
    return out


def _config(args, extra, base: Optional[dict] = None) -> ExperimentConfig:
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    d = apply_overrides(base or {}, _parse_overrides(extra))
    if args.output_dir:
        d["output_dir"] = args.output_dir
    return config_from_dict(d)


def cmd_estimate(cfg: ExperimentConfig, workers: int = 1) -> dict:
    res = run_schedule(cfg, rows=[{"action": "estimate"}], workers=workers)
    return write_outputs(cfg, res, Path(cfg.output_dir), "estimate")


def cmd_tune(cfg: ExperimentConfig, workers: int = 1) -> dict:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = cfg.schedule or [{"action": "estimate"}]

    def checkpoint(res):
        write_json(out / "report.json", report_dict(cfg, res, "tune"))

    res = run_schedule(cfg, rows=rows, workers=workers, on_row=checkpoint)
    return write_outputs(cfg, res, out, "tune")


def load_distances(path: Path) -> list[float]:
    """Per-sample distances from a report.json or a per_sample.csv."""
    if not path.exists():
        raise MissingData(f"{path} does not exist")
    if path.suffix == ".json":
        rep = json.loads(path.read_text())
        d = rep.get("per_sample")
        if not d:
            raise MissingData(f"{path} has no per-sample distances")
        return [float(v) for v in d]
    try:
        return [f.distance for f in read_fits_csv(path)]
    except (KeyError, IndexError, ValueError) as exc:
        raise MissingData(f"{path} has no per-sample distances") from exc


def cmd_curve(cfg: ExperimentConfig, source: Optional[str] = None):
    path = Path(source) if source else Path(cfg.output_dir) / "report.json"
    distances = load_distances(path)
    return write_curve(cfg, distances, Path(cfg.output_dir))


def cmd_sweep_spread(cfg: ExperimentConfig, s_values=None, workers: int = 1) -> list[dict]:
    """First four schedule rows per spread value; one CSV row each."""
    s_values = cfg.sweep_s if s_values is None else s_values
    rows = cfg.schedule[:SWEEP_ROWS]
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = []
    for s in s_values:
        d = cfg.to_json()
        d["system"]["s"] = float(s)
        sub = config_from_dict(d)
        try:
            res = run_schedule(sub, rows=rows, workers=workers)
            results.append({"s": float(s), "d_rho_baseline": res.baseline,
                            "d_rho_tuned": res.final, "reason": ""})
        except (ArithmeticError, ValueError) as exc:
            results.append({"s": float(s), "d_rho_baseline": None, "d_rho_tuned": None,
                            "reason": f"{type(exc).__name__}: {exc}"})
        log.info("sweep s=%g -> %s", s, results[-1])
    with open(out / "sweep.csv", "w", newline="") as fh:
        fh.write(CSV_SCHEMA + "\n")
        wr = csv.writer(fh)
        wr.writerow(["s", "d_rho_tuned", "d_rho_baseline", "reason"])
        for r in results:
            wr.writerow([repr(r["s"]),
                         "" if r["d_rho_tuned"] is None else repr(float(r["d_rho_tuned"])),
                         "" if r["d_rho_baseline"] is None else repr(float(r["d_rho_baseline"])),
                         r["reason"]])
    return results


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--workers", type=int, default=1,
                        help="parallel workers over sample elements (1 = bit-exact)")
    common.add_argument("--output-dir", help="override output_dir")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(
        prog="behavtune",
        description="Probabilistic behavioral distance estimation and tuning. "
                    "Any config key can be overridden as --section.key=value.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("estimate", parents=[common], help="estimate d_rho at the initial parameters")
    sub.add_parser("tune", parents=[common], help="run the configured schedule")
    c = sub.add_parser("curve", parents=[common], help="epsilon curve with 95%% intervals")
    c.add_argument("--report", help="report.json or per_sample.csv (default: output_dir/report.json)")
    s = sub.add_parser("sweep-spread", parents=[common], help="tuned d_rho versus frequency spread")
    s.add_argument("--s", type=float, nargs="+", dest="s_values", help="spread values")
    d = sub.add_parser("demo", parents=[common], help="tune a bundled demo and write its curve")
    d.add_argument("name", choices=DEMOS)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(message)s")
    try:
        base = demo_config_dict(args.name) if args.command == "demo" else None
        cfg = _config(args, extra, base)
        if args.command == "estimate":
            rep = cmd_estimate(cfg, args.workers)
            print(f"d_rho = {rep['baseline']}")
        elif args.command in ("tune", "demo"):
            rep = cmd_tune(cfg, args.workers)
            for row in rep["rows"]:
                print(f"{row['label']:<45s} {row['value']}")
            if args.command == "demo":
                cmd_curve(cfg)
        elif args.command == "curve":
            cmd_curve(cfg, args.report)
        elif args.command == "sweep-spread":
            for r in cmd_sweep_spread(cfg, args.s_values, args.workers):
                print(f"s={r['s']:<6g} d_rho={r['d_rho_tuned']} {r['reason']}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NonFiniteState as exc:
        print(f"integration failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATION
    except MissingData as exc:
        print(f"missing data: {exc}", file=sys.stderr)
        return EXIT_MISSING
    print(f"outputs in {cfg.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
