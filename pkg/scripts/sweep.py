"""Run a CLI command over several temperatures and config overrides.

Each point gets its own output directory, e.g. ``sweeps/trip-table/t27``.
A combined ``index.csv`` lists every point with its exit status.

    python scripts/sweep.py trip-table --temps 27,85,120
    python scripts/sweep.py vssm-trace --vary cell.vssm=0.5,0.6,0.7
"""
import argparse
import csv
import itertools
from pathlib import Path

from sram5t import cli


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("command", choices=cli.COMMANDS)
    p.add_argument("--temps", default="120")
    p.add_argument("--vary", metavar="KEY=V1,V2,...", help="one config field to sweep")
    p.add_argument("--corners", default="TT,FF,SS,FS,SF")
    p.add_argument("--config")
    p.add_argument("--out", default="sweeps")
    args = p.parse_args(argv)

    temps = [float(t) for t in args.temps.split(",")]
    key, values = None, [None]
    if args.vary:
        key, raw = args.vary.split("=", 1)
        values = raw.split(",")

    root = Path(args.out) / args.command
    rows = []
    for temp, value in itertools.product(temps, values):
        tag = f"t{temp:g}" + ("" if value is None else f"_{key}={value}")
        argv_ = [args.command, "--out", str(root / tag), "--corners", args.corners, "--temp", str(temp)]
        if args.config:
            argv_ += ["--config", args.config]
        if value is not None:
            argv_ += ["--set", f"{key}={value}"]
        code = cli.main(argv_)
        rows.append((tag, temp, "" if value is None else value, code))
        print(f"{tag}: exit {code}")
    root.mkdir(parents=True, exist_ok=True)
    with open(root / "index.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["point", "temp_c", key or "value", "exit"])
        w.writerows(rows)
    return max(code for *_, code in rows)


if __name__ == "__main__":
    raise SystemExit(main())
