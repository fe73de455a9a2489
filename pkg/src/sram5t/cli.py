"""Command-line front end: one CSV per analysis plus a ``summary.txt``.

Exit status is 0 when every invariant the command exercises holds, 1 when
one fails (named on stderr and in the summary) and 2 on a config error.
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import array as arr
from . import cell as cellmod
from . import power as pw
from . import sequencer as seq
from . import targets
from .config import ConfigError, load_config, render

COMMANDS = ("snm", "rnm-sweep", "trip-table", "write-margin", "vssm-trace", "standby-rise",
            "delay-report", "power-report", "compare", "calibrate-check")
MARGIN_HEADER = ["kind", "corner", "temp_c", "value_mv"]


@dataclass
class ExperimentSpec:
    command: str
    config_path: str | None = None
    overrides: list = field(default_factory=list)
    output_dir: str = "out"
    corners: tuple = targets.CORNERS
    temp: float | None = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise ValueError(f"unknown command {self.command!r}")


class Run:
    """Collects CSV outputs and invariant checks for one command."""

    def __init__(self, spec: ExperimentSpec, cfg):
        self.spec, self.cfg = spec, cfg
        self.out = Path(spec.output_dir)
        self.files: list[str] = []
        self.checks: list[targets.Check] = []
        self.temp = cfg.corners.temperature if spec.temp is None else spec.temp

    def write_csv(self, name: str, header: list, rows: list) -> None:
        self.out.mkdir(parents=True, exist_ok=True)
        with open(self.out / name, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            for r in rows:
                w.writerow([_num(x) for x in r])
        self.files.append(name)

    def check(self, name: str, passed: bool, measured: str = "", target: str = "") -> None:
        self.checks.append(targets.Check(name, measured, target, bool(passed)))

    def corner(self, name):
        return self.cfg.corner(name, self.temp)


def _num(x):
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


# --------------------------------------------------------------------------
# commands


def cmd_snm(run: Run) -> None:
    c = run.cfg.cell
    cell = cellmod.build_5tsdg(run.cfg)
    rows = []
    for name in run.spec.corners:
        co = run.corner(name)
        hold = cellmod.snm(cell, co, cellmod.hold_bias(c.vddm, c.vssm))
        read = cellmod.rnm(cell, co, c.vssm, vddm=c.vddm, vssm=c.vssm)
        rows += [("HOLD", name, run.temp, hold.value), ("READ", name, run.temp, read.value)]
        run.check(f"bistable hold {name}", hold.value > 0 and not hold.monostable, f"{hold.value:.1f} mV", "> 0")
        if name == run.spec.corners[0]:
            run.write_csv(f"butterfly_{name}_hold_a.csv", ["vin_volts", "vout_volts"], hold.curve_a.tolist())
            run.write_csv(f"butterfly_{name}_hold_b.csv", ["vin_volts", "vout_volts"], hold.curve_b.tolist())
    run.write_csv("snm.csv", MARGIN_HEADER, rows)


def rnm_sweep_rows(cfg, corner, step=0.02):
    c = cfg.cell
    cell = cellmod.build_5tsdg(cfg)
    n = int(round(c.vddm / step))
    return [(k * step, cellmod.rnm(cell, corner, k * step, vddm=c.vddm, vssm=c.vssm).value)
            for k in range(n + 1)]


def cmd_rnm_sweep(run: Run) -> None:
    name = run.spec.corners[0] if len(run.spec.corners) == 1 else "FS"
    rows = rnm_sweep_rows(run.cfg, run.corner(name))
    run.write_csv("rnm_sweep.csv", ["bl_volts", "rnm_mv"], rows)
    k = int(np.argmax([r[1] for r in rows]))
    run.check(f"RNM maximum in the interior ({name})", 0 < k < len(rows) - 1,
              f"max {rows[k][1]:.1f} mV at BL {rows[k][0]:.2f} V", "interior")


def cmd_trip_table(run: Run) -> None:
    rows = targets.trip_table(run.cfg, run.temp, run.spec.corners)
    run.write_csv("trip_table.csv", ["corner", "trip_mv", "qmax_mv", "qmin_mv"],
                  [(r["corner"], r["trip"] * 1e3, r["qmax"] * 1e3, r["qmin"] * 1e3) for r in rows])
    for r in rows:
        run.check(f"Q_max < trip < Q_min {r['corner']}", r["qmax"] < r["trip"] < r["qmin"] and not r["upset"])


def cmd_write_margin(run: Run) -> None:
    rows = []
    for name in run.spec.corners:
        w0, w1 = targets.write_margins(run.cfg, name, run.temp)
        for m in (w0, w1):
            rows.append((m.which, name, run.temp, "WriteFail" if m.write_fail else m.value * 1e3))
            run.check(f"{m.which} writable {name}", not m.write_fail)
    run.write_csv("write_margin.csv", MARGIN_HEADER, rows)


def cmd_vssm_trace(run: Run) -> None:
    cfg = run.cfg
    word = arr.pattern_with_zeros(cfg.array.bits_per_word, cfg.array.pattern_zeros)
    co = run.corner(run.spec.corners[0] if len(run.spec.corners) == 1 else "FF")
    totals = []
    for factor in (1, 16, 32):
        c = arr.scaled(cfg, factor, clamps=True)
        acfg = arr.ArrayConfig.from_config(c)
        leak = arr.vssm_leak_model(c, co)
        v0 = leak.standby_level()
        tr = arr.run_to_steady_state(acfg, word, v0, leak_model=leak)
        kb = c.array.total_cells // 1024
        run.write_csv(f"vssm_trace_{kb}kb.csv", ["cycle", "vssm_volts", "delta_v_volts"],
                      [(i, v, tr.deltas[i - 1] if i else 0.0) for i, v in tr.samples])
        d = np.array(tr.deltas)
        run.check(f"{kb} Kb converged", tr.steady_state is not None)
        run.check(f"{kb} Kb delta_v nonincreasing", bool(np.all(np.diff(d) <= 10e-6)))
        if tr.steady_state is not None and tr.fixed_point is not None:
            run.check(f"{kb} Kb fixed point", abs(tr.steady_state - tr.fixed_point) < 10e-6,
                      f"{abs(tr.steady_state - tr.fixed_point) * 1e6:.2f} uV", "< 10 uV")
        totals.append(tr.delta_v_tot if tr.delta_v_tot is not None else np.nan)
    run.check("delta_v_tot decreasing with array size", all(a > b for a, b in zip(totals, totals[1:])),
              ", ".join(f"{t * 1e3:.3f}" for t in totals) + " mV")


def cmd_standby_rise(run: Run) -> None:
    cfg = run.cfg
    co = run.corner(run.spec.corners[0] if len(run.spec.corners) == 1 else "FF")
    t90 = []
    for factor in (1, 2, 4, 8):
        c = arr.scaled(cfg, factor)
        acfg = arr.ArrayConfig.from_config(c)
        leak = arr.vssm_leak_model(c, co)
        tr = arr.standby_rise(acfg, leak, 0.0)
        kb = c.array.total_cells // 1024
        run.write_csv(f"standby_rise_{kb}kb.csv", ["time_s", "vssm_volts"], tr.samples)
        v = tr.voltages
        run.check(f"{kb} Kb rise monotone", bool(np.all(np.diff(v) >= -1e-12)))
        if factor == 1:
            run.check("standby level within 5% of target", abs(v[-1] - cfg.cell.vssm) <= 0.05 * cfg.cell.vssm,
                      f"{v[-1] * 1e3:.1f} mV", f"{cfg.cell.vssm * 1e3:.0f} mV +/- 5%")
        t90.append(arr.time_to_fraction(tr, 0.9))
    run.check("time to 90% nondecreasing with size", all(a <= b for a, b in zip(t90, t90[1:])))


def cmd_delay_report(run: Run) -> None:
    cfg = run.cfg
    rows = []
    for name in run.spec.corners:
        co = run.corner(name)
        c5, c6 = cellmod.build_5tsdg(cfg), cellmod.build_6t(cfg)
        try:
            w1, w0 = seq.w1_delay(cfg, co, cell=c5), seq.w0_delay(cfg, co, cell=c5)
            l1, l0 = seq.w1_delay(cfg, co, cell=c6), seq.w0_delay(cfg, co, cell=c6)
        except seq.WriteFail as exc:
            run.check(f"writable {name}", False, str(exc))
            continue
        rd = seq.read_delay(cfg, co, cell=c5)
        rows.append((name, run.temp, w1, w0, l1, l0, rd if rd is not None else "none", w1 / l1))
        run.check(f"W0 < W1 delay {name}", w0 < w1)
        run.check(f"read completes {name}", rd is not None)
    run.write_csv("delay_report.csv", ["corner", "temp_c", "w1_5tsdg_s", "w0_5tsdg_s", "w1_lp6t_s",
                                       "w0_lp6t_s", "read_5tsdg_s", "w1_ratio"], rows)
    # functional trace on a 4-word block at the first corner
    name = run.spec.corners[0]
    nb = cfg.array.bits_per_word
    ops = []
    for r, p in enumerate((0x0000, 0xFFFF, 0xA5A5, 0x1234)):
        ops.append(seq.OpCommand(seq.Kind.WRITE, r, tuple((p >> k) & 1 for k in range(nb))))
    ops += [seq.OpCommand(seq.Kind.READ, r) for r in range(4)]
    ops.append(seq.OpCommand(seq.Kind.STANDBY, 0))
    res = seq.execute(ops, cfg, name, run.temp, seq.SubColumn.filled(cfg, rows=4))
    run.write_csv("event_trace.csv", seq.TRACE_HEADER, seq.trace_rows(res))
    reads = [r.read_data for r in res if r.kind is seq.Kind.READ]
    writes = [o.data for o in ops if o.kind is seq.Kind.WRITE]
    run.check(f"write-then-read round trip {name}", reads == writes)


def cmd_power_report(run: Run) -> None:
    cfg = run.cfg
    rows = pw.compare_report(cfg, run.spec.corners, run.temp, (pw.CellType.FIVE_T_SDG,),
                             baseline=pw.CellType.FIVE_T_SDG)
    run.write_csv("power_report.csv", pw.REPORT_HEADER, [r.as_csv() for r in rows])
    for r in rows:
        b = r.breakdown
        run.check(f"parts sum to total {r.corner} {b.op_kind.value}",
                  abs(b.total_w - (b.standby_w + b.ground_swing_w + b.bitline_w + b.globalbit_w))
                  <= 1e-12 * b.total_w)
    vs = targets.vddm_shape(cfg)
    keys = ["vddm", "vssm", "read_w", "standby_w", "ground_swing_w", "read_norm", "standby_norm"]
    run.write_csv("read_power_vs_vddm.csv", keys, [[r[k] for k in keys] for r in vs["rows"]])
    run.check("read power increasing and convex in vddm", vs["increasing"] and vs["convex"])
    run.check("ground-swing term quadratic", vs["quadratic_err"] < 1e-12)


def cmd_compare(run: Run) -> None:
    rows = pw.compare_report(run.cfg, run.spec.corners, run.temp)
    run.write_csv("compare.csv", pw.REPORT_HEADER, [r.as_csv() for r in rows])
    for r in rows:
        if r.cell_type is pw.CellType.FIVE_T_SDG:
            run.check(f"5TSDG below LP6T {r.corner} {r.breakdown.op_kind.value}", r.normalized < 1.0,
                      f"{r.normalized:.3f}", "< 1")


def cmd_calibrate_check(run: Run) -> None:
    checks = targets.calibrate_check(run.cfg)
    run.write_csv("calibrate_check.csv", ["target", "measured", "band", "pass"],
                  [(c.name, c.measured, c.target, c.passed) for c in checks])
    run.checks.extend(checks)
    for c in checks:
        print(c.line())


HANDLERS = {
    "snm": cmd_snm, "rnm-sweep": cmd_rnm_sweep, "trip-table": cmd_trip_table,
    "write-margin": cmd_write_margin, "vssm-trace": cmd_vssm_trace, "standby-rise": cmd_standby_rise,
    "delay-report": cmd_delay_report, "power-report": cmd_power_report, "compare": cmd_compare,
    "calibrate-check": cmd_calibrate_check,
}


def write_summary(run: Run) -> None:
    s = run.spec
    lines = [f"command: {s.command}", f"config: {s.config_path or '(defaults)'}",
             f"overrides: {' '.join(s.overrides) or '(none)'}", f"corners: {','.join(s.corners)}",
             f"temp_c: {run.temp!r}", "", "# parameters", render(run.cfg), "# outputs"]
    lines += run.files
    lines += ["", "# checks"]
    lines += [c.line() for c in run.checks]
    failed = [c for c in run.checks if not c.passed]
    lines += ["", f"result: {'FAIL' if failed else 'PASS'} ({len(run.checks) - len(failed)}/{len(run.checks)})"]
    run.out.mkdir(parents=True, exist_ok=True)
    (run.out / "summary.txt").write_text("\n".join(lines) + "\n")
    run.files.append("summary.txt")


def run(spec: ExperimentSpec) -> int:
    try:
        cfg = load_config(spec.config_path, spec.overrides)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    r = Run(spec, cfg)
    HANDLERS[spec.command](r)
    write_summary(r)
    failed = [c for c in r.checks if not c.passed]
    for c in failed:
        print(f"invariant failed: {c.name} {c.measured}".rstrip(), file=sys.stderr)
    return 1 if failed else 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sram5t", description="5T dual-ground SRAM analyses")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                   help="section.key=value, repeatable")
    p.add_argument("--out", default="out", metavar="DIR")
    p.add_argument("--corners", default=",".join(targets.CORNERS), metavar="LIST")
    p.add_argument("--temp", type=float, metavar="C")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    corners = tuple(c.strip().upper() for c in args.corners.split(",") if c.strip())
    bad = [c for c in corners if c not in targets.CORNERS]
    if bad or not corners:
        print(f"config error: unknown corner(s) {','.join(bad) or '(none)'}", file=sys.stderr)
        return 2
    spec = ExperimentSpec(args.command, args.config, args.overrides, args.out, corners, args.temp)
    return run(spec)


if __name__ == "__main__":
    sys.exit(main())
