import csv

import pytest

from sram5t import cli

HEADERS = {
    "snm.csv": "kind,corner,temp_c,value_mv",
    "rnm_sweep.csv": "bl_volts,rnm_mv",
    "trip_table.csv": "corner,trip_mv,qmax_mv,qmin_mv",
    "write_margin.csv": "kind,corner,temp_c,value_mv",
    "vssm_trace_64kb.csv": "cycle,vssm_volts,delta_v_volts",
    "standby_rise_64kb.csv": "time_s,vssm_volts",
    "delay_report.csv": "corner,temp_c,w1_5tsdg_s,w0_5tsdg_s,w1_lp6t_s,w0_lp6t_s,read_5tsdg_s,w1_ratio",
    "event_trace.csv": "op_index,kind,address,delay_s,flags",
    "compare.csv": "cell_type,corner,temp_c,op_kind,standby_w,ground_swing_w,bitline_w,globalbit_w,total_w,normalized",
}


def run(tmp_path, *args):
    out = tmp_path / "out"
    code = cli.main([*args, "--out", str(out)])
    return code, out


def rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def test_trip_table_shape(tmp_path):
    code, out = run(tmp_path, "trip-table")
    assert code == 0
    r = rows(out / "trip_table.csv")
    assert r[0] == ["corner", "trip_mv", "qmax_mv", "qmin_mv"]
    assert [x[0] for x in r[1:]] == ["TT", "FF", "SS", "FS", "SF"]
    for x in r[1:]:
        assert float(x[2]) < float(x[1]) < float(x[3])


def test_vssm_trace_totals_decrease(tmp_path):
    code, out = run(tmp_path, "vssm-trace")
    assert code == 0
    totals = []
    for kb in (64, 1024, 2048):
        r = rows(out / f"vssm_trace_{kb}kb.csv")
        totals.append(float(r[1][1]) - float(r[-1][1]))
    assert totals[0] > totals[1] > totals[2] > 0


def test_rnm_sweep_interior_maximum(tmp_path):
    code, out = run(tmp_path, "rnm-sweep", "--corners", "FS")
    assert code == 0
    r = rows(out / "rnm_sweep.csv")[1:]
    assert len(r) == 66
    vals = [float(x[1]) for x in r]
    k = vals.index(max(vals))
    assert 0 < k < len(vals) - 1


def test_unknown_key_exits_2(tmp_path, capsys):
    code, out = run(tmp_path, "trip-table", "--set", "arrray.size=4")
    assert code == 2
    assert "arrray" in capsys.readouterr().err
    assert not out.exists()


def test_config_file_error_names_line(tmp_path, capsys):
    p = tmp_path / "bad.toml"
    p.write_text("[array]\nbits_per_word = 16\nsize = 4\n")
    assert cli.main(["snm", "--config", str(p), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err
    assert "array.size" in err and ":3" in err


def test_unknown_corner_exits_2(tmp_path):
    code, _ = run(tmp_path, "snm", "--corners", "TT,XX")
    assert code == 2


def test_invariant_failure_exits_1(tmp_path, capsys):
    # with the array ground almost at V_SS neither write lands
    code, out = run(tmp_path, "write-margin", "--corners", "TT", "--set", "cell.vssm=0.05")
    assert code == 1
    assert "invariant failed" in capsys.readouterr().err
    assert "result: FAIL" in (out / "summary.txt").read_text()


def test_empty_config_echoes_defaults(tmp_path):
    p = tmp_path / "empty.toml"
    p.write_text("")
    out = tmp_path / "o"
    assert cli.main(["trip-table", "--config", str(p), "--corners", "TT", "--out", str(out)]) == 0
    s = (out / "summary.txt").read_text()
    for needle in ("[devices]", "[array]", "nmos_k", "c_vssm_read_per_64kb", "result: PASS"):
        assert needle in s


def test_outputs_are_deterministic(tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    for d in (a, b):
        assert cli.main(["delay-report", "--corners", "TT,SS", "--out", str(d)]) == 0
    for name in ("delay_report.csv", "event_trace.csv", "summary.txt"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


@pytest.mark.parametrize("command", ["snm", "rnm-sweep", "write-margin", "vssm-trace",
                                     "standby-rise", "delay-report", "compare"])
def test_headers_match_schema(tmp_path, command):
    code, out = run(tmp_path, command, "--corners", "TT")
    assert code == 0
    found = [p for p in out.glob("*.csv") if p.name in HEADERS]
    assert found
    for p in found:
        assert p.read_text().splitlines()[0] == HEADERS[p.name]
    assert "result: PASS" in (out / "summary.txt").read_text()


def test_numbers_are_full_precision(tmp_path):
    _, out = run(tmp_path, "trip-table", "--corners", "TT")
    trip = rows(out / "trip_table.csv")[1][1]
    assert repr(float(trip)) == trip
