import io as _io
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ibsh import cli, io
from ibsh.grid import make_grid
from ibsh.harness import SweepConfig, run_sweep
from ibsh.monitors import energy_report
from ibsh.regularized import RegParams, TimeControls, integrate

SMALL_SWEEP = """\
# two-row Gaussian sweep
datum = gaussian
x_min = -8
x_max = 8
n = 256
T = 0.2
eps_list = 0.25, 0.125
regime = eps_squared
p_list = 1, 2
n_out = 80
"""


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_float_round_trip(tmp_path_factory, values):
    path = tmp_path_factory.mktemp("csv") / "v.csv"
    io.write_csv(path, ("v",), ({"v": v} for v in values))
    back = [r["v"] for r in io.read_csv(path)]
    assert [float(b) for b in back] == values


def test_empty_and_single_row_reports(tmp_path):
    p = io.write_report(None, tmp_path / "empty.csv")
    assert p.read_text() == ",".join(io.REPORT_COLUMNS) + "\n"
    cfg = SweepConfig(datum="constant", datum_params={"value": 0.1}, n=128, eps_list=(0.2,), T=0.1, p_list=(1.0,))
    path = io.write_report(run_sweep(cfg), tmp_path / "one.csv")
    lines = path.read_text().splitlines()
    assert len(lines) == 2
    row = io.read_csv(path)[0]
    assert row["regime"] == "eps_squared" and row["beta"] == 0.04000000000000001


def test_output_error_names_path(tmp_path):
    target = tmp_path / "missing" / "x.csv"
    with pytest.raises(io.OutputError, match="missing"):
        io.write_csv(target, ("a",), [])


def _traj():
    g = make_grid(-10, 10, 128)
    return integrate(g.sample(lambda x: np.exp(-x * x)), RegParams(0.1, 0.01), TimeControls.uniform(0.1, 10))


def test_energy_csv_round_trip(tmp_path):
    rep = energy_report(_traj())
    back = io.read_energy_csv(io.write_energy_csv(rep, tmp_path / "e.csv"))
    for k in rep.columns():
        assert np.array_equal(getattr(back, k), getattr(rep, k))


def test_trajectory_round_trip(tmp_path):
    tr = _traj()
    times, states, params = io.load_trajectory(io.save_run(tmp_path / "t.npz", tr))
    assert np.array_equal(times, tr.times)
    assert all(np.array_equal(a.values, b.values) for a, b in zip(states, tr.states))
    assert params == tr.params and states[0].grid == tr.grid


def test_svg_is_well_formed(tmp_path):
    path = io.write_svg(
        [("a", [0.1, 0.01, 0.001], [1.0, 0.5, 0.25]), ("b & c", [0.1, 0.01], [0.0, 2.0])],
        tmp_path / "p.svg", "title", "eps", "err", logx=True, logy=True,
    )
    root = ET.parse(path).getroot()
    lines = [e for e in root.iter() if e.tag.endswith("polyline")]
    assert len(lines) == 2


def _run(argv):
    buf = _io.StringIO()
    code = cli.main(argv, stdout=buf)
    out = buf.getvalue().splitlines()
    return code, out, json.loads(out[-1])


def test_parse_cli_examples():
    cfg = cli.parse_cli(["riemann", "--ul", "0", "--ur", "1", "--t", "1"])
    assert (cfg.subcommand, cfg.ul, cfg.ur, cfg.t) == ("riemann", 0.0, 1.0, 1.0)
    with pytest.raises(SystemExit) as info:
        cli.parse_cli(["sweep"])
    assert info.value.code != 0
    with pytest.raises(SystemExit):
        cli.parse_cli(["solve", "--bogus"])


def test_riemann_command():
    code, out, summary = _run(["riemann", "--ul", "0", "--ur", "1", "--t", "1", "--samples", "7"])
    assert code == 0 and summary["ok"]
    assert out[0].startswith("shock s=[")
    assert float(out[0].split("[")[1].split(",")[0]) == pytest.approx(-0.6, abs=1e-15)
    assert out[1] == "x,u"
    assert len(out) == 1 + 1 + 7 + 1


def test_solve_command(tmp_path):
    argv = ["solve", "--eps", "0.1", "--beta", "0.01", "--datum", "gaussian", "--t-end", "0.5", "--n", "512", "--out", str(tmp_path)]
    code, _, summary = _run(argv)
    assert code == 0 and summary["agmon_violations"] == 0
    for name in ("trajectory.npz", "energy.csv", "final.csv", "metadata.json"):
        assert (tmp_path / name).exists()


def test_reference_and_entropy_check(tmp_path):
    argv = ["reference", "--datum", "riemann", "--param", "u_l=0", "--param", "u_r=1",
            "--x-min", "-4", "--x-max", "4", "--n", "400", "--t-end", "0.5", "--out", str(tmp_path)]
    code, _, summary = _run(argv)
    assert code == 0 and abs(summary["mass_change"]) < 1e-12
    out_csv = tmp_path / "prod.csv"
    code, out, summary = _run(["entropy-check", "--trajectory", str(tmp_path / "reference.npz"), "--out", str(out_csv)])
    assert code == 0
    assert out[0] == "pair_id,phi_id,production"
    assert len(io.read_csv(out_csv)) == 9 * 4
    code, _, summary = _run(["entropy-check", "--trajectory", str(tmp_path / "reference.npz"), "--tol", "-1"])
    assert code == 1 and not summary["ok"]


def _sweep(tmp_path, name):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(SMALL_SWEEP)
    out = tmp_path / name
    code, _, summary = _run(["sweep", "--config", str(cfg), "--out", str(out), "--plot", "--assert-convergence"])
    return code, summary, out


def _strip_timing(text):
    col = io.REPORT_COLUMNS.index("wall_seconds")
    return [",".join(f for k, f in enumerate(line.split(",")) if k != col) for line in text.splitlines()]


def test_sweep_command_outputs_and_determinism(tmp_path):
    code, summary, a = _sweep(tmp_path, "a")
    assert code == 0 and summary["rows"] == 2
    report = io.read_csv(a / "report.csv")
    assert list(report[0]) == list(io.REPORT_COLUMNS)
    assert len(report) == 4
    run_ids = {r["run_id"] for r in report}
    for rid in run_ids:
        assert (a / f"energy_{rid}.csv").exists()
    assert (a / "errors.svg").exists() and (a / "metadata.json").exists()
    _, _, b = _sweep(tmp_path, "b")
    assert _strip_timing((a / "report.csv").read_text()) == _strip_timing((b / "report.csv").read_text())
    for rid in run_ids:
        assert (a / f"energy_{rid}.csv").read_bytes() == (b / f"energy_{rid}.csv").read_bytes()


def test_bad_config_fails_cleanly(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("eps_list = 0.1, 0.2\n")
    code, _, summary = _run(["sweep", "--config", str(cfg), "--out", str(tmp_path)])
    assert code == 1 and "decreasing" in summary["error"]
