import csv
import json

import pytest

from navtune.cli import main

MAP_TEXT = "resolution 0.1\norigin 0 0\n" + "\n".join(
    ["#" * 24] + ["." * 24] * 4 + ["#" * 24]
) + "\n"

FAST = {
    "dwa.vx_samples": "6",
    "dwa.vth_samples": "9",
    "dwa.sim_time": "1.5",
    "dwa.sim_granularity": "0.1",
    "sim.lidar_beams": "36",
}


@pytest.fixture
def scenario_file(tmp_path):
    (tmp_path / "m.map").write_text(MAP_TEXT)
    text = (
        "map m.map\n"
        "start 0.4 0.3 0\n"
        "goal 2.0 0.3 0\n"
        "time_limit 40\n"
        "expect Reach\n"
        "footprint -0.12 -0.1 0.12 -0.1 0.12 0.1 -0.12 0.1\n"
        + "".join(f"{k} {v}\n" for k, v in FAST.items())
    )
    p = tmp_path / "s.scn"
    p.write_text(text)
    return p


def test_run_success_prints_metrics(scenario_file, capsys):
    rc = main(["run", str(scenario_file)])
    doc = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert doc["outcome"] == "Reach" and doc["expect_met"] is True
    assert set(doc) >= {"time", "path_length", "min_clearance", "centering", "recoveries"}


def test_run_expectation_failure_exits_1(scenario_file, capsys):
    rc = main(["run", str(scenario_file), "--set", "expect=NoPath"])
    # "expect" is not a registry name: --set only patches parameters
    assert rc == 2


def test_run_unmet_expectation(tmp_path, scenario_file, capsys):
    text = scenario_file.read_text().replace("expect Reach", "expect NoPath")
    p = tmp_path / "s2.scn"
    p.write_text(text)
    rc = main(["run", str(p)])
    doc = json.loads(capsys.readouterr().out)
    assert rc == 1 and doc["expect_met"] is False


def test_run_missing_scenario_exits_2(capsys):
    rc = main(["run", "/nonexistent/x.scn"])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_run_missing_map_exits_2(tmp_path, capsys):
    p = tmp_path / "s.scn"
    p.write_text("map gone.map\nstart 0 0\ngoal 1 1\n")
    assert main(["run", str(p)]) == 2


def test_run_bad_override_exits_2(scenario_file):
    assert main(["run", str(scenario_file), "--set", "dwa.sim_time=99"]) == 2
    assert main(["run", str(scenario_file), "--set", "nonsense"]) == 2


def test_run_writes_frames_and_report(tmp_path, scenario_file, capsys):
    rep = tmp_path / "rep"
    frames = tmp_path / "frames.jsonl"
    rc = main(["run", str(scenario_file), "--frames", str(frames), "--report", str(rep)])
    assert rc == 0
    lines = frames.read_text().splitlines()
    assert lines and json.loads(lines[0])["seq"] == 0
    names = {p.name for p in rep.iterdir()}
    assert "metrics.json" in names and "events.log" in names
    assert any(n.endswith(".png") for n in names)
    # event log format: t state event detail
    first = (rep / "events.log").read_text().splitlines()[0].split(" ", 3)
    float(first[0])
    assert first[2] != ""


def test_sweep_csv_sorted_and_complete(scenario_file, capsys):
    rc = main([
        "sweep", str(scenario_file),
        "--param", "costmap.inflation_radius", "--values", "0.4,0.2,0.3",
    ])
    assert rc == 0
    rows = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert [r["value"] for r in rows] == ["0.2", "0.3", "0.4"]
    assert list(rows[0]) == [
        "value", "outcome", "time", "path_length", "min_clearance", "centering", "recoveries",
    ]


def test_sweep_single_value_matches_run(scenario_file, capsys):
    rc = main(["run", str(scenario_file), "--set", "costmap.inflation_radius=0.3"])
    run_doc = json.loads(capsys.readouterr().out)
    rc2 = main([
        "sweep", str(scenario_file),
        "--param", "costmap.inflation_radius", "--values", "0.3",
    ])
    (row,) = list(csv.DictReader(capsys.readouterr().out.splitlines()))
    assert rc == 0 and rc2 == 0
    assert row["outcome"] == run_doc["outcome"]
    assert float(row["time"]) == run_doc["time"]
    assert float(row["path_length"]) == run_doc["path_length"]
    assert float(row["centering"]) == run_doc["centering"]


def test_sweep_bad_param_and_values(scenario_file):
    assert main(["sweep", str(scenario_file), "--param", "x.y", "--values", "1"]) == 2
    assert main([
        "sweep", str(scenario_file), "--param", "dwa.sim_time", "--values", "abc",
    ]) == 2
    assert main([
        "sweep", str(scenario_file), "--param", "dwa.sim_time", "--values", "",
    ]) == 2


def test_sweep_out_file_and_report(tmp_path, scenario_file):
    out = tmp_path / "sweep.csv"
    rep = tmp_path / "fig"
    rc = main([
        "sweep", str(scenario_file),
        "--param", "dwa.sim_time", "--values", "1.0,2.0",
        "--out", str(out), "--report", str(rep),
    ])
    assert rc == 0
    assert out.read_text().startswith("value,outcome,")
    assert any(p.suffix == ".png" for p in rep.iterdir())


def test_render_writes_images(tmp_path, scenario_file, capsys):
    out = tmp_path / "imgs"
    rc = main(["render", str(scenario_file), "--t", "1.0", "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed
    suffixes = {p.suffix for p in out.iterdir()}
    assert {".pgm", ".ppm", ".png"} <= suffixes


def test_render_time_out_of_range(tmp_path, scenario_file):
    assert main([
        "render", str(scenario_file), "--t", "999", "--out", str(tmp_path / "x"),
    ]) == 2


def test_calibrate_averages_logs(tmp_path, capsys):
    def log(path, vmax, a):
        rows = ["t,x,y,theta,vx,omega"]
        t = 0.0
        while t <= vmax / a + 0.5:
            rows.append(f"{t},0,0,0,{min(vmax, a * t)},0")
            t = round(t + 0.001, 6)
        path.write_text("\n".join(rows) + "\n")

    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    log(p1, 0.5, 1.0)
    log(p2, 0.7, 1.4)
    rc = main(["calibrate", str(p1), str(p2)])
    doc = json.loads(capsys.readouterr().out)
    assert rc == 0
    assert doc["average"]["v_max"] == pytest.approx(0.6, rel=0.01)
    assert doc["average"]["a_r_max"] is None
    assert len(doc["logs"]) == 2


def test_calibrate_bad_log_exits_2(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("0,1,2\n")
    assert main(["calibrate", str(p)]) == 2
