import json
import subprocess
import sys
from fractions import Fraction

import pytest

from focs import InstanceError, Schedule, ScheduleError, check_feasibility, run_focs
from focs import io as fio
from focs.cli import main

from factories import fig1, fig4


def write_json(path, jobs):
    path.write_text(json.dumps({"jobs": jobs}))
    return path


@pytest.fixture
def fig1_file(tmp_path):
    return write_json(tmp_path / "fig1.json", fio.instance_to_dict(fig1())["jobs"])


@pytest.fixture
def fig4_file(tmp_path):
    return write_json(tmp_path / "fig4.json", fio.instance_to_dict(fig4())["jobs"])


def test_instance_round_trip(tmp_path):
    inst = fig4()
    fio.write_instance(inst, tmp_path / "i.json")
    assert fio.read_instance(tmp_path / "i.json") == inst


def test_instance_rejects_float_numbers():
    with pytest.raises(InstanceError):
        fio.instance_from_dict({"jobs": [{"id": "a", "arrival": 0.0, "departure": "1", "energy": "1", "p_max": "1"}]})
    with pytest.raises(InstanceError):
        fio.instance_from_dict({"jobs": [{"id": "a", "arrival": "0", "departure": "1", "energy": "1"}]})


def test_schedule_csv_round_trip(tmp_path):
    res = run_focs(fig4())
    fio.write_schedule(res.schedule, tmp_path / "s.csv")
    text = (tmp_path / "s.csv").read_text()
    assert text.splitlines()[0] == "interval_start,interval_end,job_id,energy"
    assert fio.read_schedule(tmp_path / "s.csv", fig4()).e == res.schedule.e


def test_schedule_csv_errors(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("interval_start,interval_end,job_id,energy\n0,2,1,1\n")
    with pytest.raises(ScheduleError, match="not an atomic interval"):
        fio.read_schedule(bad, fig4())
    bad.write_text("interval_start,interval_end,job_id,energy\n0,1,9,1\n")
    with pytest.raises(ScheduleError, match="unknown job"):
        fio.read_schedule(bad, fig4())


def test_profile_csv_rational_literals():
    inst = fio.instance_from_dict({"jobs": [
        {"id": "a", "arrival": "0", "departure": "3", "energy": "1", "p_max": "1"},
        {"id": "b", "arrival": "1", "departure": "2", "energy": "0", "p_max": "1"},
    ]})
    text = fio.dumps_profile(run_focs(inst).profile)
    assert "0,1,1/3" in text.splitlines()


def test_cli_solve_fig1(fig1_file, tmp_path, capsys):
    out = tmp_path / "out"
    assert main(["solve", "--instance", str(fig1_file), "--out", str(out)]) == 0
    rows = (out / "profile.csv").read_text().splitlines()
    assert rows == ["interval_start,interval_end,power", "0,1,1", "1,2,3"]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["objective"] == "10" and summary["rounds"] == 2


def test_cli_solve_fig4(fig4_file, tmp_path):
    out = tmp_path / "out"
    assert main(["solve", "--instance", str(fig4_file), "--out", str(out), "--trace"]) == 0
    assert fio.read_profile(out / "profile.csv") == ((0, 1, 1), (1, 2, 2), (2, 3, 1))
    assert (out / "trace.jsonl").exists()


def test_cli_infeasible(tmp_path, capsys):
    path = write_json(tmp_path / "bad.json", [
        {"id": "fine", "arrival": "0", "departure": "2", "energy": "1", "p_max": "1"},
        {"id": "greedy", "arrival": "0", "departure": "1", "energy": "5", "p_max": "1"},
    ])
    assert main(["solve", "--instance", str(path)]) == 2
    assert "greedy" in capsys.readouterr().err


def test_cli_input_errors(tmp_path, capsys):
    assert main(["solve", "--instance", str(tmp_path / "missing.json")]) == 1
    (tmp_path / "junk.json").write_text("{not json")
    assert main(["solve", "--instance", str(tmp_path / "junk.json")]) == 1
    assert main(["solve"]) == 1


def test_cli_verify(fig4_file, tmp_path, capsys):
    good = tmp_path / "good.csv"
    fio.write_schedule(Schedule.from_rows(fig4(), {"1": [1, 0, 1], "2": [0, 2, 0]}), good)
    assert main(["verify", "--instance", str(fig4_file), "--schedule", str(good), "--out", str(tmp_path / "r")]) == 0
    report = json.loads((tmp_path / "r" / "kkt_report.json").read_text())
    assert report["passed"] and report["certificate"]["delta"] == {"1": "2", "2": "4"}

    swapped = tmp_path / "swapped.csv"
    fio.write_schedule(Schedule.from_rows(fig4(), {"1": [2, 0, 0], "2": [0, 2, 0]}), swapped)
    assert main(["verify", "--instance", str(fig4_file), "--schedule", str(swapped)]) == 3
    captured = capsys.readouterr()
    payload = json.loads(captured.out)
    assert payload["kkt"]["violations"][0]["condition"] == "KKT2"
    assert "KKT2" in captured.err

    over = tmp_path / "over.csv"
    over.write_text("interval_start,interval_end,job_id,energy\n0,1,1,3\n1,2,1,0\n2,3,1,0\n1,2,2,2\n")
    assert main(["verify", "--instance", str(fig4_file), "--schedule", str(over)]) == 1
    assert "power limit" in capsys.readouterr().err

    short = tmp_path / "short.csv"
    short.write_text("interval_start,interval_end,job_id,energy\n0,1,1,1\n")
    assert main(["verify", "--instance", str(fig4_file), "--schedule", str(short)]) == 1


def test_cli_gen_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["gen", "--jobs", "5", "--seed", "7", "--out", str(out)]) == 0
    assert (a / "instance.json").read_bytes() == (b / "instance.json").read_bytes()
    assert check_feasibility(fio.read_instance(a / "instance.json"))

    assert main(["gen", "--jobs", "1", "--horizon", "1", "--seed", "3", "--out", str(tmp_path / "one.json")]) == 0
    one = fio.read_instance(tmp_path / "one.json")
    assert len(one) == 1 and one.jobs[0].energy <= one.jobs[0].p_max


def test_cli_trace(fig4_file, fig1_file, tmp_path, capsys):
    assert main(["trace", "--instance", str(fig4_file)]) == 0
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    kinds = [(r["kind"], r["round"], r["iteration"]) for r in records]
    assert kinds == [("iteration", 1, 1), ("iteration", 1, 2), ("round", 1, 2), ("iteration", 2, 1), ("round", 2, 1)]
    for r in records:
        assert {"round", "iteration", "g", "flow_value", "parked", "critical"} <= r.keys()

    assert main(["trace", "--instance", str(fig1_file)]) == 0
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    g_i2 = [r["g"]["1"] for r in records if r["kind"] == "iteration" and r["round"] == 1]
    assert g_i2 == ["2", "3"]

    single = write_json(tmp_path / "single.json", [{"id": "a", "arrival": "0", "departure": "2", "energy": "1", "p_max": "1"}])
    assert main(["trace", "--instance", str(single)]) == 0
    records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
    assert sum(r["kind"] == "iteration" for r in records) == 1


def test_cli_oracle(fig4_file, tmp_path, capsys):
    assert main(["oracle", "--instance", str(fig4_file), "--delta", "1/4", "--out", str(tmp_path / "o")]) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[-1])["objective"] == "6"
    assert fio.read_profile(tmp_path / "o" / "oracle_profile.csv") == ((0, 1, 1), (1, 2, 2), (2, 3, 1))


def test_round_trip_solve_then_verify(tmp_path):
    for seed in range(15):
        inst_dir = tmp_path / f"g{seed}"
        assert main(["gen", "--jobs", "6", "--horizon", "12", "--seed", str(seed), "--out", str(inst_dir)]) == 0
        assert main(["solve", "--instance", str(inst_dir / "instance.json"), "--out", str(inst_dir)]) == 0
        assert main(["verify", "--instance", str(inst_dir / "instance.json"),
                     "--schedule", str(inst_dir / "schedule.csv"), "--out", str(inst_dir)]) == 0


def test_module_entry_point(fig4_file):
    proc = subprocess.run([sys.executable, "-m", "focs", "solve", "--instance", str(fig4_file)],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "1,2,2" in proc.stdout
