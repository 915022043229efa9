import csv
import io
import json
import math
import subprocess
import sys

import pytest

from pp84 import cli
from pp84.protocol import RunConfig, run_session


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_simulate_projective_report(capsys):
    code, out, _ = run(capsys, "simulate", "--attack", "projective", "--runs", "100000",
                       "--control-prob", "0.5", "--seed", "7", "--format", "json")
    assert code == 0
    report = {r["quantity"]: r for r in json.loads(out)["report"]}
    assert report["detection"]["analytic"] == 0.375
    assert abs(report["detection"]["empirical"] - 0.375) < 0.01
    assert all(r["verdict"] == "pass" for r in report.values())
    assert set(report["detection"]) == {"quantity", "analytic", "empirical", "stderr", "z",
                                        "verdict"}


def test_simulate_honest(capsys):
    code, out, _ = run(capsys, "simulate", "--attack", "none", "--runs", "1000",
                       "--format", "json")
    report = {r["quantity"]: r for r in json.loads(out)["report"]}
    assert code == 0
    assert report["detection"]["empirical"] == 0
    assert report["bob_correct_rate_z"]["empirical"] == report["bob_correct_rate_x"]["empirical"] == 1


def test_simulate_incoherent_report(capsys):
    code, out, _ = run(capsys, "simulate", "--attack", "incoherent", "--x", "0.9", "--F", "0.8",
                       "--Fp", "0.9", "--runs", "20000", "--format", "json", "--seed", "2")
    report = {r["quantity"]: r for r in json.loads(out)["report"]}
    assert code == 0 and list(report) == ["detection"]
    assert report["detection"]["verdict"] == "pass"


@pytest.mark.parametrize("argv", [
    ["simulate", "--attack", "projective", "--runs", "3000", "--seed", "7"],
    ["simulate", "--attack", "incoherent", "--runs", "500", "--format", "json"],
    ["qdc-send", "--payload", "a5", "--sessions", "30", "--attack", "projective"],
    ["curves", "--points", "11"],
    ["bb84-baseline", "--qubits", "5000", "--attack", "projective"],
])
def test_byte_identical_reruns(capsys, argv):
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_transcript_csv_roundtrip(capsys):
    argv = ["simulate", "--attack", "incoherent", "--runs", "2000", "--seed", "3",
            "--transmission", "0.8"]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and "\r" not in out
    assert out.splitlines()[0] == ",".join(cli.TRANSCRIPT_HEADER)
    parsed = cli.read_transcript(out)
    cfg = RunConfig(attack=cli._attack(cli.build_parser().parse_args(argv)),
                    transmission_prob=0.8, seed=3)
    expected = [r.__class__(**{**r.__dict__, "eve": None})
                for r in run_session(cfg, runs=2000).records]
    assert parsed == expected


def test_qdc_transcript(capsys):
    code, out, _ = run(capsys, "simulate", "--mode", "qdc", "--payload", "0xA5", "--seed", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    bits = [int(r["bob_outcome"] not in ("0", "+")) ^ int(r["prep"] in ("1", "-"))
            for r in rows if r["mode"] == "encoding" and r["bob_outcome"]]
    assert bits == [1, 0, 1, 0, 0, 1, 0, 1]


def test_curves_csv(capsys, tmp_path):
    path = tmp_path / "c.csv"
    code, out, _ = run(capsys, "curves", "--points", "5", "--output", str(path))
    assert code == 0 and out == ""
    text = path.read_bytes().decode()
    assert "\r" not in text
    rows = list(csv.DictReader(io.StringIO(text)))
    assert list(rows[0]) == ["x", "d", "i_ab", "i_ae", "i_ae_bound"]
    assert rows[0] == {"x": "0", "d": "0", "i_ab": "1", "i_ae": "0", "i_ae_bound": "0"}
    assert (rows[-1]["d"], rows[-1]["i_ab"], rows[-1]["i_ae"]) == ("0.375", "0.5", "1")
    assert float(rows[2]["x"]) == pytest.approx(math.pi / 4, abs=1e-8)
    for r in rows:
        for v in r.values():
            assert len(v.replace(".", "").replace("-", "").lstrip("0")) <= 9


def test_thresholds(capsys):
    code, out, _ = run(capsys, "thresholds")
    rows = {r["curve"]: r for r in csv.DictReader(io.StringIO(out))}
    assert code == 0
    assert 0.225 <= float(rows["incoherent"]["d"]) <= 0.235
    assert 0.180 <= float(rows["bound"]["d"]) <= 0.190
    assert rows["bb84_reference"]["d"] == "0.15"


def test_efficiency(capsys):
    code, out, err = run(capsys, "efficiency", "--points", "20")
    rows = {r["P"]: r for r in csv.DictReader(io.StringIO(out))}
    assert code == 0 and "crossover P=0.25" in err
    assert rows["0.25"]["pp84_eff"] == rows["0.25"]["bb84_eff"] == "0.0625"
    assert (rows["1"]["pp84_eff"], rows["1"]["bb84_eff"]) == ("1", "0.25")
    assert (rows["0.1"]["pp84_eff"], rows["0.1"]["bb84_eff"]) == ("0.01", "0.025")


def test_qdc_send_honest(capsys):
    code, out, err = run(capsys, "qdc-send", "--payload", "0xA5")
    row = next(csv.DictReader(io.StringIO(out)))
    assert code == 0 and row["delivered"] == "1" and row["bob_bits"] == "10100101"
    assert "bob=a5" in err


def test_qdc_send_projective_json(capsys):
    code, out, _ = run(capsys, "qdc-send", "--payload", "a5", "--attack", "projective",
                       "--sessions", "4000", "--control-basis", "prepared", "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["sessions"] == 4000
    assert abs(data["success_rate"] - 0.078) < 4 * math.sqrt(0.078 * 0.922 / 4000)


def test_bb84_baseline(capsys):
    code, out, _ = run(capsys, "bb84-baseline", "--attack", "projective", "--qubits", "40000",
                       "--format", "json")
    data = json.loads(out)
    assert code == 0 and data["report"][0]["verdict"] == "pass"


@pytest.mark.parametrize("argv", [
    ["qdc-send", "--payload", ""],
    ["qdc-send", "--payload", "xyz"],
    ["simulate", "--payload", "a5"],
    ["simulate", "--mode", "qdc"],
    ["simulate", "--mode", "qdc", "--payload", "a5", "--runs", "10"],
    ["simulate", "--bogus"],
    ["simulate", "--runs", "ten"],
    ["nonsense"],
    [],
    ["bb84-baseline", "--attack", "incoherent"],
])
def test_usage_errors_exit_1(capsys, argv):
    assert run(capsys, *argv)[0] == 1


@pytest.mark.parametrize("argv", [
    ["simulate", "--control-prob", "1.5"],
    ["simulate", "--transmission", "0"],
    ["simulate", "--runs", "0"],
    ["simulate", "--attack", "incoherent", "--F", "1.2"],
    ["simulate", "--attack", "incoherent", "--x", "3"],
    ["simulate", "--seed", "-1"],
    ["curves", "--points", "1"],
    ["qdc-send", "--payload", "a5", "--control-prob", "1"],
    ["qdc-send", "--payload", "a5", "--sessions", "0"],
    ["bb84-baseline", "--transmission", "1.5"],
])
def test_invalid_values_exit_2(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pp84.cli", "efficiency", "--points", "4"],
                          capture_output=True)
    assert proc.returncode == 0
    assert proc.stdout == b"P,pp84_eff,bb84_eff\n0.25,0.0625,0.0625\n0.5,0.25,0.125\n" \
                          b"0.75,0.5625,0.1875\n1,1,0.25\n"
    bad = subprocess.run([sys.executable, "-m", "pp84.cli", "simulate", "--wat"],
                         capture_output=True)
    assert bad.returncode == 1


def test_payload_parsing():
    assert cli.parse_payload("0xA5") == [1, 0, 1, 0, 0, 1, 0, 1]
    assert cli.parse_payload("1") == [0, 0, 0, 1]
    assert cli.bits_to_hex([1, 0, 1, 0, 0, 1, 0, 1]) == "a5"
    with pytest.raises(cli.UsageError):
        cli.parse_payload("a_5")
