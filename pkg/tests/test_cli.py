import json

import pytest

from spdcqpm import cli
from spdcqpm.dispersion import Axis, refractive_index
from spdcqpm.pairstats import MHZ, REFERENCE_BUDGET, loss_corrected_rate
from spdcqpm.phasematch import ProcessSpec, tuning_curve

INFER = ["infer-qpm", "--t", "66", "--pump-nm", "405", "--signal-nm", "762.71",
         "--idler-nm", "863.45", "--period-um", "9.96", "--max-order", "9", "--json"]


def run(capsys, argv):
    code = cli.main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_no_arguments_is_usage_error(capsys):
    code, _, err = run(capsys, [])
    assert code == 2 and "usage" in err


def test_unknown_subcommand_and_flag(capsys):
    assert run(capsys, ["frobnicate"])[0] == 2
    assert run(capsys, ["index", "--bogus"])[0] == 2


def test_index_matches_library(capsys, disp):
    code, out, _ = run(capsys, ["index", "--axis", "z", "--lambda-nm", "810", "--t", "25"])
    assert code == 0
    assert float(out) == refractive_index(disp, Axis.Z, 0.81, 25.0)
    assert round(float(out), 4) == 1.8446


def test_domain_error_exit_code(capsys):
    code, _, err = run(capsys, ["index", "--axis", "z", "--lambda-nm", "300"])
    assert code == 1 and "outside validity window" in err


def test_infer_qpm_json(capsys):
    code, out, _ = run(capsys, INFER)
    doc = json.loads(out)
    assert code == 0 and (doc["m_x"], doc["m_y"]) == (3, 1)
    assert doc["k_wg"] == pytest.approx(-0.056, abs=0.01)
    assert set(doc["constants"]) == {"L0", "R0", "L2", "R2", "G"}


def test_json_is_byte_stable(capsys):
    _, out, _ = run(capsys, INFER)
    assert cli.dumps_json(json.loads(out)) == out


def test_tuning_curve_csv_to_file(capsys, tmp_path, disp, grating):
    out = tmp_path / "sub" / "curve.csv"
    code, stdout, _ = run(capsys, ["tuning-curve", "--process", "type2", "--order", "1", "--kwg", "-0.056",
                                   "--pump-nm", "405", "--t-min", "54", "--t-max", "70", "--step", "0.25",
                                   "--out", str(out)])
    assert code == 0 and stdout == ""
    lines = out.read_text().splitlines()
    assert lines[0] == "temperature_c,signal_nm,idler_nm,residual"
    curve = tuning_curve(disp, grating, ProcessSpec("type2", 1, -0.056), 405, (54, 70), 0.25)
    assert len(lines) == 1 + len(curve)
    first = [float(v) for v in lines[1].split(",")]
    p = curve.points[0]
    assert first == [p.temperature, p.signal_wavelength, p.idler_wavelength, p.residual]
    assert not list(tmp_path.glob("sub/.*tmp"))


def test_degeneracy_and_intersect(capsys):
    code, out, _ = run(capsys, ["degeneracy", "--process", "type2", "--order", "1", "--kwg", "-0.056",
                                "--t-min", "20", "--t-max", "75", "--format", "json"])
    assert code == 0 and json.loads(out)["found"] is False
    code, out, _ = run(capsys, ["intersect", "--process-a", "type2", "--order-a", "1",
                                "--process-b", "type2", "--order-b", "3", "--kwg", "-0.056",
                                "--t-min", "20", "--t-max", "75", "--json"])
    assert code == 0 and json.loads(out)["found"] is False


def test_pairstats_points(capsys, tmp_path):
    pts = tmp_path / "data.csv"
    rows = ["power_mw,coincidences_hz,accidentals_hz"]
    for p in (0.1, 0.2, 0.3):
        rows.append(f"{p},{5.417e6 * p + 10 * p * p},{10 * p * p}")
    pts.write_text("\n".join(rows) + "\n")
    budget = tmp_path / "budget.json"
    budget.write_text(json.dumps({"pump_coupling": 0.35, "fiber_coupling": 0.30,
                                  "detector_efficiency": 0.65, "filter_transmission": 0.98, "n_filters": 2}))
    code, out, _ = run(capsys, ["pairstats", "--points", str(pts), "--budget", str(budget),
                                "--window-ns", "2", "--json"])
    doc = json.loads(out)
    assert code == 0
    assert doc["slope"] == pytest.approx(5.417e6, rel=1e-9)
    assert doc["intrinsic_rate"] == pytest.approx(loss_corrected_rate(2 * doc["slope"], REFERENCE_BUDGET))
    assert len(doc["car_series"]) == 3 and {"slope", "stderr", "r_squared", "effective_rate"} <= set(doc)


def test_pairstats_rate_with_defaults(capsys):
    code, out, _ = run(capsys, ["pairstats", "--rate-mhz", "1.195", "--paper-defaults",
                                "--bandwidth-nm", "20", "--center-nm", "810"])
    doc = json.loads(out)
    assert doc["effective_rate"] == pytest.approx(2.390 * MHZ)
    assert doc["intrinsic_rate"] / MHZ == pytest.approx(56.1, abs=0.3)
    assert "spectral_density" in doc


def test_pairstats_missing_columns(capsys, tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("power,x\n1,2\n")
    assert run(capsys, ["pairstats", "--points", str(bad)])[0] == 1


def test_simulate_histogram_csv(capsys, tmp_path):
    out = tmp_path / "hist.csv"
    argv = ["simulate", "--pair-rate", "1e5", "--eff-a", "0.65", "--eff-b", "0.65", "--dark-a", "500",
            "--dark-b", "500", "--jitter-ps", "350", "--duration", "0.2", "--seed", "42", "--out", str(out)]
    assert run(capsys, argv)[0] == 0
    first = out.read_text()
    lines = first.splitlines()
    assert lines[0] == "bin_center_ns,counts" and len(lines) == 501
    assert run(capsys, argv)[0] == 0
    assert out.read_text() == first


def test_simulate_sweep(capsys, tmp_path):
    powers = tmp_path / "powers.csv"
    powers.write_text("power_mw\n0.2\n0.5\n1.0\n")
    code, out, _ = run(capsys, ["simulate", "--sweep", str(powers), "--rate-per-mw", "1e5",
                                "--duration", "1", "--seed", "1", "--json"])
    rows = json.loads(out)
    assert code == 0 and [r["power_mw"] for r in rows] == [0.2, 0.5, 1.0]
    assert rows[0]["car"] > rows[1]["car"] > rows[2]["car"]
