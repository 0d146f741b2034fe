import io
from importlib import resources

import numpy as np
import pytest

from tetherflight.errors import TelemetryFormatError
from tetherflight.report import id_result_kv, metrics_kv, metrics_text, parse_kv
from tetherflight.scenario import nominal_scenario
from tetherflight.sim import TELEMETRY_COLUMNS, run_scenario
from tetherflight.sysid import identify, synthetic_dataset
from tetherflight.telemetry import (format_value, read_id_dataset, read_telemetry,
                                    telemetry_bytes, write_id_dataset, write_telemetry)


@pytest.fixture(scope="module")
def short_run():
    return run_scenario(nominal_scenario(), duration=10.0)


def test_empty_stream_writes_header_only():
    buf = io.StringIO()
    assert write_telemetry([], buf) == 0
    lines = buf.getvalue().splitlines()
    assert len(lines) == 2
    assert lines[0].startswith("# tetherflight-telemetry v")
    assert lines[1].split(",") == list(TELEMETRY_COLUMNS)


def test_row_count_and_round_trip(short_run, tmp_path):
    path = tmp_path / "t.csv"
    assert write_telemetry(short_run.rows, path) == 501
    data = read_telemetry(path)
    assert list(data) == list(TELEMETRY_COLUMNS)
    for name in ("t", "p_x", "airspeed", "tether_force"):
        assert np.allclose(data[name], short_run.column(name), rtol=1e-8, atol=1e-12)
    assert list(data["phase"]) == list(short_run.column("phase"))


def test_nine_significant_digits():
    assert format_value(1.0 / 3.0) == "0.333333333"
    assert format_value(123456.789012) == "123456.789"
    assert format_value(-0.0) == "0"
    assert format_value(True) == "1" and format_value("ClimbOut") == "ClimbOut"


def test_same_rows_same_bytes(short_run):
    again = run_scenario(nominal_scenario(), duration=10.0)
    assert telemetry_bytes(short_run.rows) == telemetry_bytes(again.rows)


def test_reader_rejects_other_versions(short_run):
    text = telemetry_bytes(short_run.rows[:3]).decode()
    with pytest.raises(TelemetryFormatError):
        read_telemetry(io.StringIO(text.replace(" v1", " v2", 1)))
    with pytest.raises(TelemetryFormatError):
        read_telemetry(io.StringIO("t,phase\n0,OnSlide\n"))
    header_swapped = text.replace("p_x,p_y", "p_y,p_x", 1)
    with pytest.raises(TelemetryFormatError):
        read_telemetry(io.StringIO(header_swapped))


def test_row_width_checked():
    with pytest.raises(ValueError):
        write_telemetry([(0.0, 1.0)], io.StringIO())


def test_id_dataset_round_trip(tmp_path):
    ds = synthetic_dataset(-2.3, 12.6, n=120)
    path = tmp_path / "id.csv"
    write_id_dataset(ds, path)
    back = read_id_dataset(path)
    assert back.Ts == ds.Ts and back.K_id == ds.K_id
    assert np.array_equal(back.angle, ds.angle) and np.array_equal(back.ref, ds.ref)


def test_shipped_roll_dataset_identifies():
    path = resources.files("tetherflight").joinpath("data/roll_id_synthetic.csv")
    ds = read_id_dataset(path)
    assert len(ds) == 500
    res = identify(ds)
    assert res.a_hat == pytest.approx(-2.3, rel=1e-3) and res.b_hat == pytest.approx(12.6, rel=1e-3)


def test_telemetry_as_id_source_needs_gain(short_run, tmp_path):
    path = tmp_path / "t.csv"
    write_telemetry(short_run.rows, path)
    with pytest.raises(TelemetryFormatError):
        read_id_dataset(path)
    ds = read_id_dataset(path, "pitch", K_id=0.5)
    assert len(ds) == 501 and ds.Ts == pytest.approx(0.02)


def test_metrics_reports(short_run):
    kv = parse_kv(metrics_kv(short_run.metrics, {"seed": 0}))
    assert kv["seed"] == "0" and kv["release_speed"] == "9"
    assert kv["converged_to_periodic"] == "false"
    text = metrics_text(short_run.metrics, "short")
    assert text.startswith("== short ==") and "release_travel" in text


def test_id_report_fields():
    res = identify(synthetic_dataset(n=200))
    kv = parse_kv(id_result_kv(res, "roll"))
    assert kv["channel"] == "roll" and kv["converged"] == "true"
    assert float(kv["a_hat"]) == pytest.approx(-2.3, rel=1e-3)
