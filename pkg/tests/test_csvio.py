"""Artifact round trips, atomic writes, and overwrite protection."""

import json

import numpy as np
import pytest

from transport1d import build_grid, builtin_scenarios, sample_scenario
from transport1d.csvio import (
    read_column_csv,
    read_field_csv,
    write_curve_csv,
    write_field_csv,
    write_solution_csv,
    write_summary_json,
    write_time_trace_csv,
    write_trace_csv,
)


@pytest.fixture()
def pair():
    sc = builtin_scenarios()["vacuum-patch"]
    g = build_grid(sc.t_max, sc.x_min, sc.x_max, 17, 33)
    f = sample_scenario(sc, g)
    return g, f


def test_field_round_trip_is_lossless(tmp_path, pair):
    g, f = pair
    path = tmp_path / "field.csv"
    write_field_csv(path, g, f.rho, f.b)
    g2, rho2, b2 = read_field_csv(path)
    assert g2 == g
    np.testing.assert_array_equal(rho2, f.rho)
    np.testing.assert_array_equal(b2, f.b)


def test_reader_accepts_extra_columns_and_any_row_order(tmp_path, pair):
    g, f = pair
    path = tmp_path / "aug.csv"
    write_solution_csv(path, g, f.rho, f.b, np.ones_like(f.rho), f.rho)
    lines = path.read_text().splitlines()
    header, rows = lines[0], lines[1:]
    rows.reverse()
    (tmp_path / "shuffled.csv").write_text("\n".join([header] + rows) + "\n")
    g2, rho2, b2 = read_field_csv(tmp_path / "shuffled.csv")
    assert g2 == g
    np.testing.assert_array_equal(rho2, f.rho)
    np.testing.assert_array_equal(b2, f.b)


def test_reader_reports_malformed_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,x,rho,b\n0.0,0.0,1.0,notanumber\n")
    with pytest.raises(ValueError, match=r"bad\.csv:2"):
        read_field_csv(path)


def test_reader_rejects_missing_columns(tmp_path):
    path = tmp_path / "short.csv"
    path.write_text("t,x,rho\n0.0,0.0,1.0\n")
    with pytest.raises(ValueError, match="rho"):
        read_field_csv(path)


def test_reader_rejects_ragged_grid(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text(
        "t,x,rho,b\n"
        "0.0,0.0,1.0,1.0\n0.0,1.0,1.0,1.0\n0.0,3.0,1.0,1.0\n"
        "1.0,0.0,1.0,1.0\n1.0,1.0,1.0,1.0\n1.0,3.0,1.0,1.0\n"
    )
    with pytest.raises(ValueError, match="uniform"):
        read_field_csv(path)


def test_no_overwrite_without_force(tmp_path, pair):
    g, f = pair
    path = tmp_path / "field.csv"
    write_field_csv(path, g, f.rho, f.b)
    with pytest.raises(FileExistsError, match="force"):
        write_field_csv(path, g, f.rho, f.b)
    write_field_csv(path, g, 2.0 * f.rho, f.b, force=True)
    _, rho2, _ = read_field_csv(path)
    np.testing.assert_array_equal(rho2, 2.0 * f.rho)
    # the atomic temp file never lingers
    assert sorted(p.name for p in tmp_path.iterdir()) == ["field.csv"]


def test_write_is_deterministic(tmp_path, pair):
    g, f = pair
    write_field_csv(tmp_path / "a.csv", g, f.rho, f.b)
    write_field_csv(tmp_path / "b.csv", g, f.rho, f.b)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_curve_and_trace_round_trips(tmp_path):
    t = np.linspace(0.0, 1.0, 9)
    pos = np.sqrt(1.0 + t)
    write_curve_csv(tmp_path / "curve.csv", t, pos)
    cols = read_column_csv(tmp_path / "curve.csv")
    np.testing.assert_array_equal(cols["t"], t)
    np.testing.assert_array_equal(cols["x"], pos)

    tr = np.sin(t[:-1])
    write_trace_csv(tmp_path / "tr.csv", t[:-1], tr, 2 * tr, -tr, 0 * tr)
    cols = read_column_csv(tmp_path / "tr.csv")
    np.testing.assert_array_equal(cols["tr_brhotheta_left"], 2 * tr)
    np.testing.assert_array_equal(cols["tr_brho_right"], -tr)

    write_time_trace_csv(tmp_path / "tt.csv", t, np.cos(t), 0.75)
    cols = read_column_csv(tmp_path / "tt.csv")
    np.testing.assert_array_equal(cols["theta"], np.cos(t))
    assert (tmp_path / "tt.csv").read_text().splitlines()[0] == "# x = 0.75"


def test_summary_json_is_sorted_and_parseable(tmp_path):
    path = tmp_path / "s.json"
    write_summary_json(path, {"zeta": 1.0, "alpha": 2.0})
    loaded = json.loads(path.read_text())
    assert loaded == {"zeta": 1.0, "alpha": 2.0}
    assert path.read_text().index("alpha") < path.read_text().index("zeta")


def test_seventeen_digit_round_trip(tmp_path):
    g = build_grid(1.0 / 3.0, 0.0, np.pi, 3, 4)
    rho = np.full((3, 4), 1.0 / 7.0)
    b = np.full((3, 4), np.e)
    write_field_csv(tmp_path / "f.csv", g, rho, b)
    g2, rho2, b2 = read_field_csv(tmp_path / "f.csv")
    np.testing.assert_array_equal(rho2, rho)
    np.testing.assert_array_equal(b2, b)
    assert g2.dt == pytest.approx(g.dt, abs=0.0)
