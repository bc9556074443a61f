import logging

import pytest
from hypothesis import given, settings, strategies as st

from qkd_coexist.channel_plan import ten_laser_plan
from qkd_coexist.config import grid
from qkd_coexist.link_budget import dbm_to_watts
from qkd_coexist.noise_model import RamanProfile
from qkd_coexist.qkd_rate import LinkScenario, RatePoint
from qkd_coexist.sweeps import (
    bandwidth_scenario,
    emit,
    format_csv,
    read_anchors,
    sweep_bandwidth,
    sweep_distance,
    sweep_launch,
)

HEADER = "distance_km,loss_db,bandwidth_gbps,raman_w,y0,sifted_bps,qber,secure_bps"


def test_emit_header_and_rows(scenario, tmp_path):
    one = tmp_path / "one.csv"
    emit(sweep_distance(scenario, [50.0]), one)
    lines = one.read_text().splitlines()
    assert lines[0] == HEADER and len(lines) == 2

    full = tmp_path / "full.csv"
    emit(sweep_distance(scenario, grid(0, 110, 5)), full)
    assert len(full.read_text().splitlines()) == 24


def test_emit_full_precision(scenario):
    point = sweep_distance(scenario, [35.5])[0]
    row = format_csv([point]).splitlines()[1].split(",")
    assert [float(v) for v in row] == [float(v) for v in point.csv_row()]


def test_emit_is_byte_identical(scenario, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    emit(sweep_distance(scenario, grid(0, 110, 5)), a)
    emit(sweep_distance(scenario, grid(0, 110, 5)), b)
    assert a.read_bytes() == b.read_bytes()


def test_emit_rejects_empty_and_bad_path(scenario, tmp_path):
    with pytest.raises(ValueError):
        format_csv([])
    with pytest.raises(OSError):
        emit(sweep_distance(scenario, [1.0]), tmp_path / "missing" / "x.csv")


PLAN = ten_laser_plan()
BASE = LinkScenario(plan=PLAN, raman=RamanProfile(PLAN.quantum.wavelength, 3e-9))


@settings(max_examples=20)
@given(st.randoms(use_true_random=False))
def test_sweep_order_independent(rnd):
    scenario = BASE
    distances = grid(0, 110, 5)
    shuffled = distances[:]
    rnd.shuffle(shuffled)
    key = lambda p: p.distance  # noqa: E731
    assert sorted(sweep_distance(scenario, shuffled), key=key) == sweep_distance(scenario, distances)


def test_bandwidth_power_rule(scenario):
    s, launch = bandwidth_scenario(scenario, 10_000.0)
    # 100 channel-equivalents at -25.5 dBm
    assert launch.total_dbm == pytest.approx(-5.5)
    assert launch.within_cap
    total_w = sum(dbm_to_watts(c.launch_power) for c in s.plan.data_channels)
    assert total_w == pytest.approx(100 * dbm_to_watts(-25.5))
    assert s.bandwidth == 10_000.0


def test_bandwidth_spread_over_ten_lasers():
    plan = ten_laser_plan()
    base = LinkScenario(plan=plan, raman=RamanProfile(plan.quantum.wavelength, 3e-9))
    s, _ = bandwidth_scenario(base, 1000.0)
    assert all(c.launch_power == pytest.approx(-25.5) for c in s.plan.data_channels)


def test_bandwidth_cap_flagged_but_kept(scenario, caplog):
    with caplog.at_level(logging.WARNING):
        rows = sweep_bandwidth(scenario, [1000.0, 400_000.0])
    assert [r.launch.within_cap for r in rows] == [True, False]
    assert len(rows) == 2 and "cap" in caplog.text


def test_bandwidth_rates_fall(scenario):
    rates = [r.point.secure_rate for r in sweep_bandwidth(scenario, grid(100, 10_000, 100))]
    assert all(b <= a for a, b in zip(rates, rates[1:]))


def test_launch_sweep(scenario):
    pts = sweep_launch(scenario, [-30.0, -20.0, -10.0])
    assert pts[0].raman_power * 10 == pytest.approx(pts[1].raman_power)
    assert all(isinstance(p, RatePoint) for p in pts)


def test_read_anchors(scenario, tmp_path):
    path = tmp_path / "a.csv"
    path.write_text(
        "distance_km,filter,bandwidth_gbps,observed_secure_bps\n"
        "35.5,100ghz,200,1.9e6\n101,25ghz,200,1e4\n"
    )
    anchors = read_anchors(path, scenario)
    assert [a.scenario.span.length for a in anchors] == [35.5, 101.0]
    assert anchors[1].scenario.plan.rx_filter.kind == "spectral_filter_25GHz"
    assert anchors[0].observed == 1.9e6


def test_read_anchors_errors(scenario, tmp_path):
    empty = tmp_path / "e.csv"
    empty.write_text("distance_km,filter,bandwidth_gbps,observed_secure_bps\n")
    with pytest.raises(ValueError, match="no anchors"):
        read_anchors(empty, scenario)
    bad = tmp_path / "b.csv"
    bad.write_text("distance_km,observed\n1,2\n")
    with pytest.raises(ValueError, match="lacks"):
        read_anchors(bad, scenario)
