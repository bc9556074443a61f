"""Distance and bandwidth sweeps, anchors and CSV output."""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import replace
from typing import Iterable, List, NamedTuple, Sequence

from qkd_coexist.calibration import Anchor
from qkd_coexist.link_budget import (
    LaunchPlan,
    LaunchTotal,
    dbm_to_watts,
    equal_split,
    total_launch_power,
    watts_to_dbm,
)
from qkd_coexist.qkd_rate import LinkScenario, RatePoint, secure_rate

log = logging.getLogger(__name__)

PER_CHANNEL_DBM = -25.5  # one 100G channel's launch power


def sweep_distance(scenario: LinkScenario, distances: Iterable[float]) -> List[RatePoint]:
    return [secure_rate(scenario.with_distance(d)) for d in distances]


def bandwidth_scenario(
    scenario: LinkScenario,
    bandwidth_gbps: float,
    per_channel_dbm: float = PER_CHANNEL_DBM,
    cap_dbm: float = 0.0,
) -> tuple:
    """Emulate ``bandwidth_gbps`` of traffic by raising the data lasers' power.

    Every ``channel_rate_gbps`` of traffic stands for one channel at
    ``per_channel_dbm``; the total is shared evenly by the plan's data
    lasers. Returns ``(scenario, LaunchTotal)``.
    """
    n = len(scenario.plan.data_channels)
    if n == 0:
        raise ValueError("bandwidth sweeps need at least one data channel")
    if bandwidth_gbps <= 0:
        raise ValueError("bandwidth must be positive")
    equivalent = bandwidth_gbps / scenario.channel_rate_gbps
    total_dbm = watts_to_dbm(equivalent * dbm_to_watts(per_channel_dbm))
    powers = equal_split(total_dbm, n)
    launch = total_launch_power(LaunchPlan(tuple(powers), cap_dbm))
    swept = replace(
        scenario, plan=scenario.plan.with_data_launch(powers), bandwidth_gbps=bandwidth_gbps
    )
    return swept, launch


class BandwidthRow(NamedTuple):
    point: RatePoint
    launch: LaunchTotal


def sweep_bandwidth(
    scenario: LinkScenario,
    bandwidths: Iterable[float],
    per_channel_dbm: float = PER_CHANNEL_DBM,
    cap_dbm: float = 0.0,
) -> List[BandwidthRow]:
    """One row per bandwidth; rows above the power cap are kept and flagged."""
    rows = []
    for b in bandwidths:
        s, launch = bandwidth_scenario(scenario, b, per_channel_dbm, cap_dbm)
        if not launch.within_cap:
            log.warning(
                "%.0f Gb/s needs %.2f dBm total launch power, above the %.1f dBm cap",
                b, launch.total_dbm, cap_dbm,
            )
        rows.append(BandwidthRow(secure_rate(s), launch))
    return rows


def sweep_launch(scenario: LinkScenario, launch_dbm: Iterable[float]) -> List[RatePoint]:
    """Vary every data channel's launch power together."""
    n = len(scenario.plan.data_channels)
    return [
        secure_rate(replace(scenario, plan=scenario.plan.with_data_launch([p] * n)))
        for p in launch_dbm
    ]


def format_csv(points: Sequence[RatePoint]) -> str:
    """Result table with the fixed header; floats in shortest round-trip form."""
    if not points:
        raise ValueError("nothing to emit")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RatePoint.CSV_HEADER)
    for p in points:
        w.writerow(tuple(repr(float(v)) for v in p.csv_row()))
    return buf.getvalue()


def emit(points: Sequence[RatePoint], path) -> None:
    text = format_csv(points)
    with open(path, "w", newline="") as fh:
        fh.write(text)


ANCHOR_COLUMNS = ("distance_km", "filter", "bandwidth_gbps", "observed_secure_bps")


def read_anchors(
    path,
    base: LinkScenario,
    per_channel_dbm: float = PER_CHANNEL_DBM,
) -> List[Anchor]:
    """Anchors CSV -> :class:`Anchor` list built on ``base``."""
    anchors = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(ANCHOR_COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"anchors file lacks columns {sorted(missing)}")
        for row in reader:
            s = base.with_filter(row["filter"].strip()).with_distance(float(row["distance_km"]))
            s, _ = bandwidth_scenario(s, float(row["bandwidth_gbps"]), per_channel_dbm)
            label = f"{row['distance_km']} km {row['filter']} {row['bandwidth_gbps']}G"
            anchors.append(Anchor(s, float(row["observed_secure_bps"]), "secure", label))
    if not anchors:
        raise ValueError(f"no anchors in {path}")
    return anchors
