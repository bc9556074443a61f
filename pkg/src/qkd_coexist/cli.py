"""Command-line entry point: ``qkd-coexist <subcommand> [options]``.

Tables go to ``--out`` (or stdout); human-readable summaries go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from pathlib import Path

from qkd_coexist import config as cfgmod
from qkd_coexist.calibration import CalibrationError, calibrate_raman
from qkd_coexist.channel_plan import PLAN_CSV_HEADER
from qkd_coexist.keyflow import EncryptorFleet, fec_margin, min_refresh_interval, simulate_buffer
from qkd_coexist.montecarlo import COMPARISON_HEADER, TrialConfig, compare, run_trial
from qkd_coexist.qkd_rate import secure_rate
from qkd_coexist.sweeps import (
    bandwidth_scenario,
    format_csv,
    read_anchors,
    sweep_bandwidth,
    sweep_distance,
    sweep_launch,
)

def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _load(args):
    if args.config:
        return cfgmod.load(args.config), Path(args.config).resolve().parent
    return cfgmod.default_config(), None


def _scenario(args, require_raman=True):
    cfg, base = _load(args)
    return cfg, cfgmod.to_scenario(cfg, args.filter, require_raman=require_raman, base_dir=base)


def _range(args, cfg, axis):
    if args.start is not None:
        if args.stop is None or args.step is None:
            raise SystemExit("--start needs --stop and --step")
        return cfgmod.grid(args.start, args.stop, args.step)
    sweep_axis, values = cfgmod.sweep_points(cfg)
    if sweep_axis != axis:
        raise SystemExit(f"config sweeps {sweep_axis}, not {axis}")
    return values


def cmd_plan(args) -> int:
    _, scenario = _scenario(args, require_raman=False)
    print(scenario.plan.summary(), file=sys.stderr)
    _write(args, _csv_text(PLAN_CSV_HEADER, scenario.plan.csv_rows()))
    return 0


def cmd_simulate(args) -> int:
    cfg, scenario = _scenario(args)
    if args.distance is not None:
        scenario = scenario.with_distance(args.distance)
    if args.bandwidth is not None:
        per = cfg.get("sweep", "per_channel_dbm")
        cap = cfg.get("classical", "power_cap_dbm")
        scenario, _ = bandwidth_scenario(scenario, args.bandwidth, per, cap)
    _write(args, format_csv([secure_rate(scenario)]))
    return 0


def cmd_sweep_distance(args) -> int:
    cfg, scenario = _scenario(args)
    _write(args, format_csv(sweep_distance(scenario, _range(args, cfg, "distance_km"))))
    return 0


def cmd_sweep_bandwidth(args) -> int:
    cfg, scenario = _scenario(args)
    distance = args.distance if args.distance is not None else cfg.get("sweep", "distance_km")
    scenario = scenario.with_distance(distance)
    rows = sweep_bandwidth(
        scenario,
        _range(args, cfg, "bandwidth_gbps"),
        cfg.get("sweep", "per_channel_dbm"),
        cfg.get("classical", "power_cap_dbm"),
    )
    _write(args, format_csv([r.point for r in rows]))
    return 0


def cmd_sweep_launch(args) -> int:
    cfg, scenario = _scenario(args)
    _write(args, format_csv(sweep_launch(scenario, _range(args, cfg, "launch_dbm"))))
    return 0


def cmd_calibrate(args) -> int:
    cfg, base_dir = _load(args)
    base = cfgmod.to_scenario(cfg, args.filter, require_raman=False, base_dir=base_dir)
    anchors = read_anchors(args.anchors, base, cfg.get("sweep", "per_channel_dbm"))
    fit = [p.strip() for p in args.fit.split(",") if p.strip()]
    status = 0
    try:
        result = calibrate_raman(anchors, fit, threshold=args.threshold)
    except CalibrationError as exc:
        result = exc.result
        status = 2
        print(f"calibration failed: residual above {args.threshold:g}", file=sys.stderr)
    print(result.residual_table(anchors), file=sys.stderr)
    profile = result.profile(base.plan.quantum.wavelength, base.raman)
    if profile is None:
        raise SystemExit("fit did not include a Raman parameter; nothing to write")
    pumps = [c.wavelength for c in base.plan.data_channels]
    e_det = result.e_det if result.e_det is not None else base.e_det
    _write(args, cfgmod.format_profile(profile, pumps, e_det))
    return status


def cmd_montecarlo(args) -> int:
    _, scenario = _scenario(args)
    if args.distance is not None:
        scenario = scenario.with_distance(args.distance)
    result = run_trial(TrialConfig(args.gates, args.seed, scenario), workers=args.workers)
    rows = [
        (r.quantity, repr(r.analytic), repr(r.empirical), repr(r.sigma), repr(r.z))
        for r in compare(result, scenario)
    ]
    _write(args, _csv_text(COMPARISON_HEADER, rows))
    return 0


def _rate_from_csv(path, row: int) -> float:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise SystemExit(f"{path} has no rows")
    return float(rows[row]["secure_bps"])


def cmd_keyflow(args) -> int:
    if args.rate is None and args.rates_csv is None:
        raise SystemExit("keyflow needs --rate or --rates-csv")
    rate = args.rate if args.rate is not None else _rate_from_csv(args.rates_csv, args.row)
    fleet = EncryptorFleet(args.cards)
    interval = min_refresh_interval(rate, args.cards)
    policy = args.policy if args.policy is not None else interval
    if policy == float("inf"):
        raise SystemExit("secure rate is zero: no key refresh is possible")
    trace = simulate_buffer(rate, fleet, args.duration, policy, capacity=args.capacity)
    _write(args, _csv_text(("t", "event", "level"), trace.csv_rows()))
    print(f"min_interval_s={interval!r}", file=sys.stderr)
    print(f"policy_interval_s={policy!r}", file=sys.stderr)
    print(f"refreshes={trace.refreshes} stalls={trace.stalls} "
          f"steady_state_stalls={trace.steady_state_stalls}", file=sys.stderr)
    print(f"discarded_bits={trace.discarded}", file=sys.stderr)
    if args.pre_fec_ber is not None:
        verdict = fec_margin(args.pre_fec_ber)
        print(f"fec_pass={verdict.passed} fec_margin={verdict.margin:.3f}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="scenario file")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output CSV path")
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    common.add_argument("--filter", choices=("100ghz", "25ghz"), default=argparse.SUPPRESS)

    p = argparse.ArgumentParser(prog="qkd-coexist", parents=[common], description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, func, **kw):
        sp = sub.add_parser(name, parents=[common], **kw)
        sp.set_defaults(func=func)
        return sp

    add("plan", cmd_plan, help="channel plan summary and CSV dump")

    sp = add("simulate", cmd_simulate, help="evaluate a single operating point")
    sp.add_argument("--distance", type=float)
    sp.add_argument("--bandwidth", type=float, help="emulated data bandwidth, Gb/s")

    for name, func, helptext in (
        ("sweep-distance", cmd_sweep_distance, "secure rate versus fibre length"),
        ("sweep-bandwidth", cmd_sweep_bandwidth, "secure rate versus emulated data bandwidth"),
        ("sweep-launch", cmd_sweep_launch, "secure rate versus per-channel launch power"),
    ):
        sp = add(name, func, help=helptext)
        sp.add_argument("--start", type=float)
        sp.add_argument("--stop", type=float)
        sp.add_argument("--step", type=float)
        if name == "sweep-bandwidth":
            sp.add_argument("--distance", type=float)

    sp = add("calibrate", cmd_calibrate, help="fit Raman coefficients to observed rates")
    sp.add_argument("--anchors", required=True)
    sp.add_argument("--fit", default="rho,e_det")
    sp.add_argument("--threshold", type=float, default=0.05)

    sp = add("montecarlo", cmd_montecarlo, help="per-gate oracle versus analytic model")
    sp.add_argument("--gates", type=int, default=10**7)
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--distance", type=float)

    sp = add("keyflow", cmd_keyflow, help="AES key refresh schedule and buffer trace")
    sp.add_argument("--rate", type=float, help="secure key rate, bit/s")
    sp.add_argument("--rates-csv", help="results CSV; uses its secure_bps column")
    sp.add_argument("--row", type=int, default=0)
    sp.add_argument("--cards", type=int, default=2)
    sp.add_argument("--policy", type=float, help="refresh interval, s")
    sp.add_argument("--duration", type=float, default=1.0)
    sp.add_argument("--capacity", type=int, default=1_000_000)
    sp.add_argument("--pre-fec-ber", type=float)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    for name, default in (("config", None), ("out", None), ("seed", 0), ("filter", None)):
        if not hasattr(args, name):
            setattr(args, name, default)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
    )
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
