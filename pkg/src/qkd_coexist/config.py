"""Scenario files: sectioned key-value text with unit suffixes.

Example::

    [fiber]
    length_km = 50km
    attenuation_db_per_km = 0.19dB/km

    [classical]
    channels_nm = 1529.55nm, 1529.94nm
    launch_dbm = -25.5dBm          # or 2.8uW

    [detector]
    effective_on_time_s = 125ps

Values are normalised to the unit in the key name on parse. Unknown
sections or keys are rejected. :func:`dump` writes the canonical form, and
``parse(dump(cfg)) == cfg``.
"""
from __future__ import annotations

import configparser
import csv
import io
import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Optional, Tuple

from qkd_coexist.channel_plan import OpticalChannel, build_plan
from qkd_coexist.link_budget import FiberSpan, watts_to_dbm
from qkd_coexist.noise_model import REFERENCE_PUMP_NM, DetectorParams, RamanProfile
from qkd_coexist.qkd_rate import LinkScenario, ProtocolParams


class ConfigError(ValueError):
    pass


_SUFFIXES = {
    "km": {"km": 1.0, "m": 1e-3},
    "nm": {"nm": 1.0, "um": 1e3},
    "db": {"db": 1.0},
    "db_per_km": {"db/km": 1.0},
    "hz": {"hz": 1.0, "khz": 1e3, "mhz": 1e6, "ghz": 1e9, "thz": 1e12},
    "s": {"s": 1.0, "ms": 1e-3, "us": 1e-6, "ns": 1e-9, "ps": 1e-12},
    "gbps": {"gbps": 1.0, "gb/s": 1.0, "tbps": 1e3, "tb/s": 1e3, "mbps": 1e-3},
    "bps": {"bps": 1.0, "kbps": 1e3, "mbps": 1e6, "gbps": 1e9},
    "dbm": {"dbm": 1.0},
    "plain": {},
}
_WATTS = {"w": 1.0, "mw": 1e-3, "uw": 1e-6, "nw": 1e-9, "pw": 1e-12}
_NUMBER = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([A-Za-z/%μµ]*)\s*$")

# section -> key -> (dimension, default); None default means "absent"
SCHEMA: Dict[str, Dict[str, Tuple[str, object]]] = {
    "fiber": {
        "length_km": ("km", 50.0),
        "attenuation_db_per_km": ("db_per_km", 0.19),
    },
    "quantum": {
        "itu_channel": ("plain", 37.0),
        "wavelength_nm": ("nm", None),
    },
    "classical": {
        "channels_nm": ("list_nm", (1529.55, 1529.94)),
        "launch_dbm": ("dbm", -25.5),
        "channel_rate_gbps": ("gbps", 100.0),
        "power_cap_dbm": ("dbm", 0.0),
        "dwdm_loss_db": ("db", 5.0),
    },
    "filters": {
        "filter": ("choice:100ghz,25ghz", "100ghz"),
        "cwdm_loss_db": ("db", 1.0),
        "filter_loss_db": ("db", None),
    },
    "detector": {
        "efficiency": ("plain", 0.225),
        "dark_count_prob": ("plain", 4.5e-6),
        "gate_rate_hz": ("hz", 1e9),
        "effective_on_time_s": ("s", 125e-12),
        "num_detectors": ("int", 2),
        "afterpulse_prob": ("plain", 0.0),
    },
    "protocol": {
        "mu": ("plain", 0.4),
        "nu1": ("plain", 0.1),
        "nu2": ("plain", 7e-3),
        "p_basis_major": ("plain", 31 / 32),
        "p_signal": ("plain", 0.9),
        "p_nu1": ("plain", 0.05),
        "p_nu2": ("plain", 0.05),
        "f_ec": ("plain", 1.16),
        "clock_rate_hz": ("hz", 1e9),
        "e_det": ("plain", 0.01),
    },
    "raman": {
        "rho_ref": ("plain", None),
        "ref_pump_nm": ("nm", REFERENCE_PUMP_NM),
        "profile": ("path", None),
    },
    "sweep": {
        "start": ("axis", None),
        "stop": ("axis", None),
        "step": ("axis", None),
        "distance_km": ("km", 50.0),
        "per_channel_dbm": ("dbm", -25.5),
    },
}
SWEEP_AXES = {"distance_km": "km", "bandwidth_gbps": "gbps", "launch_dbm": "dbm"}
SCHEMA["sweep"] = {"axis": ("choice:" + ",".join(SWEEP_AXES), "distance_km"), **SCHEMA["sweep"]}


def parse_quantity(text: str, dim: str) -> float:
    """Number with an optional unit suffix, converted to the ``dim`` unit."""
    m = _NUMBER.match(text)
    if not m:
        raise ConfigError(f"cannot read a number from {text!r}")
    value, suffix = float(m.group(1)), m.group(2).lower().replace("μ", "u").replace("µ", "u")
    if not suffix:
        return value
    if dim == "dbm" and suffix in _WATTS:
        return watts_to_dbm(value * _WATTS[suffix])
    table = _SUFFIXES.get(dim, {})
    if suffix not in table:
        raise ConfigError(f"unit {m.group(2)!r} not allowed here (expected {dim})")
    return value * table[suffix]


def _parse_value(raw: str, dim: str, axis_dim: str):
    raw = raw.strip()
    if dim.startswith("choice:"):
        options = dim.split(":", 1)[1].split(",")
        if raw.lower() not in options:
            raise ConfigError(f"{raw!r} is not one of {options}")
        return raw.lower()
    if dim == "path":
        return raw
    if dim == "int":
        v = parse_quantity(raw, "plain")
        if v != int(v):
            raise ConfigError(f"expected an integer, got {raw!r}")
        return int(v)
    if dim == "list_nm":
        return tuple(parse_quantity(x, "nm") for x in raw.split(",") if x.strip())
    if dim == "axis":
        return parse_quantity(raw, axis_dim)
    return parse_quantity(raw, dim)


@dataclass(frozen=True)
class ScenarioConfig:
    """Validated, normalised configuration values."""

    values: Tuple[Tuple[str, Tuple[Tuple[str, object], ...]], ...]

    def section(self, name: str) -> Dict[str, object]:
        return dict(dict(self.values)[name])

    def get(self, section: str, key: str):
        return dict(dict(self.values)[section])[key]

    def with_value(self, section: str, key: str, value) -> "ScenarioConfig":
        if key not in SCHEMA.get(section, {}):
            raise ConfigError(f"unknown key [{section}] {key}")
        data = {s: dict(kv) for s, kv in self.values}
        data[section][key] = value
        return _freeze(data)


def _freeze(data) -> ScenarioConfig:
    return ScenarioConfig(
        tuple((s, tuple((k, data[s][k]) for k in SCHEMA[s])) for s in SCHEMA)
    )


def parse(text: str) -> ScenarioConfig:
    cp = configparser.ConfigParser(
        inline_comment_prefixes=("#",), comment_prefixes=("#",), interpolation=None
    )
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from exc

    data = {s: {k: default for k, (_, default) in keys.items()} for s, keys in SCHEMA.items()}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in cp[section]:
            if key not in SCHEMA[section]:
                raise ConfigError(f"unknown key [{section}] {key}")
    axis = cp.get("sweep", "axis", fallback="distance_km").strip().lower()
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}")
    for section in cp.sections():
        for key, raw in cp[section].items():
            dim = SCHEMA[section][key][0]
            try:
                data[section][key] = _parse_value(raw, dim, SWEEP_AXES[axis])
            except (ConfigError, ValueError) as exc:
                raise ConfigError(f"[{section}] {key}: {exc}") from exc
    cfg = _freeze(data)
    validate(cfg)
    return cfg


def load(path) -> ScenarioConfig:
    return parse(Path(path).read_text())


def default_config() -> ScenarioConfig:
    return parse("")


def validate(cfg: ScenarioConfig) -> None:
    sweep = cfg.section("sweep")
    given = [sweep[k] is not None for k in ("start", "stop", "step")]
    if any(given) and not all(given):
        raise ConfigError("[sweep] needs start, stop and step together")
    if all(given):
        if sweep["start"] > sweep["stop"]:
            raise ConfigError("[sweep] start must not exceed stop")
        if sweep["step"] <= 0:
            raise ConfigError("[sweep] step must be positive")
    # building the scenario runs every domain-type check; the profile file is
    # read later, relative to the config's directory
    try:
        to_scenario(cfg.with_value("raman", "profile", None), require_raman=False)
    except (ValueError, OSError) as exc:
        raise ConfigError(str(exc)) from exc


def _fmt(value) -> str:
    if isinstance(value, tuple):
        return ", ".join(repr(v) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump(cfg: ScenarioConfig) -> str:
    """Canonical text; absent optional values are omitted."""
    out = []
    for section, kv in cfg.values:
        out.append(f"[{section}]")
        for key, value in kv:
            if value is not None:
                out.append(f"{key} = {_fmt(value)}")
        out.append("")
    return "\n".join(out)


def read_profile(path) -> Tuple[RamanProfile, Optional[float]]:
    """Load a calibration CSV written by :func:`write_profile`."""
    meta, entries = {}, {}
    with open(path, newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, value = line[1:].partition("=")
                meta[key.strip()] = float(value)
    with open(path, newline="") as fh:
        rows = csv.DictReader(line for line in fh if not line.startswith("#"))
        for row in rows:
            entries[float(row["pump_nm"])] = float(row["rho"])
    for key in ("quantum_nm", "rho_ref", "ref_pump_nm"):
        if key not in meta:
            raise ConfigError(f"profile {path} lacks '# {key}=' header")
    profile = RamanProfile(meta["quantum_nm"], meta["rho_ref"], meta["ref_pump_nm"], entries)
    return profile, meta.get("e_det")


def format_profile(profile: RamanProfile, pumps, e_det: Optional[float] = None) -> str:
    """Calibration CSV text: ``# key=value`` header lines, then one row per pump."""
    buf = io.StringIO()
    buf.write(f"# quantum_nm={profile.quantum_wavelength!r}\n")
    buf.write(f"# rho_ref={profile.rho_ref!r}\n")
    buf.write(f"# ref_pump_nm={profile.ref_pump!r}\n")
    if e_det is not None:
        buf.write(f"# e_det={e_det!r}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("pump_nm", "rho", "units"))
    for pump, rho in profile.table(pumps):
        w.writerow((repr(pump), repr(rho), "W/(W km nm)"))
    return buf.getvalue()


def write_profile(path, profile: RamanProfile, pumps, e_det: Optional[float] = None) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(format_profile(profile, pumps, e_det))


class MissingCalibration(ConfigError):
    pass


def to_scenario(
    cfg: ScenarioConfig,
    filter_override: Optional[str] = None,
    *,
    require_raman: bool = True,
    base_dir=None,
) -> LinkScenario:
    """Build the immutable :class:`LinkScenario` a config describes."""
    fib, q, cl, flt = (cfg.section(s) for s in ("fiber", "quantum", "classical", "filters"))
    det, pr, ram = (cfg.section(s) for s in ("detector", "protocol", "raman"))

    if q["wavelength_nm"] is not None:
        quantum = OpticalChannel.from_wavelength(q["wavelength_nm"], "quantum", itu_index=q["itu_channel"])
    else:
        quantum = OpticalChannel.from_itu(q["itu_channel"], "quantum")
    data = [OpticalChannel.from_wavelength(w, "data", cl["launch_dbm"]) for w in cl["channels_nm"]]
    plan = build_plan(
        quantum,
        data,
        filter_override or flt["filter"],
        cwdm_loss=flt["cwdm_loss_db"],
        dwdm_loss=cl["dwdm_loss_db"],
        filter_loss=flt["filter_loss_db"] if filter_override in (None, flt["filter"]) else None,
    )
    detector = DetectorParams(
        efficiency=det["efficiency"],
        dark_count_prob=det["dark_count_prob"],
        gate_rate=det["gate_rate_hz"],
        effective_on_time=det["effective_on_time_s"],
        num_detectors=det["num_detectors"],
        afterpulse_prob=det["afterpulse_prob"],
    )
    protocol = ProtocolParams(
        mu=pr["mu"], nu1=pr["nu1"], nu2=pr["nu2"],
        p_basis_major=pr["p_basis_major"],
        p_signal=pr["p_signal"], p_nu1=pr["p_nu1"], p_nu2=pr["p_nu2"],
        f_ec=pr["f_ec"], clock_rate=pr["clock_rate_hz"],
    )
    e_det = pr["e_det"]
    raman = None
    if ram["profile"] is not None:
        path = Path(ram["profile"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        raman, fitted_e_det = read_profile(path)
        if fitted_e_det is not None:
            e_det = fitted_e_det
    elif ram["rho_ref"] is not None:
        raman = RamanProfile(quantum.wavelength, ram["rho_ref"], ram["ref_pump_nm"])
    elif require_raman:
        raise MissingCalibration(
            "no Raman coefficients: set [raman] rho_ref or profile (run 'calibrate' first)"
        )
    return LinkScenario(
        plan=plan,
        span=FiberSpan(fib["length_km"], fib["attenuation_db_per_km"]),
        detector=detector,
        protocol=protocol,
        raman=raman,
        e_det=e_det,
        channel_rate_gbps=cl["channel_rate_gbps"],
    )


def sweep_points(cfg: ScenarioConfig):
    """Axis name and values of the configured sweep."""
    s = cfg.section("sweep")
    if s["start"] is None:
        raise ConfigError("config has no [sweep] start/stop/step")
    return s["axis"], grid(s["start"], s["stop"], s["step"])


def grid(start: float, stop: float, step: float):
    """Inclusive arithmetic grid, robust to float steps."""
    if start > stop:
        raise ValueError("start must not exceed stop")
    if step <= 0:
        raise ValueError("step must be positive")
    n = int(math.floor((stop - start) / step + 1e-9))
    return [start + i * step for i in range(n + 1)]
