"""Reconstruct Raman coefficients and intrinsic QBER from observed rates.

The fit minimises the sum of squared log-ratios between modelled and observed
values. A coarse grid locates the basin; nested golden-section searches then
refine each parameter inside one grid cell of the best node. Everything is
deterministic for a given anchor list.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional, Sequence, Tuple

from qkd_coexist.noise_model import REFERENCE_PUMP_NM, RamanProfile
from qkd_coexist.qkd_rate import LinkScenario, expected_stats, rate_from_stats

INV_PHI = (math.sqrt(5) - 1) / 2
INV_PHI2 = (3 - math.sqrt(5)) / 2

RATE_FLOOR = 1e-3  # bit/s; keeps log residuals finite when the model clamps to 0
QBER_FLOOR = 1e-9

# search domain per parameter: (low, high, log10-space?)
DEFAULT_BOUNDS = {
    "rho": (-12.0, -6.0, True),
    "e_det": (0.0, 0.1, False),
    "p_signal": (0.5, 0.98, False),
}
PER_PUMP_PREFIX = "rho@"


class CalibrationError(RuntimeError):
    """Fit finished but misses an anchor by more than the threshold.

    The best fit found is kept on ``result``.
    """

    def __init__(self, message: str, result: "CalibrationResult"):
        super().__init__(message)
        self.result = result


class UnderdeterminedFit(ValueError):
    pass


@dataclass(frozen=True)
class Anchor:
    scenario: LinkScenario
    observed: float
    kind: str = "secure"  # or "qber"
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("secure", "qber"):
            raise ValueError(f"anchor kind must be 'secure' or 'qber', got {self.kind!r}")
        if self.observed <= 0:
            raise ValueError("observed anchor values must be positive")


@dataclass(frozen=True)
class CalibrationResult:
    params: Dict[str, float]
    residuals: Tuple[float, ...]  # ln(model / observed), one per anchor
    modelled: Tuple[float, ...]
    objective: float
    threshold: float

    @property
    def max_abs_residual(self) -> float:
        return max(abs(r) for r in self.residuals)

    @property
    def ok(self) -> bool:
        return self.max_abs_residual <= self.threshold

    @property
    def e_det(self) -> Optional[float]:
        return self.params.get("e_det")

    def profile(self, quantum_wavelength: float, base: Optional[RamanProfile] = None):
        return _profile_from(self.params, quantum_wavelength, base)

    def apply(self, scenario: LinkScenario) -> LinkScenario:
        return _apply(scenario, self.params)

    def residual_table(self, anchors: Sequence[Anchor]) -> str:
        lines = [f"{'anchor':<28} {'observed':>12} {'model':>12} {'ln ratio':>9}"]
        for a, m, r in zip(anchors, self.modelled, self.residuals):
            label = a.label or f"{a.scenario.span.length:g} km {a.kind}"
            lines.append(f"{label:<28} {a.observed:>12.4g} {m:>12.4g} {r:>+9.4f}")
        return "\n".join(lines)


def _bounds_for(name: str) -> Tuple[float, float, bool]:
    if name.startswith(PER_PUMP_PREFIX):
        return DEFAULT_BOUNDS["rho"]
    if name not in DEFAULT_BOUNDS:
        raise ValueError(f"unknown fit parameter {name!r}")
    return DEFAULT_BOUNDS[name]


def _profile_from(params, quantum_wavelength, base):
    rho_keys = [k for k in params if k == "rho" or k.startswith(PER_PUMP_PREFIX)]
    if not rho_keys:
        return base
    rho_ref = params.get("rho", base.rho_ref if base is not None else 0.0)
    entries = dict(base.entries) if base is not None else {}
    for k in rho_keys:
        if k.startswith(PER_PUMP_PREFIX):
            entries[float(k[len(PER_PUMP_PREFIX):])] = params[k]
    ref = base.ref_pump if base is not None else REFERENCE_PUMP_NM
    return RamanProfile(quantum_wavelength, rho_ref, ref, entries)


def _apply(scenario: LinkScenario, params: Dict[str, float]) -> LinkScenario:
    changes = {}
    raman = _profile_from(params, scenario.plan.quantum.wavelength, scenario.raman)
    if raman is not scenario.raman:
        changes["raman"] = raman
    if "e_det" in params:
        changes["e_det"] = params["e_det"]
    if "p_signal" in params:
        p = scenario.protocol
        rest = 1.0 - params["p_signal"]
        share = p.p_nu1 / (p.p_nu1 + p.p_nu2)
        changes["protocol"] = replace(
            p, p_signal=params["p_signal"], p_nu1=rest * share, p_nu2=rest * (1 - share)
        )
    return replace(scenario, **changes) if changes else scenario


def model_value(scenario: LinkScenario, kind: str) -> float:
    stats = expected_stats(scenario)
    if kind == "qber":
        return max(stats.e_mu, QBER_FLOOR)
    _, secure = rate_from_stats(stats, scenario.protocol)
    return max(secure, RATE_FLOOR)


def _residuals(anchors, params) -> Tuple[list, list]:
    modelled = [model_value(_apply(a.scenario, params), a.kind) for a in anchors]
    res = [math.log(m / a.observed) for m, a in zip(modelled, anchors)]
    return modelled, res


def golden_section(f: Callable[[float], float], a: float, b: float, tol: float) -> Tuple[float, float]:
    """Minimise a unimodal ``f`` on [a, b]; returns (x, f(x))."""
    a, b = min(a, b), max(a, b)
    h = b - a
    if h <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    n = int(math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    c, d = a + INV_PHI2 * h, a + INV_PHI * h
    yc, yd = f(c), f(d)
    for _ in range(n - 1):
        h *= INV_PHI
        if yc < yd:
            b, d, yd = d, c, yc
            c = a + INV_PHI2 * h
            yc = f(c)
        else:
            a, c, yc = c, d, yd
            d = a + INV_PHI * h
            yd = f(d)
    # compare the bracket ends too: the minimum may sit on the domain boundary
    candidates = [(yc, c), (yd, d), (f(a), a), (f(b), b)]
    fx, x = min(candidates)
    return x, fx


def _profile_search(obj, bounds, grid_points, tol) -> Tuple[list, float]:
    """Minimise ``obj(vector)`` one coordinate at a time.

    The first coordinate is scanned on a coarse grid and then refined by
    golden-section search inside the best cell's neighbours; every trial
    value re-minimises the remaining coordinates the same way. Profiling
    rather than gridding all axes jointly keeps correlated parameters
    (a Raman scale traded against an error floor) from being aliased by
    the grid.
    """
    (lo, hi), rest = bounds[0], bounds[1:]
    inner_best = {}

    def profile(v):
        if not rest:
            return obj([v])
        r, fx = _profile_search(lambda r: obj([v] + r), rest, grid_points, tol)
        inner_best[v] = r
        return fx

    nodes = [lo + (hi - lo) * i / (grid_points - 1) for i in range(grid_points)]
    values = [profile(v) for v in nodes]
    i = min(range(grid_points), key=values.__getitem__)
    a, b = nodes[max(i - 1, 0)], nodes[min(i + 1, grid_points - 1)]
    x, fx = golden_section(profile, a, b, tol * (hi - lo))
    if values[i] < fx:
        x, fx = nodes[i], values[i]
    if rest and x not in inner_best:
        profile(x)
    return [x] + (inner_best[x] if rest else []), fx


def calibrate_raman(
    anchors: Sequence[Anchor],
    fit_params: Sequence[str] = ("rho", "e_det"),
    *,
    grid_points: int = 25,
    tol: float = 1e-7,
    threshold: float = 0.05,
    raise_on_failure: bool = True,
) -> CalibrationResult:
    """Fit the chosen parameters to the anchors.

    ``fit_params`` may contain ``"rho"`` (scale of the whole Raman profile),
    ``"rho@<pump nm>"`` (one pump's coefficient), ``"e_det"`` and
    ``"p_signal"``.

    Raises:
        UnderdeterminedFit: fewer anchors than free parameters, or repeated
            operating points.
        CalibrationError: the best fit misses some anchor by more than
            ``threshold`` in |ln(model / observed)|.
    """
    fit_params = list(fit_params)
    if not fit_params:
        raise ValueError("nothing to fit")
    if len(set(fit_params)) != len(fit_params):
        raise ValueError("duplicate fit parameters")
    anchors = list(anchors)
    if len(anchors) < len(fit_params):
        raise UnderdeterminedFit(
            f"{len(anchors)} anchor(s) cannot determine {len(fit_params)} parameters"
        )
    seen = set()
    for a in anchors:
        key = (repr(a.scenario), a.kind)
        if key in seen:
            raise UnderdeterminedFit("anchors must come from distinct operating points")
        seen.add(key)

    specs = [_bounds_for(p) for p in fit_params]

    def decode(vec):
        return {
            name: (10.0**v if is_log else v)
            for name, v, (_, _, is_log) in zip(fit_params, vec, specs)
        }

    def objective(vec):
        _, res = _residuals(anchors, decode(vec))
        return sum(r * r for r in res)

    vec, val = _profile_search(objective, [(lo, hi) for lo, hi, _ in specs], grid_points, tol)

    params = decode(vec)
    modelled, res = _residuals(anchors, params)
    result = CalibrationResult(params, tuple(res), tuple(modelled), val, threshold)
    if raise_on_failure and not result.ok:
        raise CalibrationError(
            f"calibration misses an anchor by {result.max_abs_residual:.3f} "
            f"in log-rate (threshold {threshold})\n" + result.residual_table(anchors),
            result,
        )
    return result
