"""Gate-by-gate stochastic simulation of the quantum receiver.

Each gate draws an intensity class, a Poissonian photon number, independent
photon survival through the channel and detector, a basis-matched encoded
bit, an intrinsic bit flip and independent background clicks on each
detector. Double clicks get a fair random bit. Only matched-basis gates are
simulated because gains and QBER are defined on them.

Gates are processed in fixed-size chunks, each with its own generator
seeded from ``(seed, chunk index)``, so results do not depend on how the
chunks are spread over worker processes.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import List, Optional

import numpy as np

from qkd_coexist.noise_model import per_detector_background
from qkd_coexist.qkd_rate import (
    GainStats,
    LinkScenario,
    decoy_bounds,
    expected_stats,
    raman_power,
    system_transmittance,
)

CHUNK_GATES = 1 << 22
SEED_MASK = (1 << 64) - 1

# per-class tally columns
_COLS = ("gates", "clicks", "errors", "n0_gates", "n0_clicks", "n1_gates", "n1_clicks", "n1_errors")


@dataclass(frozen=True)
class TrialConfig:
    num_gates: int
    seed: int
    scenario: LinkScenario

    def __post_init__(self):
        if self.num_gates < 1:
            raise ValueError("a trial needs at least one gate")


@dataclass(frozen=True)
class ChannelModel:
    """Per-gate probabilities handed to the workers."""

    intensities: tuple
    emission_probs: tuple
    t_sys: float
    e_det: float
    p_background: float  # per detector


def channel_model(scenario: LinkScenario) -> ChannelModel:
    p = scenario.protocol
    return ChannelModel(
        intensities=p.intensities,
        emission_probs=p.emission_probs,
        t_sys=system_transmittance(scenario),
        e_det=scenario.e_det,
        p_background=per_detector_background(
            raman_power(scenario), scenario.detector, scenario.plan.quantum.wavelength
        ),
    )


def _bernoulli_positions(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """Indices in [0, n) of successes of n Bernoulli(p) trials, via geometric gaps."""
    if p <= 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1:
        return np.arange(n, dtype=np.int64)
    expected = n * p
    out = []
    pos = -1
    while True:
        k = int(expected + 6 * math.sqrt(expected) + 16)
        gaps = rng.geometric(p, size=k)
        idx = pos + np.cumsum(gaps)
        keep = idx[idx < n]
        out.append(keep)
        if keep.size < k:
            break
        pos = int(idx[-1])
    return np.concatenate(out)


def _poisson_cdf(lam: float, kmax: int = 60) -> np.ndarray:
    pmf = [math.exp(-lam)]
    for k in range(1, kmax):
        pmf.append(pmf[-1] * lam / k)
    return np.cumsum(pmf)


def _simulate_class(rng: np.random.Generator, model: ChannelModel, lam: float, n: int) -> np.ndarray:
    """Tallies for ``n`` gates of one intensity class (gates are exchangeable)."""
    # photon number per gate by inversion of the Poisson CDF; most gates are empty
    u = rng.random(n)
    cdf = _poisson_cdf(lam)
    emitted = np.flatnonzero(u >= cdf[0])
    n_emit = np.searchsorted(cdf, u[emitted], side="right")

    # every photon survives channel and detector independently with t_sys
    single = n_emit == 1
    alive = np.empty(emitted.size, dtype=bool)
    alive[single] = rng.random(int(single.sum())) < model.t_sys
    multi = ~single
    alive[multi] = rng.binomial(n_emit[multi], model.t_sys) > 0
    hit = emitted[alive]

    bg = [_bernoulli_positions(rng, n, model.p_background) for _ in range(2)]
    gates = np.union1d(np.union1d(hit, bg[0]), bg[1])
    m = gates.size

    bit = rng.integers(0, 2, size=m, dtype=np.int8)
    click = np.zeros((2, m), dtype=bool)
    is_hit = np.isin(gates, hit, assume_unique=True)
    flip = (rng.random(int(is_hit.sum())) < model.e_det).astype(np.int8)
    hit_pos = np.flatnonzero(is_hit)
    click[bit[hit_pos] ^ flip, hit_pos] = True
    for d in range(2):
        click[d, np.searchsorted(gates, bg[d])] = True

    double = click[0] & click[1]
    measured = click[1].astype(np.int8)
    dbl = np.flatnonzero(double)
    measured[dbl] = rng.integers(0, 2, size=dbl.size, dtype=np.int8)
    error = measured != bit  # every listed gate clicked

    photons = np.zeros(m, dtype=np.int64)
    if emitted.size:
        where = np.minimum(np.searchsorted(emitted, gates), emitted.size - 1)
        found = emitted[where] == gates
        photons[found] = n_emit[where[found]]

    return np.array(
        [
            n,
            m,
            int(error.sum()),
            n - emitted.size,
            int((photons == 0).sum()),
            int(single.sum()),
            int((photons == 1).sum()),
            int((error & (photons == 1)).sum()),
        ],
        dtype=np.int64,
    )


def _simulate_chunk(model: ChannelModel, seed: int, chunk: int, n: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, chunk]))
    # per-gate class draws only matter through the class counts
    per_class = rng.multinomial(n, model.emission_probs)
    return np.stack(
        [
            _simulate_class(rng, model, lam, int(k))
            for lam, k in zip(model.intensities, per_class)
        ]
    )


@dataclass(frozen=True)
class TrialResult:
    """Raw per-class counts; rows are (mu, nu1, nu2), columns follow ``_COLS``."""

    counts: tuple

    def _col(self, i: int, name: str) -> int:
        return self.counts[i][_COLS.index(name)]

    def gain(self, i: int) -> float:
        return self._col(i, "clicks") / self._col(i, "gates")

    def gain_sigma(self, i: int) -> float:
        return _binomial_sigma(self._col(i, "clicks"), self._col(i, "gates"))

    def qber(self, i: int) -> float:
        c = self._col(i, "clicks")
        return self._col(i, "errors") / c if c else 0.5

    def qber_sigma(self, i: int) -> float:
        return _binomial_sigma(self._col(i, "errors"), self._col(i, "clicks"))

    def _sum(self, name: str) -> int:
        return sum(self._col(i, name) for i in range(3))

    @property
    def y0(self) -> float:
        """Yield of vacuum pulses, pooled over classes."""
        return self._sum("n0_clicks") / self._sum("n0_gates")

    @property
    def y0_sigma(self) -> float:
        return _binomial_sigma(self._sum("n0_clicks"), self._sum("n0_gates"))

    @property
    def y1(self) -> float:
        """Yield of single-photon pulses, pooled over classes."""
        return self._sum("n1_clicks") / self._sum("n1_gates")

    @property
    def y1_sigma(self) -> float:
        return _binomial_sigma(self._sum("n1_clicks"), self._sum("n1_gates"))

    @property
    def e1(self) -> float:
        return self._sum("n1_errors") / self._sum("n1_clicks")

    @property
    def e1_sigma(self) -> float:
        return _binomial_sigma(self._sum("n1_errors"), self._sum("n1_clicks"))

    def gain_stats(self) -> GainStats:
        for i in range(3):
            if self._col(i, "gates") == 0 or self._col(i, "clicks") == 0:
                raise ValueError(f"intensity class {i} has no gates or no clicks")
        return GainStats(
            self.gain(0), self.qber(0),
            self.gain(1), self.qber(1),
            self.gain(2), self.qber(2),
            self.y0,
        )


def _binomial_sigma(k: int, n: int) -> float:
    if n == 0:
        return math.inf
    p = k / n
    return math.sqrt(p * (1 - p) / n)


def _chunk_job(args):
    return _simulate_chunk(*args)


def run_trial(config: TrialConfig, workers: Optional[int] = None) -> TrialResult:
    """Simulate ``config.num_gates`` gates; identical inputs give identical counts."""
    model = channel_model(config.scenario)
    seed = config.seed & SEED_MASK
    n_chunks = -(-config.num_gates // CHUNK_GATES)
    jobs = [
        (model, seed, c, min(CHUNK_GATES, config.num_gates - c * CHUNK_GATES))
        for c in range(n_chunks)
    ]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_chunk_job, jobs))
    else:
        parts = [_chunk_job(j) for j in jobs]
    total = np.sum(parts, axis=0)
    return TrialResult(tuple(tuple(int(v) for v in row) for row in total))


@dataclass(frozen=True)
class ComparisonRow:
    quantity: str
    analytic: float
    empirical: float
    sigma: float

    @property
    def z(self) -> float:
        if self.sigma == 0:
            return 0.0 if self.analytic == self.empirical else math.inf
        return (self.empirical - self.analytic) / self.sigma


COMPARISON_HEADER = ("quantity", "analytic", "empirical", "sigma", "z")


def compare(result: TrialResult, scenario: LinkScenario) -> List[ComparisonRow]:
    """Empirical gains, QBERs and y0 against the analytic model."""
    stats = expected_stats(scenario)
    analytic = {
        "q_mu": stats.q_mu, "e_mu": stats.e_mu,
        "q_nu1": stats.q_nu1, "e_nu1": stats.e_nu1,
        "q_nu2": stats.q_nu2, "e_nu2": stats.e_nu2,
    }
    rows = []
    for i, tag in enumerate(("mu", "nu1", "nu2")):
        rows.append(ComparisonRow(f"q_{tag}", analytic[f"q_{tag}"], result.gain(i), result.gain_sigma(i)))
        rows.append(ComparisonRow(f"e_{tag}", analytic[f"e_{tag}"], result.qber(i), result.qber_sigma(i)))
    rows.append(ComparisonRow("y0", stats.y0, result.y0, result.y0_sigma))
    return rows


@dataclass(frozen=True)
class DecoyReport:
    y1_lower: float
    y1_lower_sigma: float
    y1_empirical: float
    y1_sigma: float
    e1_upper: float
    e1_upper_sigma: float
    e1_empirical: float
    e1_sigma: float

    @property
    def y1_holds(self) -> bool:
        return self.y1_lower <= self.y1_empirical

    @property
    def e1_holds(self) -> bool:
        return self.e1_upper >= self.e1_empirical

    @property
    def holds(self) -> bool:
        return self.y1_holds and self.e1_holds

    def holds_within(self, n_sigma: float = 4.0) -> bool:
        """Bounds hold up to ``n_sigma`` combined statistical uncertainty of
        the bound (propagated from the gains) and the tallied value."""
        sy = math.hypot(self.y1_lower_sigma, self.y1_sigma)
        se = math.hypot(self.e1_upper_sigma, self.e1_sigma)
        return (
            self.y1_lower <= self.y1_empirical + n_sigma * sy
            and self.e1_upper >= self.e1_empirical - n_sigma * se
        )


def _bound_sigmas(result: TrialResult, params) -> tuple:
    """First-order spread of (y1_lower, e1_upper) from binomial noise in the gains."""
    stats = result.gain_stats()
    base = decoy_bounds(stats, params)
    sigmas = {
        "q_mu": result.gain_sigma(0), "e_mu": result.qber_sigma(0),
        "q_nu1": result.gain_sigma(1), "e_nu1": result.qber_sigma(1),
        "q_nu2": result.gain_sigma(2), "e_nu2": result.qber_sigma(2),
    }
    var_y1 = var_e1 = 0.0
    for name, sigma in sigmas.items():
        if not math.isfinite(sigma) or sigma == 0:
            continue
        moved = decoy_bounds(replace(stats, **{name: getattr(stats, name) + sigma}), params)
        var_y1 += (moved.y1_lower - base.y1_lower) ** 2
        var_e1 += (moved.e1_upper - base.e1_upper) ** 2
    return base, math.sqrt(var_y1), math.sqrt(var_e1)


def verify_decoy_bounds(config: TrialConfig, workers: Optional[int] = None) -> DecoyReport:
    """Feed empirical gains into the decoy bounds and check them against the
    true single-photon yield and error tallied by the simulator."""
    params = config.scenario.protocol
    mu, nu1, nu2 = params.intensities
    if not mu > nu1 > nu2 >= 0:
        raise ValueError("decoy intensities must be strictly ordered")
    result = run_trial(config, workers)
    bounds, sy, se = _bound_sigmas(result, params)
    return DecoyReport(
        bounds.y1_lower, sy, result.y1, result.y1_sigma,
        bounds.e1_upper, se, result.e1, result.e1_sigma,
    )
