"""Decoy-state efficient BB84 in the asymptotic limit.

Gains follow the usual Poissonian threshold-detector model, single-photon
quantities come from the two-decoy (vacuum + weak decoy) lower/upper bounds,
and the key is distilled from the majority basis only.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

from qkd_coexist.channel_plan import ChannelPlan, reference_plan
from qkd_coexist.link_budget import FiberSpan, quantum_path_loss, transmittance
from qkd_coexist.noise_model import (
    DetectorParams,
    RamanProfile,
    background_click_prob,
    raman_noise_power,
)


def h2(x: float) -> float:
    """Binary entropy in bits."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary entropy needs x in [0, 1], got {x}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


@dataclass(frozen=True)
class ProtocolParams:
    mu: float = 0.4
    nu1: float = 0.1
    nu2: float = 7e-3
    p_basis_major: float = 31 / 32
    p_signal: float = 0.9
    p_nu1: float = 0.05
    p_nu2: float = 0.05
    f_ec: float = 1.16
    clock_rate: float = 1e9

    def __post_init__(self):
        if not self.mu > self.nu1 > self.nu2 >= 0:
            raise ValueError(
                f"intensities must satisfy mu > nu1 > nu2 >= 0, got "
                f"{self.mu}, {self.nu1}, {self.nu2}"
            )
        if not self.nu1 + self.nu2 < self.mu:
            raise ValueError("two-decoy bounds need nu1 + nu2 < mu")
        probs = (self.p_signal, self.p_nu1, self.p_nu2)
        if any(p < 0 for p in probs) or abs(sum(probs) - 1.0) > 1e-9:
            raise ValueError(f"emission probabilities must sum to 1, got {probs}")
        if not 0.5 < self.p_basis_major < 1.0:
            raise ValueError("majority basis probability must lie in (1/2, 1)")
        if self.f_ec < 1.0:
            raise ValueError("error-correction inefficiency cannot beat the Shannon limit")
        if self.clock_rate <= 0:
            raise ValueError("clock rate must be positive")

    @property
    def intensities(self) -> tuple:
        return (self.mu, self.nu1, self.nu2)

    @property
    def emission_probs(self) -> tuple:
        return (self.p_signal, self.p_nu1, self.p_nu2)

    @property
    def sift_factor(self) -> float:
        return self.p_basis_major**2


@dataclass(frozen=True)
class GainStats:
    q_mu: float
    e_mu: float
    q_nu1: float
    e_nu1: float
    q_nu2: float
    e_nu2: float
    y0: float


class DecoyBounds(NamedTuple):
    y0_lower: float
    y1_lower: float
    e1_upper: float


@dataclass(frozen=True)
class RatePoint:
    distance: float  # km
    loss_db: float  # quantum path
    bandwidth: float  # Gb/s
    sifted_rate: float  # bit/s
    qber: float
    secure_rate: float  # bit/s
    raman_power: float  # W at the detector input
    y0: float

    CSV_HEADER = (
        "distance_km",
        "loss_db",
        "bandwidth_gbps",
        "raman_w",
        "y0",
        "sifted_bps",
        "qber",
        "secure_bps",
    )

    def csv_row(self) -> tuple:
        return (
            self.distance,
            self.loss_db,
            self.bandwidth,
            self.raman_power,
            self.y0,
            self.sifted_rate,
            self.qber,
            self.secure_rate,
        )


@dataclass(frozen=True)
class LinkScenario:
    """Everything needed to evaluate one operating point.

    ``bandwidth_gbps`` defaults to 100 Gb/s per data channel; bandwidth sweeps
    set it explicitly because they emulate channels with launch power.
    """

    plan: ChannelPlan = field(default_factory=reference_plan)
    span: FiberSpan = field(default_factory=lambda: FiberSpan(50.0))
    detector: DetectorParams = field(default_factory=DetectorParams)
    protocol: ProtocolParams = field(default_factory=ProtocolParams)
    raman: Optional[RamanProfile] = None
    e_det: float = 0.01
    bandwidth_gbps: Optional[float] = None
    channel_rate_gbps: float = 100.0

    def __post_init__(self):
        if not 0 <= self.e_det <= 0.5:
            raise ValueError(f"intrinsic error must lie in [0, 0.5], got {self.e_det}")

    @property
    def bandwidth(self) -> float:
        if self.bandwidth_gbps is not None:
            return self.bandwidth_gbps
        return len(self.plan.data_channels) * self.channel_rate_gbps

    def with_distance(self, km: float) -> "LinkScenario":
        return replace(self, span=FiberSpan(km, self.span.attenuation))

    def with_filter(self, name: str) -> "LinkScenario":
        return replace(self, plan=self.plan.with_filter(name))


def system_transmittance(scenario: LinkScenario) -> float:
    loss = quantum_path_loss(scenario.plan, scenario.span)
    return transmittance(loss) * scenario.detector.efficiency


def raman_power(scenario: LinkScenario) -> float:
    return raman_noise_power(scenario.plan, scenario.span, scenario.raman)


def background_yield(scenario: LinkScenario) -> float:
    return background_click_prob(
        raman_power(scenario), scenario.detector, scenario.plan.quantum.wavelength
    )


def gain_and_qber(
    intensity: float, t_sys: float, y0: float, e_det: float, e0: float = 0.5
) -> tuple:
    """Gain and QBER of a Poissonian source of mean ``intensity``."""
    if intensity < 0 or not 0 <= t_sys <= 1:
        raise ValueError("need intensity >= 0 and t_sys in [0, 1]")
    signal = -math.expm1(-intensity * t_sys)
    q = y0 + signal
    if q == 0:
        return 0.0, e0
    return q, (e0 * y0 + e_det * signal) / q


def expected_stats(scenario: LinkScenario) -> GainStats:
    t = system_transmittance(scenario)
    y0 = background_yield(scenario)
    p = scenario.protocol
    (q_mu, e_mu), (q1, e1), (q2, e2) = (
        gain_and_qber(i, t, y0, scenario.e_det) for i in p.intensities
    )
    return GainStats(q_mu, e_mu, q1, e1, q2, e2, y0)


def decoy_bounds(stats: GainStats, params: ProtocolParams) -> DecoyBounds:
    """Two-decoy lower bounds on Y0, Y1 and upper bound on e1."""
    mu, n1, n2 = params.intensities
    if not mu > n1 > n2 >= 0:
        raise ValueError("intensity ordering mu > nu1 > nu2 >= 0 violated")
    denom = mu * (n1 - n2) - (n1**2 - n2**2)
    if denom <= 0:
        raise ValueError("two-decoy denominator is not positive")

    a1 = stats.q_nu1 * math.exp(n1)
    a2 = stats.q_nu2 * math.exp(n2)
    y0_lower = max(0.0, (n1 * a2 - n2 * a1) / (n1 - n2))
    y1_lower = (mu / denom) * (
        a1 - a2 - (n1**2 - n2**2) / mu**2 * (stats.q_mu * math.exp(mu) - y0_lower)
    )
    y1_lower = max(0.0, y1_lower)
    if y1_lower == 0.0:
        return DecoyBounds(y0_lower, 0.0, 0.5)
    e1_upper = (stats.e_nu1 * a1 - stats.e_nu2 * a2) / ((n1 - n2) * y1_lower)
    return DecoyBounds(y0_lower, y1_lower, min(0.5, max(0.0, e1_upper)))


def key_fraction(stats: GainStats, params: ProtocolParams) -> float:
    """Secure bits per signal pulse in the majority basis, before sifting; may be negative."""
    bounds = decoy_bounds(stats, params)
    q1 = bounds.y1_lower * params.mu * math.exp(-params.mu)
    return q1 * (1.0 - h2(bounds.e1_upper)) - params.f_ec * stats.q_mu * h2(stats.e_mu)


def rate_from_stats(stats: GainStats, params: ProtocolParams) -> tuple:
    """(sifted_rate, secure_rate) in bit/s for given observables."""
    scale = params.clock_rate * params.p_signal * params.sift_factor
    sifted = scale * stats.q_mu
    secure = max(0.0, scale * key_fraction(stats, params))
    return sifted, min(secure, sifted)


def secure_rate(scenario: LinkScenario, stats: Optional[GainStats] = None) -> RatePoint:
    """Evaluate one operating point.

    ``stats`` overrides the modelled observables, e.g. to force a QBER.
    """
    p_r = raman_power(scenario)
    if stats is None:
        stats = expected_stats(scenario)
    sifted, secure = rate_from_stats(stats, scenario.protocol)
    return RatePoint(
        distance=scenario.span.length,
        loss_db=quantum_path_loss(scenario.plan, scenario.span),
        bandwidth=scenario.bandwidth,
        sifted_rate=sifted,
        qber=stats.e_mu,
        secure_rate=secure,
        raman_power=p_r,
        y0=stats.y0,
    )
