"""Forward spontaneous Raman noise and detector background.

Raman photons are generated along the span by every co-propagating data
channel. The scattered power reaching the end of the fibre is

    P_R = P_launch * rho * d_lambda * L * 10**(-alpha * L / 10)

with a single attenuation for pump and scattered light. Scattered photons
then cross the receive chain (CWDM demux and spectral filter) like signal
photons, and only the ~125 ps effective on-time of the gated detector counts
them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional

from qkd_coexist.channel_plan import C_NM_THZ, ChannelPlan, MuxElement
from qkd_coexist.link_budget import (
    FiberSpan,
    dbm_to_watts,
    rx_chain_loss,
    transmittance,
)

HC = 1.98645e-25  # Planck constant times c, J*m
H_PLANCK = 6.62607015e-34
K_BOLTZMANN = 1.380649e-23

# reference pump for the calibrated scale: the 1529.55 nm line card
REFERENCE_PUMP_NM = 1529.55


@dataclass(frozen=True)
class DetectorParams:
    efficiency: float = 0.225
    dark_count_prob: float = 4.5e-6  # per gate, per detector
    gate_rate: float = 1e9  # Hz
    effective_on_time: float = 125e-12  # s
    num_detectors: int = 2
    afterpulse_prob: float = 0.0

    def __post_init__(self):
        if not 0 < self.efficiency <= 1:
            raise ValueError(f"efficiency must lie in (0, 1], got {self.efficiency}")
        for name in ("dark_count_prob", "afterpulse_prob"):
            p = getattr(self, name)
            if not 0 <= p <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {p}")
        if self.gate_rate <= 0:
            raise ValueError("gate rate must be positive")
        if not 0 <= self.effective_on_time <= 1.0 / self.gate_rate:
            raise ValueError("effective on-time must fit inside one gate period")
        if self.num_detectors < 1:
            raise ValueError("need at least one detector")

    @property
    def temporal_acceptance(self) -> float:
        """Fraction of a continuous photon flux that falls inside the on-time."""
        return self.effective_on_time * self.gate_rate


def raman_spectral_weight(pump_nm: float, quantum_nm: float, temperature: float = 300.0) -> float:
    """Relative spontaneous Raman strength for one pump into the quantum line.

    Small-shift approximation: gain grows linearly with the frequency offset
    and is weighted by the thermal phonon occupation (n + 1 for Stokes, n for
    anti-Stokes). Only ratios of this weight are used.
    """
    shift_thz = C_NM_THZ / pump_nm - C_NM_THZ / quantum_nm
    if shift_thz == 0:
        return 0.0
    x = H_PLANCK * abs(shift_thz) * 1e12 / (K_BOLTZMANN * temperature)
    n_th = 1.0 / math.expm1(x)
    return abs(shift_thz) * (n_th + 1.0 if shift_thz > 0 else n_th)


@dataclass(frozen=True)
class RamanProfile:
    """Scattering coefficients, W / (W km nm), into ``quantum_wavelength``.

    ``rho_ref`` is the coefficient of the reference pump; other pumps scale by
    :func:`raman_spectral_weight` unless listed in ``entries``.
    """

    quantum_wavelength: float
    rho_ref: float
    ref_pump: float = REFERENCE_PUMP_NM
    entries: Mapping[float, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.rho_ref < 0:
            raise ValueError("scattering coefficient must be non-negative")
        if any(v < 0 for v in self.entries.values()):
            raise ValueError("scattering coefficients must be non-negative")

    def rho(self, pump_nm: float) -> float:
        for key, value in self.entries.items():
            if abs(key - pump_nm) < 1e-3:
                return value
        w_ref = raman_spectral_weight(self.ref_pump, self.quantum_wavelength)
        return self.rho_ref * raman_spectral_weight(pump_nm, self.quantum_wavelength) / w_ref

    def scaled(self, factor: float) -> "RamanProfile":
        return RamanProfile(
            self.quantum_wavelength,
            self.rho_ref * factor,
            self.ref_pump,
            {k: v * factor for k, v in self.entries.items()},
        )

    def table(self, pumps) -> list:
        return [(p, self.rho(p)) for p in pumps]


def filter_bandwidth_nm(filt: MuxElement, quantum_wavelength: float) -> float:
    """Rectangular noise bandwidth of a filter, using FWHM when it is known."""
    width_ghz = filt.fwhm if filt.fwhm is not None else filt.passband
    if width_ghz is None:
        raise ValueError(f"{filt.kind} has no passband")
    return quantum_wavelength**2 * (width_ghz / 1000.0) / C_NM_THZ


def forward_raman_power(p_launch: float, rho: float, span: FiberSpan, delta_lambda: float) -> float:
    """Co-propagating Raman power (W) in ``delta_lambda`` at the fibre output."""
    if min(p_launch, rho, delta_lambda) < 0:
        raise ValueError("launch power, rho and bandwidth must be non-negative")
    L = span.length
    return p_launch * rho * delta_lambda * L * 10.0 ** (-span.attenuation * L / 10.0)


def raman_noise_power(plan: ChannelPlan, span: FiberSpan, profile: Optional[RamanProfile]) -> float:
    """Raman power from all data channels at the detector input, in W.

    Sync and reconciliation channels carry no modelled power.
    """
    if profile is None:
        return 0.0
    dl = filter_bandwidth_nm(plan.rx_filter, plan.quantum.wavelength)
    p_fibre_out = 0.0
    for ch in plan.data_channels:
        if ch.launch_power is None:
            continue
        p_fibre_out += forward_raman_power(
            dbm_to_watts(ch.launch_power), profile.rho(ch.wavelength), span, dl
        )
    return p_fibre_out * transmittance(rx_chain_loss(plan))


def raman_peak_distance(attenuation: float) -> float:
    """Span length (km) that maximises L * 10**(-alpha L / 10)."""
    if attenuation <= 0:
        raise ValueError("attenuation must be positive")
    return 10.0 / (attenuation * math.log(10.0))


def photon_rate(power_w: float, wavelength_nm: float) -> float:
    return power_w * wavelength_nm * 1e-9 / HC


def raman_click_prob(p_raman: float, det: DetectorParams, quantum_wavelength: float) -> float:
    """Per-gate, per-detector click probability from Raman light."""
    return photon_rate(p_raman, quantum_wavelength) * det.efficiency * det.effective_on_time


def per_detector_background(p_raman: float, det: DetectorParams, quantum_wavelength: float) -> float:
    # afterpulsing is folded in as a constant, like dark counts
    return (
        det.dark_count_prob
        + det.afterpulse_prob
        + raman_click_prob(p_raman, det, quantum_wavelength)
    )


def background_click_prob(p_raman: float, det: DetectorParams, quantum_wavelength: float) -> float:
    """Background yield Y0 per gate, summed over detectors (union approximation)."""
    return det.num_detectors * per_detector_background(p_raman, det, quantum_wavelength)
