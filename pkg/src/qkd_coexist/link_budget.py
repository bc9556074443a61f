"""Fibre attenuation, power units and path loss."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from qkd_coexist.channel_plan import ChannelPlan


@dataclass(frozen=True)
class FiberSpan:
    """A single-attenuation fibre span; splices and connectors are folded into ``attenuation``."""

    length: float  # km
    attenuation: float = 0.19  # dB/km

    def __post_init__(self):
        if self.length < 0:
            raise ValueError(f"span length must be non-negative, got {self.length} km")
        if not 0 < self.attenuation < 1:
            raise ValueError(
                f"attenuation must lie in (0, 1) dB/km, got {self.attenuation}"
            )


def fiber_loss(span: FiberSpan) -> float:
    return span.length * span.attenuation


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def watts_to_dbm(p_w: float) -> float:
    if p_w <= 0:
        raise ValueError(f"power must be positive to express in dBm, got {p_w} W")
    return 10.0 * math.log10(p_w / 1e-3)


def transmittance(loss_db: float) -> float:
    if loss_db < 0:
        raise ValueError(f"loss must be non-negative, got {loss_db} dB")
    return 10.0 ** (-loss_db / 10.0)


def rx_chain_loss(plan: ChannelPlan) -> float:
    """Receive-side insertion loss on the quantum path (CWDM demux + filter)."""
    if plan.rx_filter is None:
        raise ValueError("plan has no receive spectral filter")
    return sum(e.insertion_loss for e in plan.rx_chain)


def quantum_path_loss(plan: ChannelPlan, span: FiberSpan) -> float:
    """Total loss seen by quantum photons from transmitter to detector, in dB.

    Only CWDM stages on the transmit side carry the quantum wavelength; the
    DWDM mux sits on the data path alone.
    """
    tx = sum(e.insertion_loss for e in plan.tx_chain if e.kind == "cwdm")
    return fiber_loss(span) + tx + rx_chain_loss(plan)


@dataclass(frozen=True)
class LaunchPlan:
    powers: tuple  # dBm per data channel
    cap: float = 0.0  # dBm, aggregate

    def __post_init__(self):
        object.__setattr__(self, "powers", tuple(self.powers))


class LaunchTotal(NamedTuple):
    total_dbm: float
    within_cap: bool
    cap_dbm: float


def total_launch_power(launch: LaunchPlan) -> LaunchTotal:
    """Aggregate launch power; a cap violation is reported, never clamped."""
    if not launch.powers:
        raise ValueError("launch plan has no channels")
    total_dbm = watts_to_dbm(sum(dbm_to_watts(p) for p in launch.powers))
    return LaunchTotal(total_dbm, total_dbm <= launch.cap, launch.cap)


def equal_split(total_dbm: float, n: int) -> Sequence[float]:
    """Per-channel dBm when ``total_dbm`` is shared evenly by ``n`` channels."""
    if n < 1:
        raise ValueError("need at least one channel")
    return [total_dbm - 10.0 * math.log10(n)] * n
