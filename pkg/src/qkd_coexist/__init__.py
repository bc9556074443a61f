"""Raman-limited QKD over fibre shared with DWDM data traffic.

Submodules:

- ``channel_plan``: ITU grid arithmetic, mux/filter chain, plan validation.
- ``link_budget``: fibre loss, power units, quantum path loss.
- ``noise_model``: forward Raman scattering and detector background.
- ``qkd_rate``: decoy-state BB84 gains, bounds and secure key rate.
- ``calibration``: fit Raman scale and intrinsic error to observed rates.
- ``montecarlo``: per-gate stochastic oracle for the analytic model.
- ``keyflow``: AES key refresh arithmetic and key-buffer simulation.
- ``config`` / ``sweeps`` / ``cli``: scenario files, sweeps, CSV output.
"""

from qkd_coexist.channel_plan import (
    ChannelPlan,
    MuxElement,
    OpticalChannel,
    build_plan,
    frequency_to_wavelength,
    itu_channel_to_frequency,
)
from qkd_coexist.link_budget import (
    FiberSpan,
    LaunchPlan,
    dbm_to_watts,
    fiber_loss,
    quantum_path_loss,
    total_launch_power,
    transmittance,
    watts_to_dbm,
)
from qkd_coexist.noise_model import (
    DetectorParams,
    RamanProfile,
    background_click_prob,
    filter_bandwidth_nm,
    forward_raman_power,
    raman_peak_distance,
)
from qkd_coexist.qkd_rate import (
    GainStats,
    LinkScenario,
    ProtocolParams,
    RatePoint,
    decoy_bounds,
    gain_and_qber,
    h2,
    secure_rate,
    system_transmittance,
)

__version__ = "0.1.0"

__all__ = [
    "ChannelPlan",
    "DetectorParams",
    "FiberSpan",
    "GainStats",
    "LaunchPlan",
    "LinkScenario",
    "MuxElement",
    "OpticalChannel",
    "ProtocolParams",
    "RamanProfile",
    "RatePoint",
    "background_click_prob",
    "build_plan",
    "dbm_to_watts",
    "decoy_bounds",
    "fiber_loss",
    "filter_bandwidth_nm",
    "forward_raman_power",
    "frequency_to_wavelength",
    "gain_and_qber",
    "h2",
    "itu_channel_to_frequency",
    "quantum_path_loss",
    "raman_peak_distance",
    "secure_rate",
    "system_transmittance",
    "total_launch_power",
    "transmittance",
    "watts_to_dbm",
]
