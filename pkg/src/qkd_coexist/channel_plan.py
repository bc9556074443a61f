"""ITU DWDM grid arithmetic and the coexistence channel plan.

A plan holds one quantum channel, any number of classical channels and the
ordered mux/filter elements on each side of the fibre. Frequencies are in
THz, wavelengths in nm, powers in dBm, insertion losses in dB.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

C_NM_THZ = 299792.458  # speed of light, nm * THz

ROLES = ("quantum", "data", "sync", "reconciliation")
MUX_KINDS = ("cwdm", "dwdm96", "spectral_filter_100GHz", "spectral_filter_25GHz")
FILTER_KINDS = ("spectral_filter_100GHz", "spectral_filter_25GHz")

ITU_MIN, ITU_MAX = -40, 80
MIN_SPACING_GHZ = 50.0
# printed wavelengths carry 0.01 nm resolution, about 0.6 GHz in the C-band
SPACING_TOLERANCE_GHZ = 1.0

CWDM_FIRST_NM = 1271.0
CWDM_PITCH_NM = 20.0
CWDM_BAND_WIDTH_NM = 18.0

DEFAULT_CWDM_LOSS_DB = 1.0
DEFAULT_DWDM_LOSS_DB = 5.0
DEFAULT_FILTER_LOSS_DB = {"100ghz": 0.9, "25ghz": 2.0}


class PlanError(ValueError):
    """Raised when a channel plan violates a coexistence rule."""


def itu_channel_to_frequency(n: float) -> float:
    """Centre frequency in THz of ITU grid channel ``n`` (half-integers allowed)."""
    if not ITU_MIN <= n <= ITU_MAX:
        raise ValueError(
            f"ITU channel {n} outside supported range [{ITU_MIN}, {ITU_MAX}]"
        )
    # 100 GHz steps anchored at 190.0 THz; rounding strips binary noise
    return round(190.0 + 0.1 * n, 9)


def frequency_to_wavelength(f: float) -> float:
    """Vacuum wavelength in nm for a frequency in THz.

    Full precision is returned; tables round to 0.01 nm for display.
    """
    if f <= 0:
        raise ValueError(f"frequency must be positive, got {f} THz")
    return C_NM_THZ / f


def wavelength_to_frequency(wavelength: float) -> float:
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength} nm")
    return C_NM_THZ / wavelength


@dataclass(frozen=True)
class OpticalChannel:
    """One wavelength on the fibre.

    ``itu_index`` is a label only; when a channel is built from a printed
    wavelength the frequency follows the wavelength, not the label.
    """

    center_frequency: float
    wavelength: float
    role: str
    itu_index: Optional[float] = None
    launch_power: Optional[float] = None

    def __post_init__(self):
        if self.role not in ROLES:
            raise ValueError(f"unknown channel role {self.role!r}; expected one of {ROLES}")
        if abs(self.wavelength - C_NM_THZ / self.center_frequency) > 0.01:
            raise ValueError(
                f"wavelength {self.wavelength} nm inconsistent with "
                f"{self.center_frequency} THz"
            )
        if self.role == "quantum" and self.launch_power is not None:
            raise ValueError("the quantum channel carries no classical launch power")

    @classmethod
    def from_itu(cls, n: float, role: str, launch_power: Optional[float] = None):
        f = itu_channel_to_frequency(n)
        return cls(f, frequency_to_wavelength(f), role, n, launch_power)

    @classmethod
    def from_wavelength(
        cls,
        wavelength: float,
        role: str,
        launch_power: Optional[float] = None,
        itu_index: Optional[float] = None,
    ):
        return cls(
            wavelength_to_frequency(wavelength), wavelength, role, itu_index, launch_power
        )

    @property
    def cwdm_band(self) -> float:
        return cwdm_band_center(self.wavelength)


@dataclass(frozen=True)
class MuxElement:
    kind: str
    insertion_loss: float
    passband: Optional[float] = None  # GHz
    fwhm: Optional[float] = None  # GHz

    def __post_init__(self):
        if self.kind not in MUX_KINDS:
            raise ValueError(f"unknown mux element {self.kind!r}")
        if self.insertion_loss < 0:
            raise ValueError("insertion loss must be non-negative")
        if self.kind in FILTER_KINDS and self.passband is None:
            raise ValueError(f"{self.kind} needs a passband")
        if self.passband is not None and self.fwhm is not None and self.fwhm > self.passband:
            raise ValueError("fwhm cannot exceed the nominal passband")

    @property
    def is_filter(self) -> bool:
        return self.kind in FILTER_KINDS


def cwdm(insertion_loss: float = DEFAULT_CWDM_LOSS_DB) -> MuxElement:
    return MuxElement("cwdm", insertion_loss)


def dwdm96(insertion_loss: float = DEFAULT_DWDM_LOSS_DB) -> MuxElement:
    return MuxElement("dwdm96", insertion_loss)


def spectral_filter(name: str, insertion_loss: Optional[float] = None) -> MuxElement:
    """Thin-film filter by short name, ``"100ghz"`` or ``"25ghz"``.

    The 25 GHz part measured 15 GHz FWHM, which is what the noise model uses.
    """
    name = name.lower()
    if name not in DEFAULT_FILTER_LOSS_DB:
        raise ValueError(f"unknown filter {name!r}; expected '100ghz' or '25ghz'")
    loss = DEFAULT_FILTER_LOSS_DB[name] if insertion_loss is None else insertion_loss
    if name == "100ghz":
        return MuxElement("spectral_filter_100GHz", loss, passband=100.0)
    return MuxElement("spectral_filter_25GHz", loss, passband=25.0, fwhm=15.0)


def cwdm_band_center(wavelength: float) -> float:
    """Centre of the nearest CWDM band (1271 + 20 k nm)."""
    k = round((wavelength - CWDM_FIRST_NM) / CWDM_PITCH_NM)
    return CWDM_FIRST_NM + CWDM_PITCH_NM * k


def cwdm_band_capacity(
    band_center_nm: float,
    spacing_ghz: float = 50.0,
    band_width_nm: float = CWDM_BAND_WIDTH_NM,
) -> int:
    """Number of whole DWDM slots of ``spacing_ghz`` that fit inside a CWDM band."""
    lo = band_center_nm - band_width_nm / 2
    hi = band_center_nm + band_width_nm / 2
    width_ghz = (C_NM_THZ / lo - C_NM_THZ / hi) * 1000.0
    return int(math.floor(width_ghz / spacing_ghz + 1e-9))


@dataclass(frozen=True)
class ChannelPlan:
    channels: tuple
    tx_chain: tuple = ()
    rx_chain: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))
        object.__setattr__(self, "tx_chain", tuple(self.tx_chain))
        object.__setattr__(self, "rx_chain", tuple(self.rx_chain))
        self.validate()

    def validate(self) -> None:
        quantum = [c for c in self.channels if c.role == "quantum"]
        if len(quantum) != 1:
            raise PlanError(f"a plan needs exactly one quantum channel, got {len(quantum)}")

        freqs = sorted(c.center_frequency for c in self.channels)
        for a, b in zip(freqs, freqs[1:]):
            gap_ghz = (b - a) * 1000.0
            if gap_ghz < 1e-6:
                raise PlanError(f"duplicate channel frequency {a} THz")
            if gap_ghz < MIN_SPACING_GHZ - SPACING_TOLERANCE_GHZ:
                raise PlanError(
                    f"channels at {a} and {b} THz are {gap_ghz:.1f} GHz apart "
                    f"(minimum {MIN_SPACING_GHZ} GHz)"
                )

        q_band = quantum[0].cwdm_band
        for c in self.data_channels:
            if c.cwdm_band == q_band:
                raise PlanError(
                    f"data channel at {c.wavelength:.2f} nm shares the {q_band:.0f} nm "
                    f"CWDM band with the quantum channel"
                )

        filters = [e for e in self.rx_chain if e.is_filter]
        if len(filters) > 1:
            raise PlanError("the receive chain may hold only one spectral filter")
        if filters and not self.rx_chain[-1].is_filter:
            raise PlanError("the spectral filter must be the last receive element")

    @property
    def quantum(self) -> OpticalChannel:
        return next(c for c in self.channels if c.role == "quantum")

    @property
    def data_channels(self) -> tuple:
        return tuple(c for c in self.channels if c.role == "data")

    @property
    def rx_filter(self) -> Optional[MuxElement]:
        if self.rx_chain and self.rx_chain[-1].is_filter:
            return self.rx_chain[-1]
        return None

    def with_filter(self, name: str, insertion_loss: Optional[float] = None) -> "ChannelPlan":
        """Same plan with the receive spectral filter swapped."""
        rx = [e for e in self.rx_chain if not e.is_filter]
        rx.append(spectral_filter(name, insertion_loss))
        return ChannelPlan(self.channels, self.tx_chain, tuple(rx))

    def with_data_launch(self, powers_dbm: Sequence[float]) -> "ChannelPlan":
        """Same plan with new per-channel launch powers for the data channels."""
        data = self.data_channels
        if len(powers_dbm) != len(data):
            raise ValueError(f"need {len(data)} launch powers, got {len(powers_dbm)}")
        it = iter(powers_dbm)
        channels = [
            OpticalChannel(c.center_frequency, c.wavelength, c.role, c.itu_index, next(it))
            if c.role == "data"
            else c
            for c in self.channels
        ]
        return ChannelPlan(channels, self.tx_chain, self.rx_chain)

    def summary(self) -> str:
        lines = [f"{'idx':>6} {'f (THz)':>10} {'lambda (nm)':>12} {'role':>15} {'launch':>9}"]
        for c in sorted(self.channels, key=lambda c: -c.center_frequency):
            idx = "-" if c.itu_index is None else f"{c.itu_index:g}"
            launch = "-" if c.launch_power is None else f"{c.launch_power:.1f}"
            lines.append(
                f"{idx:>6} {c.center_frequency:>10.4f} {c.wavelength:>12.2f} "
                f"{c.role:>15} {launch:>9}"
            )
        lines.append("tx: " + ", ".join(f"{e.kind} {e.insertion_loss:g} dB" for e in self.tx_chain))
        lines.append("rx: " + ", ".join(f"{e.kind} {e.insertion_loss:g} dB" for e in self.rx_chain))
        return "\n".join(lines)

    def csv_rows(self) -> list:
        """Rows of (index, frequency_thz, wavelength_nm, role, launch_dbm)."""
        rows = []
        for c in self.channels:
            rows.append(
                (
                    "" if c.itu_index is None else f"{c.itu_index:g}",
                    repr(c.center_frequency),
                    f"{c.wavelength:.2f}",
                    c.role,
                    "" if c.launch_power is None else repr(c.launch_power),
                )
            )
        return rows


PLAN_CSV_HEADER = ("index", "frequency_thz", "wavelength_nm", "role", "launch_dbm")


def build_plan(
    quantum: OpticalChannel,
    data: Iterable[OpticalChannel] = (),
    filter_name: str = "100ghz",
    *,
    extra: Iterable[OpticalChannel] = (),
    cwdm_loss: float = DEFAULT_CWDM_LOSS_DB,
    dwdm_loss: float = DEFAULT_DWDM_LOSS_DB,
    filter_loss: Optional[float] = None,
) -> ChannelPlan:
    """Assemble and validate a coexistence plan.

    Transmit side: the data channels pass a 96-channel DWDM mux, then a CWDM
    stage joins them with the quantum channel. Receive side (quantum path):
    CWDM demux, then the narrow spectral filter.

    Raises:
        PlanError: no quantum channel, duplicate or too-close frequencies, or
            a data channel sitting in the quantum channel's CWDM band.
    """
    if quantum is None or quantum.role != "quantum":
        raise PlanError("build_plan needs a channel with role 'quantum'")
    channels = [quantum, *data, *extra]
    tx = (dwdm96(dwdm_loss), cwdm(cwdm_loss))
    rx = (cwdm(cwdm_loss), spectral_filter(filter_name, filter_loss))
    return ChannelPlan(tuple(channels), tx, rx)


# the two 100G line cards, as printed (60 and "60.5")
REFERENCE_DATA_WAVELENGTHS = (1529.55, 1529.94)
REFERENCE_LAUNCH_DBM = -25.5


def reference_plan(filter_name: str = "100ghz", launch_dbm: float = REFERENCE_LAUNCH_DBM) -> ChannelPlan:
    """Quantum on channel 37 with the two 100G data channels."""
    data = [
        OpticalChannel.from_wavelength(w, "data", launch_dbm, itu_index=n)
        for w, n in zip(REFERENCE_DATA_WAVELENGTHS, (60, 60.5))
    ]
    return build_plan(OpticalChannel.from_itu(37, "quantum"), data, filter_name)


def ten_laser_plan(filter_name: str = "100ghz", launch_dbm: float = REFERENCE_LAUNCH_DBM) -> ChannelPlan:
    """The two 100G channels plus eight CW lasers on the 50 GHz grid to 1533.07 nm."""
    data = [
        OpticalChannel.from_wavelength(w, "data", launch_dbm, itu_index=n)
        for w, n in zip(REFERENCE_DATA_WAVELENGTHS, (60, 60.5))
    ]
    for k in range(8):
        f = round(195.90 - 0.05 * k, 9)
        data.append(
            OpticalChannel(f, frequency_to_wavelength(f), "data", round((f - 190.0) * 10, 1), launch_dbm)
        )
    return build_plan(OpticalChannel.from_itu(37, "quantum"), data, filter_name)
