"""AES key consumption by the line-card encryptors.

Each push from the QKD system carries 512 bits; every 100G line card takes a
256-bit AES key per refresh. Event times are exact rationals so that pushes
and refreshes landing on the same instant are ordered deterministically
(push first).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, NamedTuple, Tuple

BITS_PER_KEY = 256
BITS_PER_PUSH = 512
FEC_THRESHOLD = 1.9e-2
DEFAULT_CAPACITY = 1_000_000  # bits


def min_refresh_interval(secure_rate: float, num_cards: int = 1) -> float:
    """Shortest AES key refresh period (s) the key rate sustains.

    Returns ``math.inf`` when the rate is zero: no refresh is possible.
    """
    if secure_rate < 0:
        raise ValueError("secure rate cannot be negative")
    if num_cards < 1:
        raise ValueError("need at least one line card")
    if secure_rate == 0:
        return math.inf
    return BITS_PER_KEY * num_cards / secure_rate


@dataclass(frozen=True)
class EncryptorFleet:
    num_line_cards: int = 2
    bits_per_key: int = BITS_PER_KEY
    bits_per_push: int = BITS_PER_PUSH

    def __post_init__(self):
        if self.num_line_cards < 1:
            raise ValueError("need at least one line card")
        if self.bits_per_push != 2 * self.bits_per_key:
            raise ValueError("each push must carry exactly two keys")

    @property
    def demand_per_refresh(self) -> int:
        return self.bits_per_key * self.num_line_cards


class TraceEvent(NamedTuple):
    t: Fraction
    event: str  # "push", "refresh", "stall"
    level: int


@dataclass
class KeyBuffer:
    capacity: int = DEFAULT_CAPACITY
    level: int = 0
    filled: int = 0
    drained: int = 0
    discarded: int = 0

    def __post_init__(self):
        if not 0 <= self.level <= self.capacity:
            raise ValueError("buffer level must lie in [0, capacity]")

    def push(self, bits: int) -> None:
        self.filled += bits
        room = self.capacity - self.level
        taken = min(bits, room)
        self.level += taken
        self.discarded += bits - taken

    def draw(self, bits: int) -> bool:
        if self.level < bits:
            return False
        self.level -= bits
        self.drained += bits
        return True


@dataclass
class BufferTrace:
    events: List[TraceEvent] = field(default_factory=list)
    stalls: int = 0
    refreshes: int = 0
    first_success: Fraction = None
    steady_state_stalls: int = 0
    filled: int = 0
    drained: int = 0
    discarded: int = 0
    initial_level: int = 0
    final_level: int = 0
    margin: float = 0.0  # fill minus demand, bit/s

    def stall_times(self) -> List[Fraction]:
        return [e.t for e in self.events if e.event == "stall"]

    def csv_rows(self) -> List[Tuple[str, str, int]]:
        return [(repr(float(e.t)), e.event, e.level) for e in self.events]


def _exact(x) -> Fraction:
    # decimal reading of the float, so 250e-6 is exactly 1/4000
    return Fraction(repr(float(x))) if not isinstance(x, Fraction) else x


def simulate_buffer(
    fill_rate: float,
    fleet: EncryptorFleet,
    duration: float,
    policy_interval: float,
    *,
    capacity: int = DEFAULT_CAPACITY,
    initial_level: int = 0,
    record: bool = True,
) -> BufferTrace:
    """Discrete-event run of key pushes against periodic refreshes.

    Pushes of ``bits_per_push`` arrive each time the QKD system has
    accumulated that many bits. Every ``policy_interval`` all line cards
    draw one key each; if the buffer cannot cover the whole fleet the
    refresh stalls (cards keep the old key) and nothing is drawn. Overflow
    beyond ``capacity`` is discarded and counted.
    """
    if duration <= 0 or policy_interval <= 0:
        raise ValueError("duration and policy interval must be positive")
    if fill_rate < 0:
        raise ValueError("fill rate cannot be negative")

    T = _exact(duration)
    P = _exact(policy_interval)
    rate = _exact(fill_rate)
    push_period = Fraction(fleet.bits_per_push) / rate if rate > 0 else None
    demand = fleet.demand_per_refresh

    buf = KeyBuffer(capacity, initial_level)
    trace = BufferTrace(initial_level=initial_level)
    k_push, k_ref = 1, 1
    while True:
        t_push = push_period * k_push if push_period is not None else None
        t_ref = P * k_ref
        if t_push is not None and t_push <= t_ref:
            if t_push > T:
                break
            buf.push(fleet.bits_per_push)
            if record:
                trace.events.append(TraceEvent(t_push, "push", buf.level))
            k_push += 1
            continue
        if t_ref > T:
            break
        trace.refreshes += 1
        if buf.draw(demand):
            if trace.first_success is None:
                trace.first_success = t_ref
            if record:
                trace.events.append(TraceEvent(t_ref, "refresh", buf.level))
        else:
            trace.stalls += 1
            if trace.first_success is not None:
                trace.steady_state_stalls += 1
            if record:
                trace.events.append(TraceEvent(t_ref, "stall", buf.level))
        k_ref += 1

    trace.filled, trace.drained, trace.discarded = buf.filled, buf.drained, buf.discarded
    trace.final_level = buf.level
    trace.margin = float(fill_rate) - demand / float(policy_interval)
    return trace


class FecVerdict(NamedTuple):
    passed: bool
    margin: float  # threshold / ber


def fec_margin(pre_fec_ber: float, threshold: float = FEC_THRESHOLD) -> FecVerdict:
    """Pass when the pre-FEC BER does not exceed the correctable threshold."""
    if not 0 <= pre_fec_ber <= 0.5:
        raise ValueError(f"BER must lie in [0, 0.5], got {pre_fec_ber}")
    margin = math.inf if pre_fec_ber == 0 else threshold / pre_fec_ber
    return FecVerdict(pre_fec_ber <= threshold, margin)
