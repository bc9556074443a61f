"""
Data bandwidth, key rate and AES refresh
========================================

Emulates growing traffic by raising the launch power of ten lasers
(100 Gb/s per -25.5 dBm) and converts the surviving key rate into the
shortest AES-256 refresh interval for one 100G line card per 100 Gb/s.
"""
from dataclasses import replace

from qkd_coexist.channel_plan import ten_laser_plan
from qkd_coexist.keyflow import EncryptorFleet, fec_margin, min_refresh_interval, simulate_buffer
from qkd_coexist.link_budget import FiberSpan
from qkd_coexist.noise_model import RamanProfile
from qkd_coexist.qkd_rate import LinkScenario
from qkd_coexist.sweeps import sweep_bandwidth

plan = ten_laser_plan()
base = LinkScenario(plan=plan, span=FiberSpan(50.0), raman=RamanProfile(plan.quantum.wavelength, 3e-9))

for filt in ("100ghz", "25ghz"):
    print(f"{filt}:")
    rows = sweep_bandwidth(base.with_filter(filt), [1000, 2000, 4000, 6000, 8000, 10000])
    for row in rows:
        p = row.point
        cards = int(p.bandwidth // 100)
        t = min_refresh_interval(p.secure_rate, cards)
        print(
            f"  {p.bandwidth / 1e3:4.0f} Tb/s  total {row.launch.total_dbm:6.1f} dBm  "
            f"secure {p.secure_rate / 1e3:9.2f} kb/s  refresh every {t:.4g} s on {cards} cards"
        )
print()

# one card pair refreshing every 250 us needs 2.05 Mb/s; 1.2 Mb/s falls short
trace = simulate_buffer(1.2e6, EncryptorFleet(2), 1.0, 250e-6, record=False)
print(f"1.2 Mb/s, 250 us policy: {trace.stalls} of {trace.refreshes} refreshes stalled")
trace = simulate_buffer(1.2e6, EncryptorFleet(2), 1.0, 500e-6, record=False)
print(f"1.2 Mb/s, 500 us policy: {trace.steady_state_stalls} steady-state stalls")

verdict = fec_margin(2.2e-3)
print(f"pre-FEC BER 2.2e-3: pass={verdict.passed}, margin {verdict.margin:.1f}x")

# same scenario with a fibre twice as lossy per km
lossy = replace(base, span=FiberSpan(50.0, 0.25))
print(f"0.25 dB/km at 1 Tb/s: {sweep_bandwidth(lossy, [1000])[0].point.secure_rate / 1e3:.1f} kb/s")
