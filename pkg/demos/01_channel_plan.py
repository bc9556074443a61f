"""
Channel plan, losses and Raman geometry
=======================================

Builds the two-channel coexistence plan, prints its loss budget and shows
where forward Raman noise peaks along the fibre.
"""
import numpy as np

from qkd_coexist.channel_plan import cwdm_band_capacity, reference_plan, ten_laser_plan
from qkd_coexist.link_budget import FiberSpan, LaunchPlan, quantum_path_loss, total_launch_power
from qkd_coexist.noise_model import filter_bandwidth_nm, forward_raman_power, raman_peak_distance

# the quantum channel sits alone in the 1551 nm CWDM band; data sits at 1531 nm
plan = reference_plan()
print(plan.summary())
print()

# 18 nm of CWDM band holds this many DWDM slots
for spacing in (50, 100):
    print(f"1551 nm band, {spacing} GHz grid: {cwdm_band_capacity(1551.0, spacing)} channels")
print()

# loss seen by quantum photons for both receive filters
for filt in ("100ghz", "25ghz"):
    p = reference_plan(filt)
    dl = filter_bandwidth_nm(p.rx_filter, p.quantum.wavelength)
    loss = quantum_path_loss(p, FiberSpan(50.5))
    print(f"{filt:>6}: noise bandwidth {dl:.3f} nm, path loss at 50.5 km {loss:.2f} dB")
print()

# forward Raman power grows with length, then attenuation wins
L = np.linspace(0, 100, 201)
p_r = np.array([forward_raman_power(2.818e-6, 3e-9, FiberSpan(x), 0.799) for x in L])
print(f"sampled peak at {L[p_r.argmax()]:.1f} km, closed form {raman_peak_distance(0.19):.2f} km")

# ten lasers at -25.5 dBm are the 1 Tb/s operating point
ten = ten_laser_plan()
total = total_launch_power(LaunchPlan([c.launch_power for c in ten.data_channels]))
print(f"ten lasers: total launch {total.total_dbm:.1f} dBm, under 0 dBm cap: {total.within_cap}")
