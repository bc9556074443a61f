"""
Secure key rate against distance
================================

Sweeps the fibre length for both receive filters with an explicit Raman
coefficient and writes the result tables next to this script.
"""
from pathlib import Path

from qkd_coexist import config
from qkd_coexist.sweeps import emit, sweep_distance

here = Path(__file__).parent
out = here / "out"
out.mkdir(exist_ok=True)

cfg = config.load(here / "scenario.ini")
_, distances = config.sweep_points(cfg)

for filt in ("100ghz", "25ghz"):
    scenario = config.to_scenario(cfg, filt, base_dir=here)
    points = sweep_distance(scenario, distances)
    emit(points, out / f"distance_{filt}.csv")

    # last distance with a positive key
    reach = max((p.distance for p in points if p.secure_rate > 0), default=None)
    print(f"{filt}: reach {reach} km")
    for p in points[::4]:
        print(f"  {p.distance:6.1f} km  QBER {p.qber:.4f}  secure {p.secure_rate / 1e3:10.2f} kb/s")
