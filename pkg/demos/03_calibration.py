"""
Fitting Raman and error floor to observed rates
===============================================

The Raman coefficients are not published, so they are fitted to observed
secure rates. Two anchors fix (rho, e_det). The script also shows the
limit of the fit: the modelled rate can never fall off more gently than
the bare channel transmittance.
"""
from pathlib import Path

from qkd_coexist import config
from qkd_coexist.calibration import calibrate_raman
from qkd_coexist.qkd_rate import secure_rate, system_transmittance
from qkd_coexist.sweeps import read_anchors

here = Path(__file__).parent
cfg = config.load(here / "scenario.ini")
base = config.to_scenario(cfg, require_raman=False)
anchors = read_anchors(here / "anchors.csv", base)

result = calibrate_raman(anchors, ("rho", "e_det"), raise_on_failure=False)
print(result.residual_table(anchors))
print(f"rho = {result.params['rho']:.3g} W/(W km nm), e_det = {result.e_det:.4f}")
print(f"fit within 5% in log-rate: {result.ok}")
print()

# rate ratio between the two anchors: observed versus the loss-only floor
near, far = (a.scenario for a in anchors)
observed = anchors[0].observed / anchors[1].observed
floor = system_transmittance(near) / system_transmittance(far)
print(f"observed ratio {observed:.3f}, transmittance ratio {floor:.3f}")

fitted = result.apply(base)
for L in (35.5, 50.5, 80.0, 100.0):
    print(f"{L:6.1f} km  {secure_rate(fitted.with_distance(L)).secure_rate / 1e6:.3f} Mb/s")

# synthetic round trip: anchors produced by the model itself are recovered
from dataclasses import replace  # noqa: E402

from qkd_coexist.calibration import Anchor  # noqa: E402
from qkd_coexist.noise_model import RamanProfile  # noqa: E402

truth = replace(base, raman=RamanProfile(base.plan.quantum.wavelength, 3e-9), e_det=0.012)
synthetic = [
    Anchor(base.with_distance(L), secure_rate(truth.with_distance(L)).secure_rate)
    for L in (20.0, 60.0)
]
check = calibrate_raman(synthetic)
print(f"\nround trip: rho {check.params['rho']:.4g} (3e-9), e_det {check.e_det:.4g} (0.012)")
