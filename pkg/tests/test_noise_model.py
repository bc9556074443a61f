import numpy as np
import pytest
from hypothesis import given, strategies as st

from qkd_coexist.channel_plan import frequency_to_wavelength, reference_plan, spectral_filter, ten_laser_plan
from qkd_coexist.link_budget import FiberSpan, dbm_to_watts
from qkd_coexist.noise_model import (
    DetectorParams,
    RamanProfile,
    background_click_prob,
    filter_bandwidth_nm,
    forward_raman_power,
    photon_rate,
    raman_click_prob,
    raman_noise_power,
    raman_peak_distance,
)

LQ = frequency_to_wavelength(193.7)


def test_filter_bandwidth_examples():
    # oracle: mpmath lambda^2 * df / c
    assert filter_bandwidth_nm(spectral_filter("100ghz"), LQ) == pytest.approx(0.7990270122167854, rel=1e-12)
    assert filter_bandwidth_nm(spectral_filter("25ghz"), LQ) == pytest.approx(0.1198540518325178, rel=1e-12)
    from qkd_coexist.channel_plan import MuxElement

    assert filter_bandwidth_nm(MuxElement("spectral_filter_100GHz", 0.9, passband=0.0), LQ) == 0.0
    with pytest.raises(ValueError):
        filter_bandwidth_nm(MuxElement("cwdm", 1.0), LQ)


def test_raman_zero_length():
    assert forward_raman_power(1e-3, 1e-9, FiberSpan(0.0), 0.8) == 0.0


def test_raman_linear_in_launch_power_exactly():
    span = FiberSpan(50)
    p = dbm_to_watts(-25.5)
    assert forward_raman_power(2 * p, 3e-9, span, 0.799) == 2 * forward_raman_power(p, 3e-9, span, 0.799)


@given(
    st.floats(1e-9, 1e-2), st.floats(1e-12, 1e-6), st.floats(0.01, 2.0), st.floats(0.0, 150.0),
    st.sampled_from([2.0, 3.0, 0.5, 10.0]),
)
def test_raman_degree_one_homogeneity(p, rho, dl, L, k):
    span = FiberSpan(L)
    base = forward_raman_power(p, rho, span, dl)
    assert forward_raman_power(k * p, rho, span, dl) == pytest.approx(k * base, rel=1e-13)
    assert forward_raman_power(p, k * rho, span, dl) == pytest.approx(k * base, rel=1e-13)
    assert forward_raman_power(p, rho, span, k * dl) == pytest.approx(k * base, rel=1e-13)


def test_peak_distance_examples():
    assert raman_peak_distance(0.19) == pytest.approx(22.857604310697465, abs=1e-9)
    assert raman_peak_distance(0.2) == pytest.approx(21.714724095162591, abs=1e-9)
    assert raman_peak_distance(0.38) == pytest.approx(raman_peak_distance(0.19) / 2)
    with pytest.raises(ValueError):
        raman_peak_distance(0.0)


@pytest.mark.parametrize("alpha", [0.17, 0.19, 0.2, 0.25])
def test_peak_is_unique_interior_max_by_sampling(alpha):
    L = np.linspace(0.0, 100.0, 100001)
    p = [forward_raman_power(1e-3, 1e-9, FiberSpan(x, alpha), 0.8) for x in L[::10]]
    p = np.array(p)
    i = int(np.argmax(p))
    assert 0 < i < len(p) - 1
    assert abs(L[::10][i] - raman_peak_distance(alpha)) < 0.01
    d = np.diff(p)
    assert np.all(d[:i] > 0) and np.all(d[i:] < 0)


def test_photon_rate_1pw():
    assert photon_rate(1e-12, LQ) == pytest.approx(7791363.098310621, rel=1e-12)


def test_dark_only_background():
    det = DetectorParams()
    assert background_click_prob(0.0, det, LQ) == pytest.approx(9e-6)
    assert det.temporal_acceptance == pytest.approx(0.125)


def test_detector_invariants():
    with pytest.raises(ValueError):
        DetectorParams(efficiency=0.0)
    with pytest.raises(ValueError):
        DetectorParams(effective_on_time=2e-9)
    with pytest.raises(ValueError):
        DetectorParams(dark_count_prob=1.5)


@given(
    st.floats(0, 1e-9), st.floats(0, 1e-9),
    st.floats(0, 1e-4), st.floats(0, 1e-4),
    st.floats(1e-12, 5e-10), st.floats(0, 5e-10),
)
def test_y0_non_decreasing(pr, dpr, dark, ddark, tau, dtau):
    det = DetectorParams(dark_count_prob=dark, effective_on_time=tau)
    base = background_click_prob(pr, det, LQ)
    assert background_click_prob(pr + dpr, det, LQ) >= base
    det2 = DetectorParams(dark_count_prob=dark + ddark, effective_on_time=tau)
    assert background_click_prob(pr, det2, LQ) >= base
    det3 = DetectorParams(dark_count_prob=dark, effective_on_time=min(tau + dtau, 1e-9))
    assert background_click_prob(pr, det3, LQ) >= base


def test_filter_ratio_in_raman_clicks():
    prof = RamanProfile(LQ, 3e-9)
    span = FiberSpan(50)
    det = DetectorParams()
    p100 = raman_click_prob(raman_noise_power(reference_plan("100ghz"), span, prof), det, LQ)
    p25 = raman_click_prob(raman_noise_power(reference_plan("25ghz"), span, prof), det, LQ)
    # bandwidth ratio and the extra 1.1 dB the narrow filter imposes on Raman photons
    expected = (0.1198540518325178 / 0.7990270122167854) * 10 ** (-0.11)
    assert p25 / p100 == pytest.approx(expected, rel=1e-12)


def test_filter_ratio_bandwidth_only_at_fibre_output():
    span = FiberSpan(50)
    p = dbm_to_watts(-25.5)
    r = forward_raman_power(p, 3e-9, span, filter_bandwidth_nm(spectral_filter("25ghz"), LQ)) / (
        forward_raman_power(p, 3e-9, span, filter_bandwidth_nm(spectral_filter("100ghz"), LQ))
    )
    assert r == pytest.approx(0.120 / 0.799, rel=2e-3)


def test_profile_strongest_for_shortest_pump():
    prof = RamanProfile(LQ, 3e-9)
    pumps = sorted(c.wavelength for c in ten_laser_plan().data_channels)
    rhos = [prof.rho(p) for p in pumps]
    assert rhos[0] == max(rhos) == 3e-9
    assert all(r > 0 for r in rhos)


def test_profile_entries_override_and_scale():
    prof = RamanProfile(LQ, 3e-9, entries={1529.94: 1e-9})
    assert prof.rho(1529.94) == 1e-9
    assert prof.scaled(2).rho(1529.94) == 2e-9
    with pytest.raises(ValueError):
        RamanProfile(LQ, -1.0)


def test_no_profile_no_raman():
    assert raman_noise_power(reference_plan(), FiberSpan(50), None) == 0.0
