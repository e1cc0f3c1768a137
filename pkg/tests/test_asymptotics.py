import math

import numpy as np
import pytest

from coneres import (CharFunction, InsufficientData, LadderModel,
                     SearchRegion, coset_deviations, fit_log_curve,
                     gap_report, ladder_in_window, ladder_model_from_spec,
                     log_band_path, predicted_ladder, scan_strip, verify_scan,
                     build_polygon_double, winding_number)

TWO_PI = 2 * math.pi


# ---------------------------------------------------------------------------
# model constants


def test_two_cone_model_constants(two_cone):
    m = ladder_model_from_spec(two_cone)
    assert m.n == 2
    assert m.L0 == pytest.approx(math.pi)
    assert m.c_prod == pytest.approx(-1.0 / (16 * math.pi ** 2), rel=1e-14)
    assert m.spacing == pytest.approx(1.0, abs=1e-15)
    assert m.slope == pytest.approx(-1.0 / TWO_PI, abs=1e-15)
    assert m.c_im == pytest.approx(-0.8056500399812094, abs=1e-13)
    assert m.c_re == pytest.approx(0.5, abs=1e-13)


def test_triangle_model_constants(triangle_345):
    m = ladder_model_from_spec(triangle_345)
    assert m.L0 == 5.0
    assert m.spacing == pytest.approx(math.pi / 5)
    # both couplings turn by half the cone angle at a base angle of the
    # triangle; their product is real and negative
    assert m.c_prod.imag == pytest.approx(0.0, abs=1e-18)
    assert m.c_prod.real == pytest.approx(-0.00524807024312219, rel=1e-12)
    assert m.c_re == pytest.approx(math.pi / 10, rel=1e-12)
    assert m.c_im == pytest.approx(-0.5249894842688654, rel=1e-12)


def test_model_requires_unique_maximal_pair():
    h = math.sqrt(3) / 2
    eq = build_polygon_double([(0, 0), (1, 0), (0.5, h)])
    with pytest.raises(ValueError, match="not unique"):
        ladder_model_from_spec(eq)


# ---------------------------------------------------------------------------
# predicted ladder


def test_ladder_unit_coupling_reference():
    # with c_prod = 1 and L0 = pi the k-th zero sits near k with
    # Im = -log(k)/(2 pi)
    m = LadderModel(n=2, L0=math.pi, c_prod=1.0 + 0j)
    lam = predicted_ladder(m, [100])[0]
    assert lam.real == pytest.approx(100.0, abs=2e-3)
    assert lam.imag == pytest.approx(-math.log(100) / TWO_PI, abs=1e-3)


def test_ladder_zeros_satisfy_characteristic_equation(two_cone):
    m = ladder_model_from_spec(two_cone)
    cf = CharFunction(two_cone)
    lams = predicted_ladder(m, np.arange(30, 200, 7))
    vals = cf.values(lams)
    # the two-cone determinant is exactly the one-cycle model
    assert np.max(np.abs(vals)) < 1e-10


def test_ladder_rejects_small_indices():
    m = LadderModel(n=2, L0=math.pi, c_prod=1.0 + 0j)
    with pytest.raises(ValueError):
        predicted_ladder(m, [0])


def test_ladder_in_window(two_cone):
    m = ladder_model_from_spec(two_cone)
    lams = ladder_in_window(m, 50.0, 60.0)
    assert lams.size in (10, 11)
    assert np.all((lams.real >= 50.0) & (lams.real <= 60.0))
    assert np.all(np.diff(lams.real) > 0)


def test_coset_deviations_small_on_ladder(two_cone):
    m = ladder_model_from_spec(two_cone)
    lams = ladder_in_window(m, 100.0, 140.0)
    dev = coset_deviations(lams, m)
    assert np.max(np.abs(dev)) < 5e-3
    # shifting by half a spacing moves the deviation to the coset edge
    dev2 = coset_deviations(lams + 0.5 * m.spacing, m)
    assert np.min(np.abs(np.abs(dev2) - 0.5 * m.spacing)) < 5e-3


# ---------------------------------------------------------------------------
# fitting


def synthetic_ladder(n_points=60, slope=-1.0 / TWO_PI, c_im=0.3, c_re=0.3):
    k = np.arange(n_points)
    x = 100.0 + c_re + k * 1.0
    # impose Im = slope*log|lam| + c_im exactly (fixed point in Im)
    y = np.zeros_like(x)
    for _ in range(40):
        y = slope * np.log(np.hypot(x, y)) + c_im
    return x + 1j * y


def test_fit_recovers_synthetic_string():
    lam = synthetic_ladder()
    rep = fit_log_curve(lam, 2, math.pi)
    assert rep.slope == pytest.approx(-1.0 / TWO_PI, abs=1e-10)
    assert rep.intercept == pytest.approx(0.3, abs=1e-9)
    assert rep.spacing_mean == pytest.approx(1.0, abs=1e-12)
    assert rep.c_re_empirical == pytest.approx(0.3, abs=1e-6)
    assert rep.residual_rms < 1e-10
    assert rep.count == 60


def test_fit_requires_enough_points():
    lam = synthetic_ladder(n_points=5)
    with pytest.raises(InsufficientData):
        fit_log_curve(lam, 2, math.pi)


def test_fit_min_re_filter():
    lam = synthetic_ladder(n_points=40)
    rep = fit_log_curve(lam, 2, math.pi, min_re=120.0)
    assert rep.count == 20
    assert rep.re_range[0] >= 120.0


def test_fit_report_serialization():
    rep = fit_log_curve(synthetic_ladder(), 2, math.pi)
    d = rep.to_dict()
    assert set(d) >= {"slope", "intercept", "spacing_mean", "c_re_empirical"}
    text = rep.to_text()
    assert "slope" in text and "spacing" in text


def test_ladder_stays_accurate_at_high_index(two_cone):
    # the quantization Newton must not stall where rounding noise in
    # 2i*lam*L0 dwarfs any absolute residual floor
    m = ladder_model_from_spec(two_cone)
    cf = CharFunction(two_cone)
    lams = predicted_ladder(m, [3000, 3001, 10000])
    assert np.max(np.abs(cf.values(lams))) < 1e-9
    assert lams[1].real - lams[0].real == pytest.approx(1.0, abs=1e-6)


# ---------------------------------------------------------------------------
# verification of a real scan


def test_verify_scan_two_cone(two_cone):
    m = ladder_model_from_spec(two_cone)
    rs = scan_strip(two_cone, SearchRegion(100.0, 140.0, 0.28, 0.40))
    rep = verify_scan(rs, m)
    assert rep.passed, rep.to_text()
    assert len(rep.checks) == 4
    assert "PASSED" in rep.to_text()
    assert rep.to_dict()["passed"] is True


# ---------------------------------------------------------------------------
# band contours


def test_log_band_path_closes():
    path, nseg = log_band_path(50.0, 80.0, 0.1, 0.3)
    assert path(0.0) == path(float(nseg))
    z = path(0.5)
    assert 50.0 <= z.real <= 80.0


def test_band_winding_counts_enclosed_ladder(two_cone):
    # a band hugging the string (shifted by C_im) catches one zero per
    # spacing; the count must match the enclosed ladder exactly
    m = ladder_model_from_spec(two_cone)
    cf = CharFunction(two_cone)
    # string slope is 1/(2 pi) ~ 0.159; bracket it and shift by C_im
    path, nseg = log_band_path(100.25, 110.25, 0.14, 0.18, im_offset=m.c_im)
    per_seg = int(math.ceil(10.0 * m.L0 * 8.0 / math.pi))
    w = winding_number(cf, path, nseg, per_segment=per_seg)
    assert w == 10


def test_gap_report_two_cone(two_cone):
    m = ladder_model_from_spec(two_cone)
    rep = gap_report(two_cone, (100.0, 120.0))
    assert not rep.gap_band_empty
    assert rep.gap_winding == 0
    # the literal (unshifted) string band misses the string at desk scale:
    # the curve Im = slope*log Re passes above the actual zeros by |C_im|
    assert rep.string_winding == 0
    shifted = gap_report(two_cone, (100.0, 120.0), im_offset=m.c_im)
    assert shifted.string_winding == 20
    assert shifted.string_expected == pytest.approx(20.0)


def test_gap_report_triangle_band_inverted(triangle_345):
    # Lambda = 1/9 < nu0 + delta = 0.12: the nominal gap band is empty
    rep = gap_report(triangle_345, (100.0, 150.0))
    assert rep.gap_band_empty
    assert rep.gap_winding == 0
    assert rep.scales.Lambda == pytest.approx(1 / 9)
    assert rep.eps_prime is not None
    d = rep.to_dict()
    assert d["gap_band_empty"] is True


def test_gap_report_eps_prime_sign(two_cone):
    # two-cone: no two-step refinement, eps' = n - 1 + 1/2 - 2 L0 (Lambda - d)
    rep = gap_report(two_cone, (60.0, 80.0))
    expected = 1.5 - TWO_PI * (1 / math.pi - 0.02)
    assert rep.eps_prime == pytest.approx(expected)
