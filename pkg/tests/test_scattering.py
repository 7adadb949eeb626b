import cmath
import csv
import io
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from erconvert.errors import NoHalfPoint
from erconvert.model import CavityPair
from erconvert.scattering import (
    bandwidth_fwhm,
    efficiency,
    matched_coupling,
    matched_half_width,
    scattering_matrix,
    spectrum,
    unitarity_error,
)

pair = CavityPair.from_kappas


def test_matched_full_conversion():
    cav = pair(3.0, 0.7)
    M = scattering_matrix(matched_coupling(cav), cav, 0.0)
    assert abs(M[0, 1]) == pytest.approx(1, abs=1e-15)
    assert abs(M[1, 0]) == pytest.approx(1, abs=1e-15)
    assert abs(M[0, 0]) < 1e-15 and abs(M[1, 1]) < 1e-15
    assert efficiency(matched_coupling(cav), cav, 0.0) == pytest.approx(1.0, abs=1e-15)


def test_no_coupling_reflects_with_sign_flip():
    M = scattering_matrix(0, pair(2.0, 5.0), 0.0)
    np.testing.assert_allclose(M, [[-1, 0], [0, -1]], atol=1e-15)


def test_equal_kappa_quarter_point():
    k = 4.0
    cav = pair(k, k)
    M = scattering_matrix(k / 2, cav, k / 2)
    assert abs(M[0, 1]) ** 2 == pytest.approx(0.8, rel=1e-14)
    assert abs(M[0, 0]) ** 2 == pytest.approx(0.2, rel=1e-14)
    assert efficiency(k / 2, cav, k / 2) == pytest.approx(0.8, rel=1e-14)


@pytest.mark.parametrize("w", [0.0, 0.3, -7.0, 1e3])
def test_zero_coupling_zero_efficiency(w):
    assert efficiency(0.0, pair(1.0, 2.0), w) == 0.0


def test_matched_coupling_values():
    assert matched_coupling(pair(5.0, 5.0)) == 2.5
    two_pi = 2 * math.pi
    s = matched_coupling(pair(two_pi * 19e6, two_pi * 2.5e6))
    assert s / two_pi == pytest.approx(3.446e6, rel=1e-4)
    assert matched_coupling(pair(1e-300, 1.0)) < 1e-149


def test_reference_cavity_decay_rate(ref_cfg):
    assert ref_cfg.cavities.kappa_a == pytest.approx(2 * math.pi * 19e6, rel=1e-12)


def test_bandwidth_equal_kappa():
    k = 3.0
    cav = pair(k, k)
    assert bandwidth_fwhm(matched_coupling(cav), cav) == pytest.approx(math.sqrt(2) * k, rel=1e-9)


def test_bandwidth_asymptote():
    kb = 1.0
    widths = [bandwidth_fwhm(matched_coupling(pair(r, kb)), pair(r, kb)) for r in (1e2, 1e4, 1e6)]
    errs = [abs(w - 2 * kb) / (2 * kb) for w in widths]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-6


def test_bandwidth_against_quartic(rng):
    for _ in range(20):
        ka, kb = 10 ** rng.uniform(-3, 3, 2)
        w = 0.5 * bandwidth_fwhm(matched_coupling(pair(ka, kb)), pair(ka, kb))
        roots = np.roots([4, 0, (ka - kb) ** 2, 0, -(ka * kb) ** 2])
        ref = max(r.real for r in roots if abs(r.imag) < 1e-9 * abs(r))
        assert w == pytest.approx(ref, rel=1e-9)
        assert w == pytest.approx(matched_half_width(ka, kb), rel=1e-9)


def test_bandwidth_unmatched():
    cav = pair(1.0, 2.0)
    S = 0.3
    fwhm = bandwidth_fwhm(S, cav)
    assert efficiency(S, cav, fwhm / 2) == pytest.approx(0.5 * efficiency(S, cav, 0.0), rel=1e-9)


def test_geometric_mean_is_only_approximate():
    kb = 1.0
    for ratio, tol in ((1.0, 0.5), (10.0, 0.5)):
        cav = pair(ratio * kb, kb)
        fwhm = bandwidth_fwhm(matched_coupling(cav), cav)
        assert abs(math.log(fwhm / math.sqrt(ratio) / kb)) < 1.0
    cav = pair(1e4, kb)
    assert bandwidth_fwhm(matched_coupling(cav), cav) < 0.1 * math.sqrt(1e4) * kb


def test_no_half_point():
    cav = pair(1.0, 1.0)
    with pytest.raises(NoHalfPoint):
        bandwidth_fwhm(0.0 * matched_coupling(cav), cav)


def test_spectrum_matches_point_ops():
    k = 2.0
    cav = pair(k, k)
    S = k / 2
    sp = spectrum(S, cav, [-k / 2, 0.0, k / 2, 5.0])
    for w, m, e in zip(sp.omegas, sp.Smat, sp.eta):
        assert np.array_equal(m, scattering_matrix(S, cav, w))
        assert e == efficiency(S, cav, w)
    np.testing.assert_allclose(sp.eta[:3], [0.8, 1.0, 0.8], rtol=1e-14)
    assert sp.unitary
    sp0 = spectrum(0.0, cav, [0.0])
    np.testing.assert_allclose(np.diag(sp0.Smat[0]), [-1, -1])


def test_spectrum_csv():
    sp = spectrum(0.5, pair(1.0, 1.0), np.linspace(-1, 1, 5))
    buf = io.StringIO()
    sp.write_csv(buf)
    rows = list(csv.reader(io.StringIO(buf.getvalue())))
    assert rows[0] == ["omega_rad_s", "eta", "re_aa", "im_aa", "re_ab", "im_ab",
                       "re_ba", "im_ba", "re_bb", "im_bb"]
    assert len(rows) == 6
    assert float(rows[3][1]) == sp.eta[2]
    assert complex(float(rows[3][4]), float(rows[3][5])) == sp.Smat[2, 0, 1]


kappas = st.floats(1e-3, 1e3)
couplings = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)
omegas = st.floats(-1e4, 1e4)


@settings(max_examples=300, deadline=None)
@given(couplings, kappas, kappas, omegas)
def test_unitarity(S, ka, kb, w):
    M = scattering_matrix(S, pair(ka, kb), w)
    assert unitarity_error(M) <= 1e-10
    # equal in exact arithmetic; the two products round independently
    assert abs(M[0, 1]) == pytest.approx(abs(M[1, 0]), rel=4 * np.finfo(float).eps, abs=1e-300)
    assert 0.0 <= efficiency(S, pair(ka, kb), w) <= 1.0 + 1e-15


@settings(max_examples=200, deadline=None)
@given(st.floats(0, 1e3), st.floats(-math.pi, math.pi), kappas, kappas, omegas)
def test_depends_only_on_magnitude(s, theta, ka, kb, w):
    cav = pair(ka, kb)
    assert efficiency(s * cmath.exp(1j * theta), cav, w) == pytest.approx(efficiency(s, cav, w), rel=1e-13,
                                                                         abs=1e-300)


@settings(max_examples=200, deadline=None)
@given(couplings, kappas, kappas)
def test_symmetric_in_offset(S, ka, kb):
    cav = pair(ka, kb)
    grid = np.linspace(0, 10 * (ka + kb), 41)
    np.testing.assert_allclose(efficiency(S, cav, grid), efficiency(S, cav, -grid), rtol=1e-13, atol=0)


@settings(max_examples=100, deadline=None)
@given(kappas, kappas)
def test_monotone_in_coupling(ka, kb):
    cav = pair(ka, kb)
    sm = matched_coupling(cav)
    below = [efficiency(s, cav, 0.0) for s in np.linspace(0, sm, 50)]
    above = [efficiency(s, cav, 0.0) for s in np.linspace(sm, 50 * sm, 50)]
    assert all(np.diff(below) > 0) and all(np.diff(above) < 0)
    assert efficiency(sm, cav, 0.0) == pytest.approx(1.0, abs=1e-14)
