import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bicshg import _kernels_py
from bicshg.dispersion import (TWO_PI, StructureParams, alpha, beta, channel_set,
                               check_threshold, coupling_matrix,
                               far_field_coefficients, open_channels, qz,
                               scattering_phase)
from bicshg.errors import ThresholdProximity
from bicshg.oracle import alpha_reference, beta_reference

P = StructureParams(0.1, 2.0)

# reference values from the digamma/Hurwitz-zeta route (oracle.alpha_reference, M = 20000)
FROZEN_ALPHA = {
    (6.0, 0.0): 0.61914816679945 + 0.09424777960769382j,
    (5.0, 0.5): 0.22541191488673815 + 0.07893548542495692j,
    (12.2, 0.0): 1.2948606457836511 + 0.6387705819476582j,
    (3.3, 1.1): 0.06875194223736049 + 0.054980676359709796j,
}
FROZEN_BETA_H026 = {
    (6.0, 0.0): 0.2282168438571479 - 0.09422580929223803j,
    (5.0, 0.5): -0.0036686194233393043 - 0.06710288386291767j,
    (12.2, 0.0): 0.647175255704412 + 0.48798282762879086j,
    (3.3, 1.1): -0.04866325642119298 - 0.0025866547614691203j,
}


def test_scattering_phase():
    assert scattering_phase(2 * math.pi, P) == pytest.approx((0.2 * math.pi) ** 2 / 4)
    assert scattering_phase(0.0, P) == 0.0
    with pytest.raises(ValueError):
        scattering_phase(-1.0, P)


def test_params_validation():
    for bad in (dict(R=0.0, eps_c=2), dict(R=0.6, eps_c=2), dict(R=0.1, eps_c=1.0),
                dict(R=0.1, eps_c=2, chi_c=-1), dict(R=0.1, eps_c=2, kx=4.0)):
        with pytest.raises(ValueError):
            StructureParams(**bad)
    assert P.nu == 0.0
    assert P.replace(chi_c=4 * math.pi).nu == pytest.approx(1.0)


def test_qz_two_case_rule():
    assert qz(5.0, 3.0) == 4.0
    assert qz(3.0, 5.0) == 4.0j
    assert qz(3.0, -5.0) == 4.0j
    assert qz(1.0, 1.0) == 0.0


def test_threshold_guard():
    with pytest.raises(ThresholdProximity):
        check_threshold(TWO_PI - 1e-8, 0.0)
    with pytest.raises(ThresholdProximity):
        alpha(TWO_PI + 1e-9, 0.0, P)
    check_threshold(TWO_PI - 1e-3, 0.0)


def test_channel_bookkeeping():
    cs = channel_set(6.0, 0.0, 3)
    assert len(cs) == 7
    assert [c.m for c in cs.open_channels] == [0]
    # second harmonic with kx < pi/2: exactly m = 0, +-1 open
    for kx in (0.0, 0.4, 1.5):
        k = TWO_PI - kx - 0.05
        assert [c.m for c in open_channels(2 * k, 2 * kx)] == [-1, 0, 1]


@pytest.mark.parametrize("key", sorted(FROZEN_ALPHA))
def test_alpha_frozen(key):
    assert abs(alpha(*key, P) - FROZEN_ALPHA[key]) < 1e-10


@pytest.mark.parametrize("key", sorted(FROZEN_BETA_H026))
def test_beta_frozen(key):
    assert abs(beta(*key, 0.26, P) - FROZEN_BETA_H026[key]) < 1e-10


@given(q=st.floats(0.5, 12.5), qx=st.floats(0.0, 1.5))
def test_alpha_matches_reference(q, qx):
    try:
        check_threshold(q, qx, 1e-3)
    except ThresholdProximity:
        return
    assert abs(alpha(q, qx, P) - alpha_reference(q, qx, P, M=3000)) < 1e-9


@given(q=st.floats(0.5, 12.5), qx=st.floats(0.0, 1.5), h=st.floats(0.05, 2.0))
def test_beta_matches_reference(q, qx, h):
    try:
        check_threshold(q, qx, 1e-3)
    except ThresholdProximity:
        return
    assert abs(beta(q, qx, h, P) - beta_reference(q, qx, h, P, M=300)) < 1e-9


@given(q=st.floats(0.5, 12.5), qx=st.floats(0.0, 1.5), h=st.floats(0.05, 2.0))
def test_imaginary_parts_are_open_channel_sums(q, qx, h):
    try:
        check_threshold(q, qx, 1e-3)
    except ThresholdProximity:
        return
    d0 = scattering_phase(q, P)
    chans = open_channels(q, qx)
    im_a = 2 * math.pi * d0 * sum(1 / c.qzm.real for c in chans)
    im_b = 2 * math.pi * d0 * sum(math.cos(2 * h * c.qzm.real) / c.qzm.real for c in chans)
    assert alpha(q, qx, P).imag == pytest.approx(im_a, abs=1e-12)
    assert beta(q, qx, h, P).imag == pytest.approx(im_b, abs=1e-10)


@given(q=st.floats(0.5, 6.2), qx=st.floats(0.01, 1.0))
def test_alpha_even_in_qx(q, qx):
    try:
        check_threshold(q, qx, 1e-3)
    except ThresholdProximity:
        return
    assert abs(alpha(q, qx, P) - alpha(q, -qx, P)) < 1e-11


@given(k=st.floats(0.3, 6.2), h=st.floats(0.05, 1.5))
def test_linear_unitarity(k, h):
    """One open channel, chi = 0: |1 + T0|^2 + |R0|^2 = 1."""
    try:
        check_threshold(k, 0.0, 1e-3)
    except ThresholdProximity:
        return
    H = coupling_matrix(k, 0.0, h, P)
    src = np.array([cmath.exp(1j * h * k), cmath.exp(-1j * h * k)])
    E = np.linalg.solve(np.eye(2) - H.matrix(), src)
    (amp,) = far_field_coefficients(k, 0.0, h, E[0], E[1], P)
    assert abs(1 + amp.transmitted) ** 2 + abs(amp.reflected) ** 2 == pytest.approx(1, abs=1e-8)


def test_coupling_matrix_structure():
    H = coupling_matrix(6.0, 0.0, 0.3, P)
    m = H.matrix()
    assert m[0, 0] == m[1, 1] and m[0, 1] == m[1, 0]
    assert H.det_one_minus() == pytest.approx(np.linalg.det(np.eye(2) - m))
    a, b = H.apply(1.0, 0.0)
    assert (a, b) == (H.alpha, H.beta)


def test_beta_requires_positive_h():
    with pytest.raises(ValueError):
        beta(6.0, 0.0, 0.0, P)


def test_tail_bound_is_honoured():
    """Tighter tolerances move the value by less than the looser tolerance."""
    v1, _ = _kernels_py.alpha_closed_sum(6.0, 0.3, 1e-6)
    v2, _ = _kernels_py.alpha_closed_sum(6.0, 0.3, 1e-13)
    assert abs(v1 - v2) < 1e-6
