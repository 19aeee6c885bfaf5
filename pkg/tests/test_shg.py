import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bicshg.dispersion import StructureParams
from bicshg.errors import InvalidRegion, ZetaSingular
from bicshg.flux import bic_constants
from bicshg.oracle import numeric_cubic_roots
from bicshg.shg import (SHCoupling, amplitude_residual, cardano_unique_root,
                        cubic_coefficients, e1_closed_form, sh_coupling,
                        solve_fields, validity, xi_b, zeta_b_estimate, zeta_xi)
from bicshg.siegert import curve_follower, find_bound_state


def small_complex(lo, hi):
    return st.builds(lambda r, t: r * complex(math.cos(t), math.sin(t)),
                     st.floats(lo, hi), st.floats(0, 2 * math.pi))


# near-bound-state magnitudes: |zeta| ~ 1/4, |xi| ~ 4 pi delta0 / kz
ZETA = small_complex(0.15, 0.45)
XI = small_complex(0.01, 0.5)
PHI = st.floats(-0.5, 0.5).filter(lambda x: abs(x) > 1e-6)
NU = st.floats(1e-8, 1e-2)


def test_sh_coupling_identities(p01, bs01):
    c = sh_coupling(bs01.hb, bs01.kb, p01)
    assert c.Sc == pytest.approx((c.alpha2 + c.beta2).imag, rel=1e-8)
    assert c.Ss == pytest.approx((c.alpha2 - c.beta2).imag, rel=1e-8)
    s = c.a + c.b
    assert (s / (1 + s)).imag == pytest.approx(c.Sc, abs=1e-10)
    # the resolvent form is symmetric with the closed-form entries
    H2 = np.array([[c.alpha2, c.beta2], [c.beta2, c.alpha2]])
    M = np.linalg.solve(np.eye(2) - H2, H2)
    assert np.allclose(M, [[c.a, c.b], [c.b, c.a]], atol=1e-13)


def test_zero_operator_gives_zero_coupling():
    c = SHCoupling(0j, 0j, 0j, 0j, 0.0, 0.0)
    with pytest.raises(ZetaSingular):
        zeta_xi(0.26, 6.0, 1.0, c, StructureParams(0.1, 2.0))


def test_sh_coupling_rejects_large_kx():
    with pytest.raises(ValueError):
        sh_coupling(0.3, 5.0, StructureParams(0.1, 2.0, kx=1.6))


def test_xi_limit(p01, bs01):
    c = sh_coupling(bs01.hb, bs01.kb, p01)
    _, xi = zeta_xi(bs01.hb, bs01.kb, 1.0, c, p01)
    assert xi == pytest.approx(xi_b(bs01.kb, p01), rel=1e-14)


def _bic(R):
    p = StructureParams(R, 2.0, 1e-3)
    bs = find_bound_state(1, 1, p)
    return p, bs, bic_constants(bs, p)


def test_psi_estimates():
    """Re{alpha2 + beta2} = 2 + O(delta0), Re{alpha2 - beta2} = O(delta0 log delta0)."""
    for R in (0.02, 0.05, 0.1):
        p, bs, bc = _bic(R)
        c, d0 = bc.coupling, bc.delta0
        assert abs((c.alpha2 + c.beta2).real - 2) < 6 * d0
        assert abs((c.alpha2 - c.beta2).real) < 6 * d0 * abs(math.log(d0))


def test_zeta_b_first_order_estimate():
    """The estimate is accurate to first order; the error shrinks with delta0."""
    errs = []
    for R in (0.01, 0.03, 0.1):
        p, bs, bc = _bic(R)
        err = abs(bc.zeta_b - zeta_b_estimate(bs.hb, bs.kb, p))
        assert err < bc.delta0
        errs.append(err)
    assert errs == sorted(errs)


def test_positivity_condition_near_bound_states():
    for R in (0.01, 0.05, 0.1, 0.15):
        p, bs, bc = _bic(R)
        w = bc.w
        pt = abs(w) ** 2 - 2 * (w * w).real
        assert pt > 0
        if R <= 0.01:
            first_order = 3 * math.pi ** 2 * bc.delta0 ** 2 / bs.kzb ** 2
            assert pt / first_order == pytest.approx(1, abs=0.01)


@given(phi=PHI, nu=NU, zeta=ZETA, xi=XI)
def test_coefficients_real(phi, nu, zeta, xi):
    c = cubic_coefficients(phi, nu, zeta, xi)
    assert all(isinstance(v, float) for v in c)


@given(phi=PHI, nu=NU, zeta=ZETA, xi=XI)
def test_root_matches_numeric_solver(phi, nu, zeta, xi):
    w = zeta * xi
    if abs(w) ** 2 - 2 * (w * w).real < 0:
        return
    res = cardano_unique_root(phi, nu, zeta, xi)
    roots = numeric_cubic_roots(*cubic_coefficients(phi, nu, zeta, xi))
    assert len(roots) == 1
    assert res.X == pytest.approx(roots[0], rel=1e-10)
    assert res.D3 >= 0


@given(phi=PHI, nu=NU, zeta=ZETA, xi=XI)
def test_discriminant_factorization(phi, nu, zeta, xi):
    w = zeta * xi
    aw2, re_w2 = abs(w) ** 2, (w * w).real
    if aw2 - 2 * re_w2 < 0:
        return
    res = cardano_unique_root(phi, nu, zeta, xi)
    direct = 4.0 / 27.0 * res.p ** 3 + res.q ** 2
    assert res.D3 == pytest.approx(direct, rel=1e-8, abs=1e-300)


@given(phi=PHI, nu=NU, zeta=ZETA, xi=XI)
def test_root_is_self_consistent(phi, nu, zeta, xi):
    w = zeta * xi
    if abs(w) ** 2 - 2 * (w * w).real < 0:
        return
    res = cardano_unique_root(phi, nu, zeta, xi)
    rhs = abs(phi / (nu ** 2 * res.X / zeta + phi ** 2 * xi)) ** 2
    assert res.X == pytest.approx(rhs, rel=1e-10)


@given(phi=PHI, nu=NU, zeta=ZETA, xi=XI)
def test_tau_sum_matches_amplitude(phi, nu, zeta, xi):
    w = zeta * xi
    if abs(w) ** 2 - 2 * (w * w).real < 0:
        return
    res = cardano_unique_root(phi, nu, zeta, xi)
    assert res.valid
    # tau+ + tau- = nu^2 X / |phi|^(2/3); the radicals cancel down from terms of
    # size |phi|^(4/3) |w|, so the agreement is absolute on that scale
    tau_exact = nu ** 2 * res.X / abs(phi) ** (2 / 3)
    scale = max(abs(phi) ** (4 / 3) * abs(w), (nu ** 2 * abs(zeta) ** 2) ** (1 / 3))
    assert abs(res.tau_sum - tau_exact) <= 1e-12 * scale
    assert e1_closed_form(phi, nu, res.tau_plus, res.tau_minus) == pytest.approx(
        math.sqrt(abs(phi) ** (2 / 3) * res.tau_sum) / nu)


def test_three_real_roots_is_invalid():
    # w = -1 makes the shifted cubic have three real roots when |zeta| is tiny
    zeta, xi = 1e-3 + 0j, -1000.0 + 0j
    with pytest.raises(InvalidRegion):
        cardano_unique_root(0.3, 1e-2, zeta, xi)
    tau, ok = validity(0.3, 1e-2, zeta, xi)
    assert not ok and math.isnan(tau)


def test_small_nu_limit():
    phi, zeta, xi = 0.05, -0.25 - 0.1j, 0.2j
    res = cardano_unique_root(phi, 1e-9, zeta, xi)
    assert res.E1_abs == pytest.approx(1 / abs(phi * xi), rel=1e-6)


def test_cardano_preconditions():
    with pytest.raises(ValueError):
        cardano_unique_root(0.1, 0.0, -0.25, 0.1j)
    with pytest.raises(ValueError):
        cardano_unique_root(0.0, 1e-3, -0.25, 0.1j)


def test_linear_limit_fields(bs01):
    p = StructureParams(0.1, 2.0, 0.0)
    sol = solve_fields(bs01.hb + 0.01, p)
    assert sol.E2p == 0 and sol.E2m == 0
    assert sol.E1_abs == pytest.approx(1 / abs(sol.phi * sol.xi))


def test_fields_near_bound_state(p01, bs01):
    follow = curve_follower(1, p01)
    ratios, scaled = [], []
    for dh in (1e-2, 1e-3, 1e-4, 1e-5):
        h = bs01.hb + dh
        sol = solve_fields(h, p01, k=follow(h))
        assert sol.valid
        assert amplitude_residual(sol) < 1e-8
        assert sol.E2p == sol.E2m
        assert sol.harmonic_ratio < 0.1
        ratios.append(sol.harmonic_ratio)
        scaled.append(p01.nu ** 2 * sol.E1_abs ** 2 / abs(sol.phi) ** (2 / 3))
    # E2/E1 shrinks towards the bound state; nu^2 |E1|^2 stays O(phi^(2/3))
    assert ratios[-1] < ratios[1] < ratios[0]
    assert max(scaled) < 1.0


def test_bound_state_point_is_extrapolated(p01, bs01):
    sol = solve_fields(bs01.hb, p01, k=bs01.kb)
    assert sol.extrapolated and sol.phi == 0.0
    assert math.isfinite(sol.E1_abs)
    near = solve_fields(bs01.hb + 1e-5, p01)
    assert sol.E1_abs < near.E1_abs


def test_antisymmetric_ratio_is_singular(p01, bs01):
    """mu = -1 cancels the bracket in 1/zeta exactly; flagged, never masked."""
    c = sh_coupling(bs01.hb, bs01.kb, p01)
    with pytest.raises(ZetaSingular):
        zeta_xi(bs01.hb, bs01.kb, -1.0 + 0j, c, p01)
