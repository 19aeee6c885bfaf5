"""Far-field amplitudes, conversion ratios and the second-harmonic optimum.

sigma1 and sigma2 are the fluxes carried by the fundamental and the second
harmonic through the faces z -> +-inf, normalized by the incident flux. No
lateral flux is ever computed: Bloch periodicity cancels it exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dispersion import (DEFAULT_TOL, StructureParams, far_field_coefficients,
                         scattering_phase)
from .errors import ConservationViolation, NotFound, OutsideValidity
from .shg import (NonlinearSolution, SHCoupling, sh_coupling, solve_fields,
                  validity, zeta_xi)
from .siegert import BoundState, curve_follower, kz_of

SUBWAVELENGTH_LIMIT = 0.25
CONSERVATION_SLACK = 1e-6


@dataclass(frozen=True)
class ShAmplitude:
    m: int
    kzm: float
    R: complex
    T: complex


@dataclass(frozen=True)
class FluxReport:
    R0: complex
    T0: complex
    sh_amps: tuple[ShAmplitude, ...]
    sigma1: float
    sigma2: float
    conservation_residual: float
    Cb: float
    Cb_prime: float
    u: float


@dataclass(frozen=True)
class BicConstants:
    """Everything sigma2(u) needs, evaluated at the bound state (phi = 0, mu = 1)."""

    bs: BoundState
    coupling: SHCoupling
    zeta_b: complex
    xi_b: complex
    delta0: float
    Cb: float
    Cb_prime: float

    @property
    def w(self) -> complex:
        return self.zeta_b * self.xi_b

    @property
    def u_opt(self) -> float:
        return abs(self.w)

    @property
    def sigma2_max(self) -> float:
        return sigma2_of_u(self.u_opt, self.Cb_prime, self.zeta_b, self.xi_b)

    @property
    def subwavelength_ok(self) -> bool:
        return self.delta0 < SUBWAVELENGTH_LIMIT


def sh_amplitudes(sol: NonlinearSolution, params: StructureParams) -> list[ShAmplitude]:
    """R_m^sh, T_m^sh for every open second-harmonic channel.

    The dipoles radiating at 2 omega are E2 + nu E1^2 on each array.
    """
    nu = params.nu
    psi_p = sol.E2p + nu * sol.E1p ** 2
    psi_m = sol.E2m + nu * sol.E1m ** 2
    amps = far_field_coefficients(2 * sol.k, 2 * params.kx, sol.h, psi_p, psi_m, params)
    return [ShAmplitude(a.m, a.qzm, a.reflected, a.transmitted) for a in amps]


def sigma2(sol: NonlinearSolution, params: StructureParams) -> float:
    total = 0.0
    for a in sh_amplitudes(sol, params):
        total += a.kzm * (abs(a.R) ** 2 + abs(a.T) ** 2)
    return total / (2 * sol.kz)


def fundamental_amplitudes(sol: NonlinearSolution, params: StructureParams
                           ) -> tuple[complex, complex]:
    """(R0, T0) including the optical-rectification feedback 2 nu E2 conj(E1)."""
    nu = params.nu
    psi_p = sol.E1p + 2 * nu * sol.E2p * sol.E1p.conjugate()
    psi_m = sol.E1m + 2 * nu * sol.E2m * sol.E1m.conjugate()
    (amp,) = [a for a in far_field_coefficients(sol.k, params.kx, sol.h, psi_p, psi_m, params)
              if a.m == 0]
    return amp.reflected, amp.transmitted


def sigma1(sol: NonlinearSolution, params: StructureParams) -> float:
    R0, T0 = fundamental_amplitudes(sol, params)
    return abs(1 + T0) ** 2 + abs(R0) ** 2


def bic_constants(bs: BoundState, params: StructureParams,
                  tol: float = DEFAULT_TOL) -> BicConstants:
    coupling = sh_coupling(bs.hb, bs.kb, params, tol)
    zeta_b, xi_b = zeta_xi(bs.hb, bs.kb, 1.0, coupling, params)
    d0 = scattering_phase(bs.kb, params)
    sum_cos = coupling.Sc / (16 * math.pi * d0)
    Cb = (16 * math.pi * d0) ** 2 / bs.kzb * abs(1 + coupling.a + coupling.b) ** 2 * sum_cos
    return BicConstants(bs, coupling, zeta_b, xi_b, d0, Cb, Cb * abs(zeta_b) ** 2)


def c12_rhs(sol: NonlinearSolution, bc: BicConstants) -> float:
    """1 + 2 (4 pi delta0/kz phi nu |E1+|^2)^2 (Re 1/zeta_b + nu^2 |E1+|^2/|zeta_b|^2)."""
    g = 4 * math.pi * bc.delta0 / bc.bs.kzb
    X = sol.E1_abs ** 2
    nu = sol.nu
    return 1 + 2 * (g * sol.phi * nu * X) ** 2 * ((1 / bc.zeta_b).real
                                                 + nu ** 2 * X / abs(bc.zeta_b) ** 2)


def conservation_check(sol: NonlinearSolution, params: StructureParams,
                       bc: BicConstants) -> float:
    """sigma1 + sigma2 minus the near-bound-state flux balance; raises on excess flux."""
    total = sigma1(sol, params) + sigma2(sol, params)
    if total > 1 + CONSERVATION_SLACK:
        raise ConservationViolation(f"sigma1 + sigma2 = {total!r} > 1")
    rhs = c12_rhs(sol, bc)
    if rhs > 1:
        raise ConservationViolation(f"flux correction {rhs - 1:.3g} is positive")
    return total - rhs


def flux_report(sol: NonlinearSolution, params: StructureParams,
                bc: BicConstants) -> FluxReport:
    R0, T0 = fundamental_amplitudes(sol, params)
    s1 = abs(1 + T0) ** 2 + abs(R0) ** 2
    s2 = sigma2(sol, params)
    u = (sol.nu * sol.E1_abs / sol.phi) ** 2 if sol.phi else math.inf
    return FluxReport(R0, T0, tuple(sh_amplitudes(sol, params)), s1, s2,
                      s1 + s2 - c12_rhs(sol, bc), bc.Cb, bc.Cb_prime, u)


def ab_bracket(a: complex, b: complex) -> float:
    """2 Im{(a+b)/(1+a+b)} |1+a+b|^2 - 2 Im{a+b}, which vanishes identically.

    It is the coefficient of the would-be leading flux defect; its vanishing
    makes the conversion ratios add up to one at leading order.
    """
    s = a + b
    return 2 * (s / (1 + s)).imag * abs(1 + s) ** 2 - 2 * s.imag


def sigma2_of_u(u: float, Cb_prime: float, zeta_b: complex, xi_b: complex) -> float:
    """Principal part C'_b u / |u + zeta_b xi_b|^2, maximal at u = |zeta_b xi_b|."""
    if u < 0:
        raise ValueError("u must be non-negative")
    return Cb_prime * u / abs(u + zeta_b * xi_b) ** 2


def sigma2_principal(sol: NonlinearSolution, bc: BicConstants) -> float:
    """C_b nu^2 |E1+|^4."""
    return bc.Cb * sol.nu ** 2 * sol.E1_abs ** 4


@dataclass(frozen=True)
class OptimalDistance:
    phi_opt: float
    h_minus: float
    h_plus: float
    dh_leading: float
    condition_residual: float
    tau_sum_minus: float
    tau_sum_plus: float

    @property
    def h_opt(self) -> tuple[float, float]:
        return self.h_minus, self.h_plus


def optimal_phi(bc: BicConstants, nu: float) -> float:
    """|phi| solving nu^2 / phi^4 = 2 |xi_b|^2 (|w| + Re w)."""
    w = bc.w
    return (nu ** 2 / (2 * abs(bc.xi_b) ** 2 * (abs(w) + w.real))) ** 0.25


def leading_order_dh(bs: BoundState, params: StructureParams) -> float:
    """|h - hb| from (h - hb)^4 = chi^2 / (8 pi^5 kzb (kb R)^6 (eps - 1)^5)."""
    val = params.chi_c ** 2 / (8 * math.pi ** 5 * bs.kzb * (bs.kb * params.R) ** 6
                               * (params.eps_c - 1) ** 5)
    return val ** 0.25


def optimal_distance(bs: BoundState, params: StructureParams,
                     bc: BicConstants | None = None,
                     tol: float = DEFAULT_TOL) -> OptimalDistance:
    """Distances on both sides of hb where u = |zeta_b xi_b|.

    phi = cos(h kz(k_r(h))) is inverted along the resonance curve; near hb it
    behaves as (-1)^n kzb (h - hb).
    """
    if params.chi_c <= 0:
        raise ValueError("chi_c must be positive")
    if bc is None:
        bc = bic_constants(bs, params, tol)
    phi_opt = optimal_phi(bc, params.nu)
    dh0 = phi_opt / bs.kzb
    follow = curve_follower(1, params, tol)
    hs = []
    for side in (-1, 1):
        target = (-1) ** bs.n * side * phi_opt

        def g(h):
            return math.cos(h * kz_of(follow(h), params)) - target

        a = bs.hb
        b = bs.hb + side * dh0
        for _ in range(40):
            if g(a) * g(b) <= 0:
                break
            a, b = b, b + side * dh0
        else:
            raise NotFound("could not bracket the optimal distance")
        lo, hi = sorted((a, b))
        hs.append(brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps))
    taus = []
    resid = 0.0
    for h in hs:
        k = follow(h)
        kz = kz_of(k, params)
        phi = math.cos(h * kz)
        coupling = sh_coupling(h, k, params, tol)
        zeta, xi = zeta_xi(h, k, 1.0, coupling, params)
        tau, ok = validity(phi, params.nu, zeta, xi)
        if not ok:
            raise OutsideValidity(f"optimum h={h} violates tau+ + tau- >= 0")
        taus.append(tau)
        w = bc.w
        lhs = params.nu ** 2 / phi ** 4
        rhs = 2 * abs(bc.xi_b) ** 2 * (abs(w) + w.real)
        resid = max(resid, abs(lhs - rhs) / rhs)
    return OptimalDistance(phi_opt, hs[0], hs[1], leading_order_dh(bs, params), resid,
                           taus[0], taus[1])


@dataclass(frozen=True)
class EfficiencyEstimates:
    sigma2max_exact: float
    sigma2max_leading: float
    sigma2max_m0: float
    delta0_kb: float

    @property
    def subwavelength_ok(self) -> bool:
        return self.delta0_kb < SUBWAVELENGTH_LIMIT


def efficiency_estimates(bs: BoundState, params: StructureParams,
                         bc: BicConstants | None = None) -> EfficiencyEstimates:
    """Exact principal-part optimum next to its leading-order estimates.

    leading: 8 pi delta0 sum_m cos^2(hb kz_m)/kz_m over open SH channels;
    m0: the m = 0 term alone, kb^2 pi R^2 (eps - 1) / kzb.
    """
    if bc is None:
        bc = bic_constants(bs, params)
    leading = bc.coupling.Sc / 2
    m0 = bs.kb ** 2 * math.pi * params.R ** 2 * (params.eps_c - 1) / bs.kzb
    return EfficiencyEstimates(bc.sigma2_max, leading, m0, bc.delta0)


def sigma2_along_curve(h: float, params: StructureParams, k: float | None = None,
                       tol: float = DEFAULT_TOL) -> float:
    return sigma2(solve_fields(h, params, k=k, tol=tol), params)
