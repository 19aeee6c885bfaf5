"""Non-perturbative fundamental/second-harmonic fields near an even bound state.

Along the even resonance curve k = k_r(h) the cylinder fields obey

    E1+ = -phi / (nu^2 |E1+|^2 / zeta + phi^2 xi),    phi = cos(h kz),

whose modulus squared is a cubic in X = |E1+|^2 with a single real root.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import (DEFAULT_TOL, StructureParams, coupling_matrix,
                         open_channels, scattering_phase)
from .errors import (InvalidRegion, NegativeDiscriminant,
                     SecondHarmonicResonance, ZetaSingular)
from .siegert import kz_of, resonance_k

SH_DET_THRESHOLD = 1e-10
ZETA_THRESHOLD = 1e-14
PHI_ZERO = 1e-12       # |phi| below this is treated as the bound state itself


@dataclass(frozen=True)
class SHCoupling:
    """Second-harmonic response at (2k, 2kx): [1 - H2]^-1 H2 = [[a, b], [b, a]]."""

    a: complex
    b: complex
    alpha2: complex
    beta2: complex
    Sc: float
    Ss: float


@dataclass(frozen=True)
class CardanoResult:
    X: float            # |E1+|^2, Newton-polished root of the cubic
    X_closed: float     # the same root straight from the radical formula
    E1_abs: float
    D3: float
    p: float
    q: float
    tau_plus: float
    tau_minus: float

    @property
    def tau_sum(self) -> float:
        return self.tau_plus + self.tau_minus

    @property
    def valid(self) -> bool:
        return self.tau_sum >= 0


@dataclass(frozen=True)
class NonlinearSolution:
    h: float
    k: float
    kz: float
    phi: float
    nu: float
    mu: complex
    zeta: complex
    xi: complex
    E1_abs: float
    E1p: complex
    E1m: complex
    E2p: complex
    E2m: complex
    valid: bool
    tau_plus: float
    tau_minus: float
    D3: float
    coupling: SHCoupling
    extrapolated: bool = False

    @property
    def harmonic_ratio(self) -> float:
        """max |E2+-| / |E1+|, small near the bound state."""
        if self.E1_abs == 0:
            return 0.0
        return max(abs(self.E2p), abs(self.E2m)) / self.E1_abs


def sh_channel_sums(h: float, k: float, params: StructureParams) -> tuple[float, float]:
    """(Sc, Ss): 16 pi delta0(k) sum over open SH channels of cos^2 and sin^2 of h kz_m / kz_m."""
    d0 = scattering_phase(k, params)
    sc = ss = 0.0
    for ch in open_channels(2 * k, 2 * params.kx):
        kzm = ch.qzm.real
        sc += math.cos(h * kzm) ** 2 / kzm
        ss += math.sin(h * kzm) ** 2 / kzm
    return 16 * math.pi * d0 * sc, 16 * math.pi * d0 * ss


def sh_coupling(h: float, k: float, params: StructureParams,
                tol: float = DEFAULT_TOL) -> SHCoupling:
    if params.kx >= math.pi / 2:
        raise ValueError("second-harmonic runs need kx < pi/2 (open set m = 0, +-1)")
    h2 = coupling_matrix(2 * k, 2 * params.kx, h, params, tol)
    al, be = h2.alpha, h2.beta
    det = (1 - al) ** 2 - be ** 2
    if abs(det) < SH_DET_THRESHOLD:
        raise SecondHarmonicResonance(f"|det(1 - H2)| = {abs(det):.3g} at h={h}, k={k}")
    a = ((1 - al) * al + be * be) / det
    b = be / det
    sc, ss = sh_channel_sums(h, k, params)
    return SHCoupling(a, b, al, be, sc, ss)


def zeta_xi(h: float, k: float, mu: complex, coupling: SHCoupling,
            params: StructureParams) -> tuple[complex, complex]:
    kz = kz_of(k, params)
    d0 = scattering_phase(k, params)
    phi = math.cos(h * kz)
    a, b = coupling.a, coupling.b
    xi = 1j * 2 * math.pi * d0 / kz * (1 + mu)
    inv_zeta = ((1 + 1j * 4 * math.pi * d0 / kz * phi ** 2)
                * (a + b * mu ** 2 + mu.conjugate() * (b + a * mu ** 2)))
    if abs(inv_zeta) < ZETA_THRESHOLD:
        raise ZetaSingular(f"|1/zeta| = {abs(inv_zeta):.3g} at h={h}")
    return 1 / inv_zeta, xi


def cubic_coefficients(phi: float, nu: float, zeta: complex, xi: complex
                       ) -> tuple[float, float, float]:
    """(c2, c1, c0) of X^3 + c2 X^2 + c1 X + c0 = 0 for X = |E1+|^2."""
    w = zeta * xi
    r2 = (phi / nu) ** 2
    return 2 * r2 * w.real, r2 * r2 * abs(w) ** 2, -r2 / nu ** 2 * abs(zeta) ** 2


def _polish(X0, c2, c1, c0, iters=60):
    # Newton on the monic cubic, safeguarded by a sign bracket [lo, hi]
    f = lambda x: ((x + c2) * x + c1) * x + c0
    lo, hi = 0.0, max(X0, 1e-300)
    while f(hi) < 0:
        lo, hi = hi, hi * 2 + 1.0
    x = min(max(X0, lo), hi)
    for _ in range(iters):
        fx = f(x)
        if fx == 0:
            return x
        if fx < 0:
            lo = max(lo, x)
        else:
            hi = min(hi, x)
        d = (3 * x + 2 * c2) * x + c1
        x_new = x - fx / d if d != 0 else 0.5 * (lo + hi)
        if not lo <= x_new <= hi:
            x_new = 0.5 * (lo + hi)
        if abs(x_new - x) <= 4e-16 * abs(x_new) or hi - lo <= 4e-16 * hi:
            return x_new
        x = x_new
    return x


def _cube_root_pair(c, m, prod):
    """Real cube roots of (c + m)/2 and (c - m)/2, larger-magnitude one first.

    ``prod`` is their known product, used to form the smaller root stably.
    """
    big = float(np.cbrt(0.5 * (c + math.copysign(m, c))))
    if big == 0.0:
        return 0.0, float(np.cbrt(0.5 * (c - math.copysign(m, c))))
    return big, prod / big


def cardano_unique_root(phi: float, nu: float, zeta: complex, xi: complex) -> CardanoResult:
    """Unique real root of the amplitude cubic by the radical formula.

    Raises InvalidRegion when tau+ + tau- < 0 (or when the cubic has three
    real roots) and NegativeDiscriminant if D3 < 0 contradicts its
    factorized form.
    """
    if not nu > 0:
        raise ValueError("nu must be positive")
    if phi == 0:
        raise ValueError("phi must be nonzero; use the bound-state limit")
    w = zeta * xi
    r = w.real
    aw2 = abs(w) ** 2
    re_w2 = (w * w).real
    zeta2 = abs(zeta) ** 2
    pt = aw2 - 2 * re_w2
    p = phi ** 4 / (3 * nu ** 4) * pt
    q = 2 * phi ** 6 / (27 * nu ** 6) * r * (4 * re_w2 - 5 * aw2) - phi ** 2 / nu ** 4 * zeta2
    d3_direct = 4.0 / 27.0 * p ** 3 + q * q
    re_rho = 4.0 / 27.0 * 2 * r * (2 * re_w2 - 2.5 * aw2)
    A = nu ** 2 * zeta2
    if pt >= 0:
        rho = complex(re_rho, 4.0 / 27.0 * pt ** 1.5)
        mod = abs(A - 0.5 * phi ** 4 * rho)
        d3 = phi ** 4 / nu ** 12 * mod * mod
        if d3_direct < -1e-12 * max(abs(q * q), 1.0):
            raise NegativeDiscriminant(f"D3 = {d3_direct:.3g} while |.|^2 form gives {d3:.3g}")
    else:
        d3 = d3_direct
        if d3 < 0:
            raise InvalidRegion("cubic has three real roots (D3 < 0)")
        mod = nu ** 6 * math.sqrt(d3) / phi ** 2
    sd = math.sqrt(d3)
    # the two cube roots multiply to -p/3; taking the smaller one from that
    # product avoids the cancellation in (-q -+ sqrt(D3)) / 2
    s_big, s_small = _cube_root_pair(-q, sd, -p / 3)
    X_closed = float(s_big + s_small - 2.0 / 3.0 * (phi / nu) ** 2 * r)
    shift = abs(phi) ** (4.0 / 3.0) / 3.0 * r
    c = A - 0.5 * phi ** 4 * re_rho
    t_big, t_small = _cube_root_pair(c, mod, -abs(phi) ** (8.0 / 3.0) * pt / 9)
    t_p, t_m = (t_big, t_small) if c >= 0 else (t_small, t_big)
    tau_p, tau_m = t_p - shift, t_m - shift
    if tau_p + tau_m < 0:
        raise InvalidRegion(f"tau+ + tau- = {tau_p + tau_m:.3g} < 0")
    c2, c1, c0 = cubic_coefficients(phi, nu, zeta, xi)
    X = _polish(X_closed, c2, c1, c0)
    return CardanoResult(X, X_closed, math.sqrt(X), d3, p, q, tau_p, tau_m)


def validity(phi: float, nu: float, zeta: complex, xi: complex) -> tuple[float, bool]:
    """(tau+ + tau-, valid) without raising; tau sum is nan when undefined."""
    if phi == 0:
        return float(np.cbrt(nu ** 2 * abs(zeta) ** 2)), True
    try:
        res = cardano_unique_root(phi, nu, zeta, xi)
    except InvalidRegion:
        return float("nan"), False
    return res.tau_sum, res.valid


def e1_closed_form(phi: float, nu: float, tau_plus: float, tau_minus: float) -> float:
    """|E1+| = |phi|^(1/3) / nu * sqrt(tau+ + tau-)."""
    return abs(phi) ** (1.0 / 3.0) / nu * math.sqrt(tau_plus + tau_minus)


def fields_from_amplitude(E1p: complex, mu: complex, nu: float, coupling: SHCoupling):
    """(E1-, E2+, E2-) from E1+ and the field ratio mu = E1- / E1+."""
    E1m = mu * E1p
    a, b = coupling.a, coupling.b
    E2p = nu * (a * E1p ** 2 + b * E1m ** 2)
    E2m = nu * (b * E1p ** 2 + a * E1m ** 2)
    return E1m, E2p, E2m


def solve_fields(h: float, params: StructureParams, mu_limit: complex = 1.0,
                 k: float | None = None, tol: float = DEFAULT_TOL) -> NonlinearSolution:
    """Cylinder fields at (h, k_r(h)) on the even resonance curve.

    mu is frozen at its bound-state limit (1 for the even branch). Exactly at
    phi = 0 the cubic degenerates; the fields are then extrapolated linearly
    in h from two points on the curve just above the bound state.
    """
    mu = complex(mu_limit)
    if k is None:
        k = resonance_k(h, 1, params, tol=tol)
    kz = kz_of(k, params)
    phi = math.cos(h * kz)
    coupling = sh_coupling(h, k, params, tol)
    zeta, xi = zeta_xi(h, k, mu, coupling, params)
    nu = params.nu
    if abs(phi) < PHI_ZERO:
        return _phi_zero_limit(h, k, kz, params, mu, zeta, xi, coupling, tol)
    if nu == 0:
        E1p = -1 / (phi * xi)
        E1m, E2p, E2m = fields_from_amplitude(E1p, mu, nu, coupling)
        return NonlinearSolution(h, k, kz, phi, nu, mu, zeta, xi, abs(E1p), E1p, E1m,
                                 E2p, E2m, True, math.nan, math.nan, math.nan, coupling)
    res = cardano_unique_root(phi, nu, zeta, xi)
    E1p = -phi / (nu ** 2 * res.X / zeta + phi ** 2 * xi)
    E1m, E2p, E2m = fields_from_amplitude(E1p, mu, nu, coupling)
    return NonlinearSolution(h, k, kz, phi, nu, mu, zeta, xi, res.E1_abs, E1p, E1m,
                             E2p, E2m, res.valid, res.tau_plus, res.tau_minus, res.D3,
                             coupling)


LIMIT_OFFSETS = (1e-4, 1e-5)


def _phi_zero_limit(h, k, kz, params, mu, zeta, xi, coupling, tol):
    if params.nu == 0:
        raise ValueError("the linear problem has no finite limit at phi = 0")
    samples = []
    for dh in LIMIT_OFFSETS:
        kk = resonance_k(h + dh, 1, params, (k - 1e-3, min(k + 1e-3, params.threshold - 2e-6)),
                         tol)
        samples.append(solve_fields(h + dh, params, mu, k=kk, tol=tol))
    (d1, d2), (s1, s2) = LIMIT_OFFSETS, samples

    def lin(a, b):
        return b - d2 * (a - b) / (d1 - d2)

    E1p = lin(s1.E1p, s2.E1p)
    E1m, E2p, E2m = fields_from_amplitude(E1p, mu, params.nu, coupling)
    tau, _ = validity(0.0, params.nu, zeta, xi)
    return NonlinearSolution(h, k, kz, 0.0, params.nu, mu, zeta, xi, abs(E1p), E1p, E1m,
                             E2p, E2m, True, tau, 0.0, 0.0, coupling, extrapolated=True)


def amplitude_residual(sol: NonlinearSolution) -> float:
    """|E1+ + phi / (nu^2 |E1+|^2 / zeta + phi^2 xi)| relative to |E1+|."""
    rhs = -sol.phi / (sol.nu ** 2 * sol.E1_abs ** 2 / sol.zeta + sol.phi ** 2 * sol.xi)
    return abs(sol.E1p - rhs) / max(abs(sol.E1p), 1e-300)


def zeta_b_estimate(hb: float, kb: float, params: StructureParams) -> complex:
    """First-order estimate -1/4 - 2 pi i delta0 sum cos^2(h kz_m)/kz_m."""
    sc, _ = sh_channel_sums(hb, kb, params)
    return -0.25 - 1j * sc / 8.0


def xi_b(kb: float, params: StructureParams) -> complex:
    return 1j * 4 * math.pi * scattering_phase(kb, params) / kz_of(kb, params)


__all__ = [
    "SHCoupling", "CardanoResult", "NonlinearSolution", "sh_coupling", "zeta_xi",
    "cubic_coefficients", "cardano_unique_root", "validity", "solve_fields",
    "e1_closed_form", "fields_from_amplitude", "amplitude_residual", "sh_channel_sums",
    "zeta_b_estimate", "xi_b",
]
