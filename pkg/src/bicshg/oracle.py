"""Brute-force validators, deliberately independent of the closed forms.

None of these are used by the production path; tests compare against them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar, root
from scipy.special import digamma, zeta as hurwitz_zeta

from .dispersion import (TWO_PI, StructureParams, coupling_matrix, qz,
                         scattering_phase)
from .errors import NoConvergence
from .flux import sigma2
from .shg import solve_fields
from .siegert import BoundState, curve_follower, kz_of


@dataclass(frozen=True)
class OracleConfig:
    max_iter: int = 2000
    damping: float = 0.5
    tol: float = 1e-12
    homotopy_steps: int = 24
    sweep_points: int = 81

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not 0 < self.damping <= 1:
            raise ValueError("damping must lie in (0, 1]")


@dataclass(frozen=True)
class CoupledFields:
    E1p: complex
    E1m: complex
    E2p: complex
    E2m: complex
    residual: float
    iterations: int
    method: str

    @property
    def mu(self) -> complex:
        return self.E1m / self.E1p


# ---------------------------------------------------------------- 2x2 system

class _System:
    """Residuals of the two matrix equations on the cylinder axes."""

    def __init__(self, h, k, params):
        self.nu = params.nu
        kz = kz_of(k, params)
        self.H1 = coupling_matrix(k, params.kx, h, params).matrix()
        self.H2 = coupling_matrix(2 * k, 2 * params.kx, h, params).matrix()
        self.src = np.array([np.exp(1j * h * kz), np.exp(-1j * h * kz)])
        self.I = np.eye(2)

    def residual(self, E1, E2, nu):
        r1 = (self.I - self.H1) @ E1 - 2 * nu * self.H1 @ (E1.conj() * E2) - self.src
        r2 = (self.I - self.H2) @ E2 - nu * self.H2 @ (E1 * E1)
        return np.concatenate([r1, r2])

    def rel_residual(self, E1, E2, nu):
        return float(np.max(np.abs(self.residual(E1, E2, nu))) / max(np.max(np.abs(E1)), 1.0))

    def e2_of(self, E1, nu):
        return np.linalg.solve(self.I - self.H2, nu * self.H2 @ (E1 * E1))

    def fixed_point_map(self, E1, nu):
        E2 = self.e2_of(E1, nu)
        rhs = self.src + 2 * nu * self.H1 @ (E1.conj() * E2)
        return np.linalg.solve(self.I - self.H1, rhs), E2


def _pack(E1, E2):
    z = np.concatenate([E1, E2])
    return np.concatenate([z.real, z.imag])


def _unpack(x):
    z = x[:4] + 1j * x[4:]
    return z[:2], z[2:]


def _newton(system, E1, E2, nu, tol):
    scale = max(np.max(np.abs(E1)), 1.0)

    def f(x):
        a, b = _unpack(x * scale)
        r = system.residual(a, b, nu) / scale
        return np.concatenate([r.real, r.imag])

    sol = root(f, _pack(E1, E2) / scale, method="hybr", options={"xtol": 1e-15})
    a, b = _unpack(sol.x * scale)
    return a, b, system.rel_residual(a, b, nu)


def iterate_coupled_system(h: float, k: float, params: StructureParams,
                           cfg: OracleConfig = OracleConfig(),
                           guess: tuple[complex, complex] | None = None) -> CoupledFields:
    """Solve both matrix equations for (E1+, E1-, E2+, E2-) without reduction.

    Damped fixed-point iteration first; on stall, Newton (MINPACK hybrid)
    continued in nu from the linear solution.
    """
    system = _System(h, k, params)
    nu = params.nu
    E1 = np.linalg.solve(system.I - system.H1, system.src)
    if nu == 0:
        return CoupledFields(E1[0], E1[1], 0j, 0j, system.rel_residual(E1, 0 * E1, 0.0),
                             0, "linear")
    if guess is not None:
        E1 = np.array(guess, dtype=complex)

    # damped fixed point
    x = E1.copy()
    for it in range(1, cfg.max_iter + 1):
        new, E2 = system.fixed_point_map(x, nu)
        if not np.all(np.isfinite(new)):
            break
        x = (1 - cfg.damping) * x + cfg.damping * new
        if system.rel_residual(x, system.e2_of(x, nu), nu) < cfg.tol:
            E2 = system.e2_of(x, nu)
            return CoupledFields(x[0], x[1], E2[0], E2[1],
                                 system.rel_residual(x, E2, nu), it, "fixed-point")
        if np.max(np.abs(x)) > 1e30:
            break

    # Newton with homotopy in nu
    E1 = np.linalg.solve(system.I - system.H1, system.src) if guess is None else \
        np.array(guess, dtype=complex)
    E2 = system.e2_of(E1, 0.0)
    nus = nu * np.geomspace(1e-6, 1.0, cfg.homotopy_steps) if guess is None else [nu]
    res = math.inf
    for nu_j in nus:
        E1, E2, res = _newton(system, E1, E2, nu_j, cfg.tol)
    if not res < cfg.tol:
        raise NoConvergence(f"coupled system residual {res:.3g} at h={h}, k={k}")
    return CoupledFields(E1[0], E1[1], E2[0], E2[1], res, len(nus), "newton")


# ---------------------------------------------------------------- cubic roots

def _bisect(f, a, b, iters=400):
    fa = f(a)
    for _ in range(iters):
        m = 0.5 * (a + b)
        if m == a or m == b:
            break
        fm = f(m)
        if fm == 0:
            return m
        if (fm < 0) == (fa < 0):
            a, fa = m, fm
        else:
            b = m
    return 0.5 * (a + b)


def numeric_cubic_roots(c2: float, c1: float, c0: float) -> list[float]:
    """All real roots of X^3 + c2 X^2 + c1 X + c0, sorted, by bisection.

    The real line is split at the stationary points of the cubic; each
    monotone piece inside the Cauchy bound holds at most one root. A stationary
    point where the cubic vanishes to working precision is a double root.
    """
    f = lambda x: ((x + c2) * x + c1) * x + c0
    bound = 1.0 + max(abs(c2), abs(c1), abs(c0))
    disc = c2 * c2 - 3 * c1
    crit = []
    if disc >= 0:
        sd = math.sqrt(disc)
        crit = sorted({(-c2 - sd) / 3, (-c2 + sd) / 3})
    knots = [-bound] + crit + [bound]
    size = lambda x: abs(x) ** 3 + abs(c2) * x * x + abs(c1 * x) + abs(c0)
    roots = []
    for x in crit:
        if abs(f(x)) <= 64 * np.finfo(float).eps * size(x):
            roots.append(x)
    for a, b in zip(knots[:-1], knots[1:]):
        fa, fb = f(a), f(b)
        if fa == 0:
            roots.append(a)
        elif (fa < 0) != (fb < 0) and fb != 0:
            roots.append(_bisect(f, a, b))
    if f(bound) == 0:
        roots.append(bound)
    out = []
    for r in sorted(roots):
        if not out or abs(r - out[-1]) > 1e-7 * max(1.0, abs(r)):
            out.append(r)
    return out


# ---------------------------------------------------------------- sweeps

def sweep_argmax_sigma2(bs: BoundState, params: StructureParams,
                        h_window: tuple[float, float], n_points: int = 81
                        ) -> tuple[float, float]:
    """Maximize sigma2(h) along the even resonance curve over one window.

    Grid search followed by a bounded scalar refinement around the best cell.
    The window must lie on one side of hb.
    """
    lo, hi = h_window
    if lo < bs.hb < hi:
        raise ValueError("window must exclude the bound state")
    follow = curve_follower(1, params)

    def s2(h):
        return sigma2(solve_fields(h, params, k=follow(h)), params)

    hs = np.linspace(lo, hi, n_points)
    vals = np.array([s2(float(h)) for h in hs])
    i = int(np.argmax(vals))
    a = hs[max(i - 1, 0)]
    b = hs[min(i + 1, n_points - 1)]
    res = minimize_scalar(lambda h: -s2(h), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12 * max(abs(hi), 1.0)})
    if -res.fun >= vals[i]:
        return float(res.x), float(-res.fun)
    return float(hs[i]), float(vals[i])


# ---------------------------------------------------------------- lattice sums

def alpha_reference(q: float, qx: float, params: StructureParams, M: int = 4000) -> complex:
    """alpha from an explicit sum to |m| = M plus a digamma/Hurwitz-zeta tail.

    For large m, 1/kappa = 1/t + q^2/(2 t^3) + 3 q^4/(8 t^5) + ..., t = 2 pi m +- qx.
    """
    s = 0j
    for m in range(-M, M + 1):
        s += 1 / qz(q, qx + TWO_PI * m) - 1 / (2j * math.pi * (abs(m) + 1))
    tail = 0.0
    for c in (qx, -qx):
        s0 = M + 1 + c / TWO_PI
        tail += (digamma(M + 2) - digamma(s0)) / TWO_PI
        tail += q ** 2 / 2 * hurwitz_zeta(3, s0) / TWO_PI ** 3
        tail += 3 * q ** 4 / 8 * hurwitz_zeta(5, s0) / TWO_PI ** 5
        tail += 5 * q ** 6 / 16 * hurwitz_zeta(7, s0) / TWO_PI ** 7
    s += -1j * tail
    d0 = scattering_phase(q, params)
    return 2j * math.pi * d0 * (s + 1j / math.pi * math.log(TWO_PI * params.R))


def beta_reference(q: float, qx: float, h: float, params: StructureParams,
                   M: int = 400) -> complex:
    s = 0j
    for m in range(-M, M + 1):
        kz = qz(q, qx + TWO_PI * m)
        s += np.exp(2j * h * kz) / kz
    return 2j * math.pi * scattering_phase(q, params) * s
