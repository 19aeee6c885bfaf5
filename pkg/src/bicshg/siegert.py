"""Resonance curves, widths and bound states in the continuum.

The poles of the resolvent of the double array follow from the 2x2 coupling
matrix: a resonance of parity +1 (even in z) solves Re{1 - alpha - beta} = 0 in
k^2, one of parity -1 solves Re{1 - alpha + beta} = 0. Only the window
kx < k < 2 pi - kx, where a single fundamental channel is open, is handled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .dispersion import (DEFAULT_TOL, THRESHOLD_MARGIN, StructureParams, alpha,
                         beta, coupling_matrix, scattering_phase)
from .errors import (CurveLost, DegenerateDerivative, NoBracket, NotFound,
                     ThresholdProximity)

SCAN_POINTS = 200
K2_XTOL = 1e-14
FD_REL_STEP = 1e-6
GAMMA_CLIP = 1e-12
BRANCH_SEARCH_STEPS = 200


@dataclass(frozen=True)
class ResonancePoint:
    h: float
    kr: float
    gamma: float
    parity: int


@dataclass(frozen=True)
class BoundState:
    n: int
    hb: float
    kb: float
    kzb: float
    parity: int


def _check_parity(parity):
    if parity not in (1, -1):
        raise ValueError("parity must be +1 or -1")


def det_factor(k: float, h: float, parity: int, params: StructureParams,
               tol: float = DEFAULT_TOL) -> complex:
    """1 - alpha - parity * beta at (k, kx, h)."""
    return 1.0 - alpha(k, params.kx, params, tol) - parity * beta(k, params.kx, h, params, tol)


def _re_det_k2(k2, h, parity, params, tol):
    return det_factor(math.sqrt(k2), h, parity, params, tol).real


def window(params: StructureParams, margin: float = THRESHOLD_MARGIN) -> tuple[float, float]:
    """The one-open-channel window (kx, 2 pi - kx), shrunk by the threshold margin."""
    return params.kx + 1e-3, params.threshold - margin * 1.5


def resonance_k(h: float, parity: int, params: StructureParams,
                bracket: tuple[float, float] | None = None,
                tol: float = DEFAULT_TOL) -> float:
    """Resonant wavenumber k_r(h) of the given parity branch.

    Without a bracket the window is scanned on a uniform grid and the sign
    change closest to the diffraction threshold is refined.
    """
    _check_parity(parity)
    if h <= 0:
        raise ValueError("h must be positive")
    if bracket is None:
        lo, hi = window(params)
        ks = np.linspace(lo, hi, SCAN_POINTS)
        vals = [det_factor(k, h, parity, params, tol).real for k in ks]
        for i in range(len(ks) - 1, 0, -1):
            if vals[i - 1] * vals[i] < 0:
                bracket = (ks[i - 1], ks[i])
                break
        else:
            raise NoBracket(f"no resonance of parity {parity} at h={h}")
    k_lo, k_hi = bracket
    if not params.kx < k_lo < k_hi < params.threshold:
        raise NoBracket(f"bracket {bracket} outside the one-channel window")
    f_lo = _re_det_k2(k_lo ** 2, h, parity, params, tol)
    f_hi = _re_det_k2(k_hi ** 2, h, parity, params, tol)
    if f_lo * f_hi > 0:
        raise NoBracket(f"no sign change of Re det in {bracket} at h={h}")
    k2 = brentq(_re_det_k2, k_lo ** 2, k_hi ** 2, args=(h, parity, params, tol),
                xtol=K2_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.sqrt(k2)


def width(h: float, kr: float, parity: int, params: StructureParams,
          fd_step: float = FD_REL_STEP, tol: float = DEFAULT_TOL) -> float:
    """Resonance width Gamma, the pole sitting at k^2 = kr^2 - i Gamma.

    Gamma = Im{D} / d_{k^2} Re{D} with D = 1 - alpha -+ beta, the derivative
    taken by a central difference in k^2.
    """
    _check_parity(parity)
    k2 = kr * kr
    step = fd_step * k2
    if kr + step / kr >= params.threshold - THRESHOLD_MARGIN:
        step = 0.25 * (params.threshold - THRESHOLD_MARGIN - kr) * kr
    dre = (_re_det_k2(k2 + step, h, parity, params, tol)
           - _re_det_k2(k2 - step, h, parity, params, tol)) / (2 * step)
    if abs(dre) < 1e-12:
        raise DegenerateDerivative(f"d Re/d k^2 = {dre:.3g} at h={h}")
    gamma = det_factor(kr, h, parity, params, tol).imag / dre
    if gamma < 0:
        if gamma < -GAMMA_CLIP:
            raise DegenerateDerivative(f"negative width {gamma:.3g} at h={h}")
        gamma = 0.0
    return gamma


def _continue_root(h, parity, params, k_prev, tol, width0=0.02, tries=8):
    lo_lim, hi_lim = window(params)
    w = width0
    for _ in range(tries):
        lo = max(lo_lim, k_prev - w)
        hi = min(hi_lim, k_prev + w)
        try:
            return resonance_k(h, parity, params, (lo, hi), tol)
        except NoBracket:
            w *= 2.0
    raise CurveLost(f"continuation lost the parity {parity} curve at h={h}")


def trace_curve(parity: int, params: StructureParams, h_range: tuple[float, float],
                step: float, tol: float = DEFAULT_TOL) -> list[ResonancePoint]:
    """Natural continuation of k_r(h) on a uniform h grid (ascending)."""
    _check_parity(parity)
    h0, h1 = h_range
    if not 0 < h0 <= h1 or step <= 0:
        raise ValueError("need 0 < h_min <= h_max and step > 0")
    n = int(math.floor((h1 - h0) / step + 1e-9)) + 1
    hs = h0 + step * np.arange(n)
    points = []
    k_prev = None
    for h in hs:
        h = float(h)
        if k_prev is None:
            kr = resonance_k(h, parity, params, tol=tol)
        else:
            kr = _continue_root(h, parity, params, k_prev, tol)
        points.append(ResonancePoint(h, kr, width(h, kr, parity, params, tol=tol), parity))
        k_prev = kr
    return points


def kz_of(k: float, params: StructureParams) -> float:
    return math.sqrt(k * k - params.kx * params.kx)


class _CurveFollower:
    """Caches the last root so nested solves reuse a tight bracket."""

    def __init__(self, parity, params, tol):
        self.parity, self.params, self.tol = parity, params, tol
        self.k_last = None

    def __call__(self, h):
        if self.k_last is not None:
            try:
                k = _continue_root(h, self.parity, self.params, self.k_last, self.tol,
                                   width0=1e-3, tries=12)
            except CurveLost:
                k = resonance_k(h, self.parity, self.params, tol=self.tol)
        else:
            k = resonance_k(h, self.parity, self.params, tol=self.tol)
        self.k_last = k
        return k


def curve_follower(parity: int, params: StructureParams, tol: float = DEFAULT_TOL):
    """Callable h -> k_r(h) that warm-starts from the previous root."""
    return _CurveFollower(parity, params, tol)


def bound_state_phase(n: int, parity: int) -> float:
    """h kz at the n-th bound state: (n - 1/2) pi even, n pi odd."""
    return (n - 0.5) * math.pi if parity == 1 else n * math.pi


def find_bound_state(n: int, parity: int, params: StructureParams,
                     tol: float = DEFAULT_TOL) -> BoundState:
    """Solve h sqrt(k_r(h)^2 - kx^2) = target phase for the n-th bound state."""
    _check_parity(parity)
    if n < 1:
        raise ValueError("n must be >= 1")
    target = bound_state_phase(n, parity)
    kz_max = kz_of(params.threshold, params)
    follow = curve_follower(parity, params, tol)

    def g(h):
        return h * kz_of(follow(h), params) - target

    h_lo = target / kz_max * (1 + 1e-9)
    # the branch may only leave the threshold at larger h; walk up until it exists
    for _ in range(BRANCH_SEARCH_STEPS):
        try:
            g_lo = g(h_lo)
            break
        except (NoBracket, CurveLost, ThresholdProximity):
            follow.k_last = None
            h_lo *= 1.01
    else:
        raise NotFound(f"bound state n={n}, parity={parity}: no resonance branch found")
    if g_lo > 0:
        raise NotFound(f"bound state n={n}, parity={parity}: phase already exceeded "
                       f"where the branch starts (h={h_lo:.6g})")
    h_hi = h_lo
    for _ in range(60):
        h_hi *= 1.02
        try:
            if g(h_hi) > 0:
                break
        except (NoBracket, CurveLost, ThresholdProximity) as exc:
            raise NotFound(f"bound state n={n}, parity={parity}: {exc}") from exc
        h_lo = h_hi
    else:
        raise NotFound(f"bound state n={n}, parity={parity}: no sign change")
    hb = brentq(g, h_lo, h_hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    kb = follow(hb)
    return BoundState(n, hb, kb, kz_of(kb, params), parity)


def find_bound_states(parity: int, params: StructureParams, n_max: int,
                      tol: float = DEFAULT_TOL) -> list[BoundState]:
    return [find_bound_state(n, parity, params, tol) for n in range(1, n_max + 1)]


def bound_state_eigenvector(bs: BoundState, params: StructureParams,
                            tol: float = DEFAULT_TOL) -> np.ndarray:
    """Null vector (E_b+, E_b-) of 1 - H at the bound state, unit norm."""
    mat = np.eye(2) - coupling_matrix(bs.kb, params.kx, bs.hb, params, tol).matrix()
    _, _, vh = np.linalg.svd(mat)
    v = vh[-1].conj()
    return v / v[np.argmax(abs(v))]


def threshold_estimate(params: StructureParams) -> float:
    """First-order estimate of k_b just below the threshold 2 pi - kx."""
    K = params.threshold
    return K - 8.0 * math.pi ** 2 * scattering_phase(K, params) ** 2 / K
