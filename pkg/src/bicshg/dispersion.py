"""Subwavelength building blocks: scattering phase, diffraction channels,
lattice sums and the far-field action of the point-scatterer operator.

All lengths are in units of the array period; the two arrays sit at z = +h
and z = -h.
"""

from __future__ import annotations

import cmath
import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ThresholdProximity

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-10
THRESHOLD_MARGIN = 1e-6


@dataclass(frozen=True)
class StructureParams:
    """Geometry and material of the double array.

    R is the cylinder radius, eps_c the linear dielectric constant, chi_c the
    second-order susceptibility and kx the Bloch momentum of the incident wave.
    """

    R: float
    eps_c: float
    chi_c: float = 0.0
    kx: float = 0.0

    def __post_init__(self):
        if not 0.0 < self.R < 0.5:
            raise ValueError(f"R must lie in (0, 0.5), got {self.R}")
        if not self.eps_c > 1.0:
            raise ValueError(f"eps_c must exceed 1, got {self.eps_c}")
        if not self.chi_c >= 0.0:
            raise ValueError(f"chi_c must be >= 0, got {self.chi_c}")
        if not 0.0 <= self.kx < math.pi:
            raise ValueError(f"kx must lie in [0, pi), got {self.kx}")

    @property
    def nu(self) -> float:
        return self.chi_c / (4.0 * math.pi * (self.eps_c - 1.0))

    @property
    def threshold(self) -> float:
        """First diffraction threshold 2 pi - kx of the fundamental."""
        return TWO_PI - self.kx

    def replace(self, **changes) -> "StructureParams":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class Channel:
    m: int
    qzm: complex
    open: bool


@dataclass(frozen=True)
class ChannelSet:
    q: float
    qx: float
    channels: tuple[Channel, ...]

    @property
    def open_channels(self) -> tuple[Channel, ...]:
        return tuple(c for c in self.channels if c.open)

    def __len__(self):
        return len(self.channels)


@dataclass(frozen=True)
class CouplingMatrix:
    """The symmetric 2x2 action [[alpha, beta], [beta, alpha]] on (psi+, psi-)."""

    alpha: complex
    beta: complex
    q: float
    qx: float
    h: float

    def matrix(self) -> np.ndarray:
        return np.array([[self.alpha, self.beta], [self.beta, self.alpha]])

    def apply(self, psi_plus, psi_minus):
        return (self.alpha * psi_plus + self.beta * psi_minus,
                self.beta * psi_plus + self.alpha * psi_minus)

    def det_one_minus(self) -> complex:
        """det(1 - H) = (1 - alpha - beta)(1 - alpha + beta)."""
        return (1.0 - self.alpha - self.beta) * (1.0 - self.alpha + self.beta)

    def symmetric(self) -> complex:
        return 1.0 - self.alpha - self.beta

    def antisymmetric(self) -> complex:
        return 1.0 - self.alpha + self.beta


def scattering_phase(q: float, params: StructureParams) -> float:
    """delta0(q) = (q R)^2 (eps_c - 1) / 4."""
    if q < 0:
        raise ValueError("q must be non-negative")
    return (q * params.R) ** 2 * (params.eps_c - 1.0) / 4.0


def qz(q: float, t: float) -> complex:
    """Normal wavenumber of a channel with tangential wavenumber t.

    Two-case rule: real positive for an open channel, positive imaginary for
    a closed one. Never goes through a generic complex square root.
    """
    if q * q > t * t:
        return complex(math.sqrt(q * q - t * t), 0.0)
    return complex(0.0, math.sqrt(t * t - q * q))


def check_threshold(q: float, qx: float, margin: float = THRESHOLD_MARGIN) -> None:
    # nearest thresholds sit at m = round((+-q - qx) / 2 pi)
    for sign in (1.0, -1.0):
        m = round((sign * q - qx) / TWO_PI)
        for mm in (m - 1, m, m + 1):
            gap = abs(q - abs(qx + TWO_PI * mm))
            if gap < margin:
                raise ThresholdProximity(
                    f"q={q!r} is within {gap:.3g} of the threshold of channel m={mm}"
                )


def channel_set(q: float, qx: float, m_max: int,
                margin: float = THRESHOLD_MARGIN) -> ChannelSet:
    if q <= 0:
        raise ValueError("q must be positive")
    check_threshold(q, qx, margin)
    chans = []
    for m in range(-m_max, m_max + 1):
        t = qx + TWO_PI * m
        chans.append(Channel(m, qz(q, t), q * q > t * t))
    return ChannelSet(q, qx, tuple(chans))


def open_channels(q: float, qx: float, margin: float = THRESHOLD_MARGIN) -> list[Channel]:
    """All open channels at (q, qx); their number is finite."""
    check_threshold(q, qx, margin)
    lo = math.ceil((-q - qx) / TWO_PI)
    hi = math.floor((q - qx) / TWO_PI)
    out = []
    for m in range(lo, hi + 1):
        t = qx + TWO_PI * m
        if q * q > t * t:
            out.append(Channel(m, qz(q, t), True))
    return out


def alpha_regularized_term(q: float, qx: float, m: int) -> complex:
    """One term 1/q_zm - 1/(2 pi i (|m|+1)) of the alpha sum."""
    return 1.0 / qz(q, qx + TWO_PI * m) - 1.0 / (2j * math.pi * (abs(m) + 1))


def alpha(q: float, qx: float, params: StructureParams, tol: float = DEFAULT_TOL,
          m_max: int = 0, margin: float = THRESHOLD_MARGIN) -> complex:
    """Self-action coefficient of one array on itself.

    The regularized lattice sum is evaluated exactly for open channels and
    m = 0; the closed |m| >= 1 terms go through the compiled kernel with an
    Euler-Maclaurin tail. ``m_max`` forces a longer explicit sum.
    """
    check_threshold(q, qx, margin)
    s = alpha_regularized_term(q, qx, 0)
    for ch in open_channels(q, qx, margin):
        if ch.m != 0:
            s += alpha_regularized_term(q, qx, ch.m)
    d0 = scattering_phase(q, params)
    closed, _ = _backend.alpha_closed_sum(q, qx, tol / max(TWO_PI * d0, 1e-300), m_max)
    # closed term: 1/(i kappa) - 1/(2 pi i (|m|+1)) = -i (1/kappa - 1/(2 pi (|m|+1)))
    s += -1j * closed
    return 2j * math.pi * d0 * (s + 1j / math.pi * math.log(TWO_PI * params.R))


def beta(q: float, qx: float, h: float, params: StructureParams,
         tol: float = DEFAULT_TOL, margin: float = THRESHOLD_MARGIN) -> complex:
    """Cross-action coefficient between the arrays at z = +h and z = -h."""
    if h <= 0:
        raise ValueError("h must be positive")
    check_threshold(q, qx, margin)
    s = 0j
    q0 = qz(q, qx)
    s += cmath.exp(2j * h * q0) / q0
    for ch in open_channels(q, qx, margin):
        if ch.m != 0:
            s += cmath.exp(2j * h * ch.qzm) / ch.qzm
    d0 = scattering_phase(q, params)
    closed, _ = _backend.beta_closed_sum(q, qx, h, tol / max(TWO_PI * d0, 1e-300))
    # closed term: exp(-2 h kappa) / (i kappa)
    s += -1j * closed
    return 2j * math.pi * d0 * s


def coupling_matrix(q: float, qx: float, h: float, params: StructureParams,
                    tol: float = DEFAULT_TOL) -> CouplingMatrix:
    return CouplingMatrix(alpha(q, qx, params, tol), beta(q, qx, h, params, tol), q, qx, h)


@dataclass(frozen=True)
class FarFieldAmplitude:
    """Outgoing amplitude of one open channel: reflected (z -> -inf) and
    transmitted (z -> +inf)."""

    m: int
    qzm: float
    reflected: complex
    transmitted: complex


def far_field_coefficients(q: float, qx: float, h: float, psi_plus: complex,
                           psi_minus: complex, params: StructureParams
                           ) -> list[FarFieldAmplitude]:
    """Plane-wave amplitudes radiated by point dipoles psi(0, +-h)."""
    d0 = scattering_phase(q, params)
    out = []
    for ch in open_channels(q, qx):
        kz = ch.qzm.real
        pref = 2j * math.pi * d0 / kz
        refl = pref * (psi_plus * cmath.exp(1j * h * kz) + psi_minus * cmath.exp(-1j * h * kz))
        trans = pref * (psi_plus * cmath.exp(-1j * h * kz) + psi_minus * cmath.exp(1j * h * kz))
        out.append(FarFieldAmplitude(ch.m, kz, refl, trans))
    return out
