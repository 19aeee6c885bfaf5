"""Exception hierarchy.

Every numerical failure raised by the library derives from :class:`BicShgError`
so that callers (and the CLI) can map whole families of failures to exit codes.
"""


class BicShgError(Exception):
    """Base class for all library errors."""


class NumericalFailure(BicShgError):
    """A solver could not produce a result (bracket, convergence, ...)."""


class ValidityViolation(BicShgError):
    """The requested point lies outside the region where the theory holds."""


class ThresholdProximity(NumericalFailure):
    """Wavenumber too close to a diffraction threshold (q_zm -> 0)."""


class NoBracket(NumericalFailure):
    pass


class DegenerateDerivative(NumericalFailure):
    pass


class CurveLost(NumericalFailure):
    pass


class NotFound(NumericalFailure):
    pass


class NoConvergence(NumericalFailure):
    pass


class SecondHarmonicResonance(NumericalFailure):
    """det(1 - H(2k, 2kx)) vanishes: the doubled frequency hits a pole."""


class ZetaSingular(NumericalFailure):
    pass


class NegativeDiscriminant(NumericalFailure):
    """D3 < 0 although its factorized form says it cannot be."""


class InvalidRegion(ValidityViolation):
    """tau_plus + tau_minus < 0: the two-harmonic truncation is not justified."""


class OutsideValidity(ValidityViolation):
    pass


class ConservationViolation(ValidityViolation):
    pass


class ConfigError(BicShgError):
    pass
