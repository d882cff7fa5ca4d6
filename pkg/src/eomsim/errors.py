"""Exception and warning types raised by eomsim."""

from __future__ import annotations


class EomsimError(Exception):
    """Base class for all eomsim errors."""


class ParameterError(EomsimError, ValueError):
    """One or more device parameters violate their invariants.

    ``problems`` holds every violation found, not just the first one.
    """

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(self.problems) if self.problems else "invalid parameters")


class NegativeVoltageSquared(EomsimError, ValueError):
    pass


class DegenerateDenominator(EomsimError, ArithmeticError):
    pass


class SingularM(EomsimError, ArithmeticError):
    pass


class NonFinite(EomsimError, ArithmeticError):
    pass


class StepRejected(EomsimError, RuntimeError):
    pass


class MaxStepsExceeded(EomsimError, RuntimeError):
    pass


class UndersampledWaveform(EomsimError, ValueError):
    pass


class WaveformError(EomsimError, ValueError):
    """Malformed drive or target waveform (ordering, floor/peak, table shape)."""


class ReachabilityError(EomsimError, ValueError):
    """Requested absorption lies outside the reachable band ``[a_min, a_max)``."""

    def __init__(self, a_target, a_min, a_max, index=None):
        self.a_target = a_target
        self.a_min = a_min
        self.a_max = a_max
        self.index = index
        where = "" if index is None else f" at sample {index}"
        super().__init__(
            f"{type(self).__name__}: target {a_target!r}{where} outside band "
            f"[{a_min!r}, {a_max!r})"
        )


class BelowReachable(ReachabilityError):
    pass


class AboveReachable(ReachabilityError):
    pass


class NoWindow(EomsimError, ValueError):
    """The transparency dip has closed; no window width is defined."""


class NonPositiveVoltage(EomsimError, ValueError):
    pass


class WeakFieldWarning(UserWarning):
    pass


class GammaOrderWarning(UserWarning):
    pass
