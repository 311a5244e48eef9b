"""Exception hierarchy shared by all modules."""


class CTQWError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(CTQWError, ValueError):
    pass


class WindowError(CTQWError, ValueError):
    """The lattice window is too small or does not contain a required node."""


class DomainError(CTQWError, ValueError):
    """An argument lies outside the domain of the operation."""


class DisconnectedDefectError(CTQWError, ValueError):
    """gamma + beta vanishes, so the closed-form spectral path is unavailable."""


class DegenerateDenominatorError(CTQWError, ArithmeticError):
    """(gamma + 2 beta)^2 - 2 beta^2 vanishes in the bound-energy formula."""


class PoleError(CTQWError, ArithmeticError):
    """The even-parity reflection factor f(lambda) has a pole."""


class AccuracyError(CTQWError, RuntimeError):
    """A numerical result violated its accuracy guard (e.g. norm drift)."""


class NoBoundStateError(CTQWError, ValueError):
    pass
