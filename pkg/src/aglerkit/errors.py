"""Exception types raised by aglerkit."""


class AglerError(Exception):
    """Base class for every error raised by this package."""


class DegenerateInput(AglerError):
    pass


class UnstableDenominator(AglerError):
    pass


class CommonFactor(AglerError):
    pass


class GridMismatch(AglerError):
    pass


class NonDivisible(AglerError):
    pass


class InfeasibleIdentity(AglerError):
    """The coefficient-matching system for the Agler identity has no solution."""


class NotLoewnerMaximal(AglerError):
    """A computed extremal pair failed the sampled quotient-kernel order check."""


class DegenerateFrame(AglerError):
    pass


class NotInModelSpace(AglerError):
    pass


class NotHermitian(AglerError):
    pass


class InconsistentWithTheorem(AglerError):
    """Numerical witnesses contradict the verdict predicted by the theory."""


class InputError(AglerError):
    """Malformed JSON specification or configuration."""
