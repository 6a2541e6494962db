"""Exception hierarchy.

Validation problems (bad parameters, malformed files) subclass
:class:`ValidationError`; numerical failures that depend on the data
(truncation ties, degenerate configurations) subclass
:class:`NumericalError`.  The command line maps them to exit codes 1 and 2.
"""


class RieszLabError(Exception):
    pass


class ValidationError(RieszLabError, ValueError):
    pass


class MeasureFormatError(ValidationError):
    pass


class NumericalError(RieszLabError, ArithmeticError):
    pass


class DomainError(NumericalError, ValueError):
    """A kernel or triple quantity was evaluated at a coincidence."""


class TruncationTieError(NumericalError):
    """Some atom sits at distance exactly ``eps`` from an evaluation point."""


class DegenerateInputError(NumericalError, ValueError):
    pass
