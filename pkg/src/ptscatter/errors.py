"""Exception hierarchy.

``InputError`` subclasses map to CLI exit code 1, ``NumericalError`` subclasses
to exit code 2.
"""


class PTScatterError(Exception):
    pass


class InputError(PTScatterError, ValueError):
    pass


class NumericalError(PTScatterError, ArithmeticError):
    pass


class NonPositiveEnergy(InputError):
    pass


class SchemaError(InputError):
    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


class GrammarError(InputError):
    pass


class DegenerateEnergy(NumericalError):
    pass


class SingularDenominator(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class Indeterminate(NumericalError):
    """A pair of eigenvalues is neither unimodular nor a reciprocal pair."""

    def __init__(self, message, values=()):
        super().__init__(message)
        self.values = tuple(values)


class AmbiguousSide(NumericalError):
    pass


class NoCrossing(NumericalError):
    pass
