"""Exception types shared across the package.

The CLI maps these onto exit codes: data-shaped problems (bad input,
unparseable files, degenerate matrices) exit with 2, numerical problems
(failed decompositions, rank deficiency) with 3.
"""


class FactorStabError(Exception):
    """Base class for all package-specific errors."""


class InvalidInput(FactorStabError, ValueError):
    """An argument violates a documented precondition."""


class ParseError(FactorStabError, ValueError):
    """A file could not be parsed; the message carries the location."""


class DegenerateInput(FactorStabError, ValueError):
    """Input is technically valid but carries no usable signal (e.g. all-zero)."""


class DegenerateColumn(DegenerateInput):
    """A column has too little variance to standardize."""

    def __init__(self, index, message=None):
        self.index = index
        super().__init__(message or f"column {index} is (near-)constant")


class RankDeficient(FactorStabError):
    """A requested eigen direction lies in the numerical null space."""


class NumericalFailure(FactorStabError):
    """A LAPACK routine failed to converge; the message carries diagnostics."""
