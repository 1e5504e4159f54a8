"""Exception types raised by gramian_lens."""


class ModelError(ValueError):
    """A model file could not be parsed or fails validation."""


class ShapeError(ModelError):
    """Array shapes are inconsistent with the network layout."""


class DomainError(ValueError):
    """An input lies outside the domain of a function (e.g. NaN or inf)."""


class NumericError(ArithmeticError):
    """A numerical routine failed or produced non-finite values."""
