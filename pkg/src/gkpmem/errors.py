"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A physical or numerical parameter lies outside its valid domain."""


class UnsupportedError(NotImplementedError):
    """The requested combination of inputs is outside what is modelled."""


class ConditioningError(ZeroDivisionError):
    """A post-selected quantity was requested with zero heralding probability."""
