"""Exception hierarchy."""


class TrimerError(Exception):
    """Base class for all simulator errors."""


class DomainError(TrimerError, ValueError):
    """A parameter lies outside its physical domain."""


class ZeroStateError(TrimerError, ValueError):
    """Attempt to normalize a state with zero norm."""


class ContractError(TrimerError, ValueError):
    """An operation received input violating its precondition."""


class HeraldImpossibleError(TrimerError):
    """The requested detection outcome has zero probability."""


class DivergenceError(TrimerError, ArithmeticError):
    """A ratio diverges at the requested parameters."""


class ResourceError(TrimerError, MemoryError):
    """A computation would exceed a configured size limit."""


class NumericalConsistencyError(TrimerError, ArithmeticError):
    """A result violates a bound that only rounding noise may breach."""
