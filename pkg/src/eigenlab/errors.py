"""Exception types shared across eigenlab."""


class DomainError(ValueError):
    """An argument lies outside the domain of a mathematical function."""


class HypothesisError(ValueError):
    """A theorem hypothesis required by an experiment does not hold.

    The message names the violated hypothesis so the caller can report it.
    """
