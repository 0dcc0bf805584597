"""Exception types shared across bondlab.

The CLI maps these onto exit codes: DomainError -> 1, CapacityError -> 2,
OSError -> 3.
"""


class BondlabError(Exception):
    pass


class DomainError(BondlabError, ValueError):
    """Argument outside the domain of an operation (includes range errors)."""


class CapacityError(BondlabError, RuntimeError):
    """An enumeration or search exceeded its configured cap."""

    def __init__(self, message: str, cap: int | None = None):
        super().__init__(message)
        self.cap = cap
