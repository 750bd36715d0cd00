from typing import Any


class CremerLabError(Exception):
    """Base class for operation errors; the CLI reports these with exit status 2."""

    def __init__(self, detail: str) -> None:
        super().__init__(detail)
        self.detail = detail

    @property
    def name(self) -> str:
        return type(self).__name__

    def to_payload(self) -> dict[str, Any]:
        return {"error": self.name, "detail": self.detail}


# circle


class ExactHit(CremerLabError):
    pass


class NotSeparated(CremerLabError):
    def __init__(self, cap: int) -> None:
        super().__init__(f"images not separated by the critical leaf within {cap} steps")
        self.cap = cap


class InvalidRotation(CremerLabError):
    pass


class DepthTooLarge(CremerLabError):
    pass


class BudgetExceeded(CremerLabError):
    pass


class NoLandingAngle(CremerLabError):
    pass


# symbolic


class ItineraryParseError(CremerLabError):
    pass


class NotAPullback(CremerLabError):
    pass


class NotEnoughZeros(CremerLabError):
    pass


class NoZeros(CremerLabError):
    pass


class NotEnoughElements(CremerLabError):
    pass


class IdenticalSources(CremerLabError):
    pass


class PrefixTooShort(CremerLabError):
    pass


class OrderMismatch(CremerLabError):
    pass


# numerics


class NewtonDiverged(CremerLabError):
    def __init__(self, level: int, partial: Any = None) -> None:
        super().__init__(f"Newton continuation left its trust region at level {level}")
        self.level = level
        self.partial = partial

    def to_payload(self) -> dict[str, Any]:
        payload = super().to_payload()
        payload["level"] = self.level
        return payload


class OverflowEscape(CremerLabError):
    pass


class EmptySet(CremerLabError):
    pass


class IncompleteRootSetWarning(UserWarning):
    pass
