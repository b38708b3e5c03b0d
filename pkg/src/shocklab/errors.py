"""Exception hierarchy shared by all modules."""


class ShockLabError(Exception):
    """Base class for every error raised by the package."""


class DomainError(ShockLabError, ValueError):
    """An argument lies outside the domain where the formula makes sense."""


class ProfileError(ShockLabError):
    """The traveling-wave construction failed or produced an invalid profile."""


class NumericalBlowupError(ShockLabError):
    """Non-finite or runaway values appeared during time integration."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} (t={t!r})")
        self.t = t


class VacuumProximityError(NumericalBlowupError):
    """The specific volume dropped to the positivity floor."""


class ShiftWindowError(ShockLabError):
    """The shift left the admissible window |X| <= L/4."""


class ConfigError(ShockLabError):
    """Configuration could not be parsed or failed validation.

    ``violations`` collects every problem found, not just the first one.
    """

    def __init__(self, violations):
        if isinstance(violations, str):
            violations = [violations]
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))
