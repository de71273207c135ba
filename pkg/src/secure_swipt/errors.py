"""Exception types raised across the package."""


class ContractError(ValueError):
    """An input violated a documented precondition."""


class ConfigError(ValueError):
    """A scenario configuration failed validation.

    ``fields`` lists every offending field name.
    """

    def __init__(self, problems: dict[str, str]):
        self.fields = sorted(problems)
        self.problems = dict(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in sorted(problems.items()))
        super().__init__(f"invalid scenario config ({detail})")


class BuildError(ValueError):
    """A problem instance cannot be turned into a conic program."""

    def __init__(self, constraint: str, message: str):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")


class RecoveryError(RuntimeError):
    """Rank-one reconstruction failed; ``diagnostics`` explains where."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        self.diagnostics = diagnostics or {}
        super().__init__(message)
