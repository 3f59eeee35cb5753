"""Exception types raised by the simulator."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigError(ValueError):
    """A configuration is invalid or insufficient for the requested computation.

    ``path`` names the offending field (e.g. ``"base.stmm.m_ux"``) when known.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
