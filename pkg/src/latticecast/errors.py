"""Exceptions shared across modules."""


class ConfigError(ValueError):
    """Invalid scenario or command-line configuration.

    ``path`` names the offending field, e.g. ``receivers[1].S``.
    """

    def __init__(self, message: str, path: str | None = None):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


class EnumerationTooLarge(ValueError):
    """An exhaustive enumeration would exceed its configured cap."""
