"""Exception types shared across wvlab."""


class WVLabError(Exception):
    """Base class for all wvlab errors."""


class DomainError(WVLabError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientTruncation(WVLabError):
    """The stored coefficient prefix is too short for the requested radius.

    ``suggested_length`` is a rough lower bound on the prefix length that
    would pass; callers rebuild the sequence with at least that many terms.
    """

    def __init__(self, r, stored, suggested_length=None, message=None):
        self.r = float(r)
        self.stored = int(stored)
        self.suggested_length = suggested_length
        if message is None:
            message = f"stored prefix of {stored} coefficients is insufficient at r={r:.17g}"
            if suggested_length is not None:
                message += f"; rebuild with N >= {suggested_length}"
        super().__init__(message)


class TruncationMargin(WVLabError):
    """An orbit iterate reaches past the stored multipliers."""

    def __init__(self, n, needed, stored):
        self.n = int(n)
        self.needed = int(needed)
        self.stored = int(stored)
        super().__init__(
            f"iterate n={n} needs {needed} coefficients beyond index n but only "
            f"{stored} are stored; rebuild with N >= {n + needed}"
        )


class ConfigError(WVLabError, ValueError):
    """Invalid experiment configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}")
