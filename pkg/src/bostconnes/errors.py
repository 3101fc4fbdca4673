"""Exception types shared across the package."""


class BCError(Exception):
    pass


class KindMismatch(BCError, TypeError):
    pass


class NotInImage(BCError, ValueError):
    def __init__(self, message, offending=()):
        super().__init__(message)
        self.offending = tuple(offending)


class LevelTooSmall(BCError, ValueError):
    pass


class LatticeMismatch(BCError, ValueError):
    pass


class DivergentParameter(BCError, ValueError):
    def __init__(self, message, threshold=None):
        super().__init__(message)
        self.threshold = threshold


class NotDiagonalizable(BCError, ValueError):
    pass


class NotAdmissible(BCError, ValueError):
    pass


class ConfigError(BCError, ValueError):
    pass
