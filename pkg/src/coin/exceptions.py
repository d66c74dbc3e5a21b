class CoinError(Exception):
    """Base class for errors raised by this package."""


class DataError(CoinError, ValueError):
    """Malformed input data (unparseable cells, ragged rows, unknown ids)."""


class ConfigError(CoinError, ValueError):
    pass


class DegenerateContextError(CoinError):
    """The context of a query is too small, or every cluster was pruned."""


class NotIsolatedError(CoinError):
    """The query coincides with a context member, so no outlier class can be sampled."""


class SolverError(CoinError, ArithmeticError):
    pass
