class GNDError(Exception):
    pass


class InstanceError(GNDError, ValueError):
    """Malformed instance data (bad cost kind, weight below one, dangling ids)."""


class InvalidReply(GNDError):
    pass


class UnsatisfiableRequest(GNDError):
    pass


class NoPath(UnsatisfiableRequest):
    pass


class Disconnected(UnsatisfiableRequest):
    pass


class BudgetExceeded(GNDError):
    pass


class RequiresExactOracle(GNDError):
    pass


class AdversaryStuck(GNDError):
    pass
