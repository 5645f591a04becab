"""Exception hierarchy shared by every stage of the codec."""


class OCCError(Exception):
    """Base class for all codec and simulator errors."""


class InvalidArgument(OCCError, ValueError):
    pass


class DegenerateLevels(OCCError, ValueError):
    """Symbol mean levels collapse or are out of order."""


class DegenerateSignal(OCCError, ValueError):
    """A column carries no usable contrast (e.g. constant)."""


class HeaderNotFound(OCCError):
    pass


class InsufficientExtrema(OCCError):
    pass


class IncompletePacket(OCCError):
    pass


class ConfigError(OCCError, ValueError):
    pass
