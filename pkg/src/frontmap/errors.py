"""Exception hierarchy shared by all pipeline stages."""


class FrontMapError(Exception):
    """Base class for every error raised by this package."""


class ParseError(FrontMapError, ValueError):
    """Malformed export input. ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class NoKeyError(FrontMapError, ValueError):
    """A record lacks the fields needed to build its reference key."""


class UnknownNodeError(FrontMapError, KeyError):
    pass


class PartitionError(FrontMapError, ValueError):
    """A partition does not match the node set it is applied to."""


class NumericalError(FrontMapError, ArithmeticError):
    """A numerical stage cannot run on its input (e.g. a degenerate table)."""
