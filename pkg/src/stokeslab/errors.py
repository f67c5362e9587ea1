"""Exception types shared across the package."""


class StokeslabError(Exception):
    """Base class for all package errors."""


class GridError(StokeslabError):
    """Invalid grid parameters or a grid too coarse for the requested operation."""


class ShapeError(StokeslabError):
    """Field dimensions do not match the grid or each other."""


class ParameterError(StokeslabError):
    """A numeric parameter is outside its admissible range."""


class LadderError(StokeslabError):
    """The dyadic filter bank cannot be built on this grid."""


class FormatError(StokeslabError):
    """Malformed field file; carries the byte offset where parsing failed."""

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class PreconditionError(StokeslabError):
    """An operation's mathematical hypotheses are violated by the given indices."""
