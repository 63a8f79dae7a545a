class ShatterkitError(Exception):
    """Base class for all library errors."""


class ParseError(ShatterkitError):
    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        where = []
        if row is not None:
            where.append(f"row={row}")
        if col is not None:
            where.append(f"col={col}")
        suffix = f" ({', '.join(where)})" if where else ""
        super().__init__(message + suffix)


class EmptyInput(ShatterkitError):
    pass


class InvalidParameter(ShatterkitError, ValueError):
    pass


class ResourceLimit(ShatterkitError):
    pass


class NumericFailure(ShatterkitError):
    pass


class StructureError(ShatterkitError):
    pass


class GeometryError(ShatterkitError):
    pass


class CalibrationError(ShatterkitError):
    pass
