"""Exception hierarchy shared by all polyquad modules."""


class PolyquadError(Exception):
    """Base class for every error raised by polyquad."""


class ParseError(PolyquadError):
    """Malformed OFF header, counts line, or face record."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IndexOutOfRange(ParseError):
    """A face references a vertex index that does not exist."""


class ValidationError(PolyquadError):
    """The polyhedron failed validation and cannot be integrated on."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class DegenerateBox(PolyquadError):
    pass


class NegativeVolume(PolyquadError):
    """Divergence volume is negative, i.e. faces are oriented inward."""


class DegenerateFace(PolyquadError):
    pass


class EarClippingFailure(PolyquadError):
    """No ear could be found; the face polygon is self-intersecting."""


class DegenerateTriangle(PolyquadError):
    pass


class DomainError(ValueError, PolyquadError):
    """Chebyshev evaluation requested outside [-1, 1]."""


class ConvergenceFailure(PolyquadError):
    pass


class NonFiniteMoment(PolyquadError):
    pass


class LengthMismatch(ValueError, PolyquadError):
    pass


class DegreeExceeded(PolyquadError):
    """A polynomial term has total degree above the rule's exactness degree."""


class DegreeCapExceeded(ValueError, PolyquadError):
    pass


class NonConvex(PolyquadError):
    pass


class UnknownShape(KeyError, PolyquadError):
    pass
