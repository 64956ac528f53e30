"""Exception hierarchy shared by all qslkit modules."""


class QslError(Exception):
    """Base class for qslkit errors."""


class DimensionError(QslError, ValueError):
    """Operands have incompatible shapes."""


class DomainError(QslError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class IntegrationError(QslError, ArithmeticError):
    """The master-equation integrator produced a non-finite state."""


class ModelError(QslError, ValueError):
    """A model file or operator expression is malformed."""


class ParseError(ModelError):
    """Syntax or evaluation error in an operator expression.

    ``position`` is the 0-based character offset of the offending token and
    ``span`` its ``(start, end)`` range in the source text.
    """

    def __init__(self, message, source="", position=0, end=None):
        self.source = source
        self.position = position
        self.span = (position, position + 1 if end is None else end)
        super().__init__(f"{message} at position {position}")

    def caret(self):
        """Return the source line with a caret marker under the error span."""
        start, end = self.span
        width = max(1, end - start)
        return f"{self.source}\n{' ' * start}{'^' * width}"
