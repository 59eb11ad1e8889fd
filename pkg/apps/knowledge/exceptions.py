"""Exception hierarchy shared by the graph, mining and model layers."""


class FactCheckError(Exception):
    """Base class for every error raised by the fact-checking pipeline."""


class GraphFormatError(FactCheckError, ValueError):
    """A malformed line in an edge, label or statement file."""

    def __init__(self, message, line_number=None, path=None):
        self.line_number = line_number
        self.path = path
        location = ""
        if path is not None:
            location = f"{path}:"
        if line_number is not None:
            location = f"{location}{line_number}: " if location else f"line {line_number}: "
        elif location:
            location = f"{location} "
        super().__init__(f"{location}{message}")


class SnapshotFormatError(FactCheckError, ValueError):
    pass


class UnknownEntityError(FactCheckError, KeyError):
    def __init__(self, name):
        self.name = name
        super().__init__(name)

    def __str__(self):
        return f"Unknown entity '{self.name}'"


class UnknownPredicateError(FactCheckError, KeyError):
    def __init__(self, name, hint=""):
        self.name = name
        self.hint = hint
        super().__init__(name)

    def __str__(self):
        message = f"Unknown predicate '{self.name}'"
        if self.hint:
            message = f"{message}. {self.hint}"
        return message


class SamplingError(FactCheckError, ValueError):
    pass


class FeatureSelectionError(FactCheckError, ValueError):
    pass


class ConvergenceError(FactCheckError, RuntimeError):
    def __init__(self, message, iterations=None, gradient_norm=None):
        self.iterations = iterations
        self.gradient_norm = gradient_norm
        details = []
        if iterations is not None:
            details.append(f"iterations={iterations}")
        if gradient_norm is not None:
            details.append(f"gradient_norm={gradient_norm:.3e}")
        if details:
            message = f"{message} ({', '.join(details)})"
        super().__init__(message)


class EvaluationError(FactCheckError, ValueError):
    pass


class ModelFormatError(FactCheckError, ValueError):
    pass


class StatementError(FactCheckError, ValueError):
    """A statement that cannot be checked, e.g. one whose endpoints coincide."""


class ConfigurationError(FactCheckError, ValueError):
    """A missing, malformed or out-of-range pipeline setting."""
