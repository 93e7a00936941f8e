"""Exception hierarchy shared by every module.

Each class carries the process exit code the command-line front end uses
when the error escapes a subcommand.
"""


class PhsicError(Exception):
    exit_code = 2


class ParseError(PhsicError):
    """Malformed input file; ``line`` is 1-based."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = []
        if path is not None:
            where.append(str(path))
        if line is not None:
            where.append(f"line {line}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class DimensionError(PhsicError):
    pass


class InsufficientDataError(PhsicError):
    pass


class CorruptModelError(PhsicError):
    pass


class ParameterError(PhsicError):
    exit_code = 1


class EstimatorMismatchError(PhsicError):
    exit_code = 1


class FactorizationError(PhsicError):
    exit_code = 3

    def __init__(self, message, step=None):
        self.step = step
        super().__init__(message if step is None else f"step {step}: {message}")
