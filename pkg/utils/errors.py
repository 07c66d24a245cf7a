# utils/errors.py
"""Exception hierarchy shared by models and commands.

Each family carries the process exit code the CLI reports for it.
"""


class TactoidLabError(Exception):
    exit_code = 1

    def __init__(self, message, **details):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_dict(self):
        body = {"error": self.message, "type": type(self).__name__}
        if self.details:
            body["details"] = self.details
        return body


# -------------------------------------------------
# Configuration / input errors (exit 2)
# -------------------------------------------------
class ConfigError(TactoidLabError):
    exit_code = 2


class ParseError(ConfigError):
    def __init__(self, message, key=None, line=None):
        where = []
        if key is not None:
            where.append(f"key '{key}'")
        if line is not None:
            where.append(f"line {line}")
        text = f"{message} ({', '.join(where)})" if where else message
        super().__init__(text, key=key, line=line)
        self.key = key
        self.line = line


class DomainError(ConfigError):
    pass


class RangeError(ConfigError):
    pass


class PreconditionError(ConfigError):
    pass


# -------------------------------------------------
# Numerical failures (exit 3)
# -------------------------------------------------
class NumericalError(TactoidLabError):
    exit_code = 3


class QuadratureError(NumericalError):
    pass


class SolverDivergenceError(NumericalError):
    def __init__(self, message, step):
        super().__init__(f"{message} at step {step}", step=step)
        self.step = step


class RootNotFoundError(NumericalError):
    def __init__(self, message, table=None):
        super().__init__(message)
        self.table = table


class SingularODEError(NumericalError):
    def __init__(self, message, location):
        super().__init__(message, location=location)
        self.location = location


class AssumptionViolationError(NumericalError):
    pass


class CrossCheckError(NumericalError):
    pass


class UnsupportedPotentialError(NumericalError):
    pass


class DegreeUndefinedError(NumericalError):
    pass


class InvalidConfigError(NumericalError):
    pass


# -------------------------------------------------
# Output failures (exit 4)
# -------------------------------------------------
class OutputError(TactoidLabError):
    exit_code = 4

    def __init__(self, message, path):
        super().__init__(f"{message}: {path}", path=str(path))
        self.path = path
