class ProgramError(Exception):
    """Invalid subject program (syntax, names or types)."""

    def __init__(self, message: str, line: int = 0, col: int = 0):
        self.line = line
        self.col = col
        where = f"{line}:{col}: " if line else ""
        super().__init__(where + message)
        self.message = message


class ParseError(ProgramError):
    pass


class TypeCheckError(ProgramError):
    pass


class DuplicateNameError(ProgramError):
    pass


class ResolutionError(ProgramError):
    """A name (class, method, global, entry) does not resolve."""


class ConfigurationError(ValueError):
    """A state path or condition does not match the program's declarations."""


class Fault(RuntimeError):
    """Runtime fault of the subject program (null dereference, division by zero)."""

    def __init__(self, message: str, line: int = 0):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class StepBudgetExceeded(Fault):
    pass
