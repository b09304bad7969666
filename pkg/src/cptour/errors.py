"""Exception types shared across the package."""


class InputError(ValueError):
    """Invalid arguments or malformed problem data."""


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GenerationError(RuntimeError):
    """Instance generator could not satisfy its constraints."""


class ContractViolation(RuntimeError):
    """An operation was called on a state that breaks its precondition."""
