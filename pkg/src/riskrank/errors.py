"""Exception hierarchy shared by every module."""


class DomainError(ValueError):
    """Input outside an operation's domain (empty samples, bad alpha, ...)."""


class ParseError(DomainError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class FormatError(DomainError):
    """Structurally valid lines that violate a file-level constraint."""


class TrainingError(RuntimeError):
    def __init__(self, message: str, epoch: int | None = None):
        self.epoch = epoch
        super().__init__(message if epoch is None else f"epoch {epoch}: {message}")


class DegenerateCovarianceError(DomainError):
    pass
