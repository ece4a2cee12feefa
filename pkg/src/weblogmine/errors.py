class DomainError(ValueError):
    """An argument lies outside the domain an operation is defined on."""


class InternalError(RuntimeError):
    """An internal consistency guarantee was violated."""


class UsageError(Exception):
    """Bad command-line usage or an unsupported output format."""
