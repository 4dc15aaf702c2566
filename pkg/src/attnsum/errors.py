"""Exception hierarchy shared by the whole package.

The CLI maps these onto exit codes: ConfigError -> 2, DataError -> 3,
InvariantError -> 4.
"""


class AttnsumError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(AttnsumError):
    """Invalid parameter set: bad spec values, missing files, bad CLI usage."""


class DataError(AttnsumError):
    """Well-formed request but malformed or inconsistent input data."""


class IngestError(DataError):
    """Parse failure in an input file; carries the offending location.

    ``line`` is 1-based (header is line 1) and optional: structural problems
    that are not tied to a single line leave it as None.
    """

    def __init__(self, message: str, path=None, line=None):
        loc = ""
        if path is not None:
            loc = f"{path}: "
        if line is not None:
            loc = f"{path}:{line}: " if path is not None else f"line {line}: "
        super().__init__(f"{loc}{message}")
        self.path = path
        self.line = line


class InvariantError(AttnsumError):
    """An internal consistency check failed; indicates a bug, not bad input."""
