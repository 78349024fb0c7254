"""Exception types shared across the package.

Everything derives from CsfkitError so callers can catch broadly;
the CLI maps these to exit code 1 and argparse misuse to exit code 2.
"""


class CsfkitError(Exception):
    """Base class for all csfkit errors."""


class FormatError(CsfkitError, ValueError):
    """Malformed input file (bad magic, truncation, unparseable rows)."""


class DomainError(CsfkitError, ValueError):
    """Arguments outside an operation's documented domain."""


class OracleError(CsfkitError, KeyError):
    """A complexity oracle was queried for a value it does not have."""


class CompressionError(CsfkitError, RuntimeError):
    """A compressor backend failed or produced an unusable result."""


class NumericError(CsfkitError, ArithmeticError):
    """A numeric routine failed to converge or hit a guarded division."""


class SizeLimitError(CsfkitError, ValueError):
    """Input exceeds a hard combinatorial size cap (e.g. exhaustive search)."""
