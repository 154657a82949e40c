#-----------------------------
# :: Base Error
#-----------------------------

"""
Root of every error the toolkit raises on purpose. The CLI maps subclasses to a
machine-readable kind through the `kind` attribute.
"""

class AoccError(Exception):
    kind = "data"


class StreamRangeError(AoccError, ValueError):
    kind = "range"


class IncompatibleStreamError(AoccError):
    kind = "incompatible"


class StreamFormatError(AoccError):
    kind = "format"


class StreamLengthError(AoccError):
    kind = "length"


class PolarityError(AoccError, ValueError):
    kind = "polarity"


class MissingLabelError(AoccError):
    kind = "missing_label"


class ConsistencyError(AoccError):
    kind = "consistency"


class DegenerateInputError(AoccError, ValueError):
    kind = "degenerate_input"


class DegenerateClassError(AoccError, ValueError):
    kind = "degenerate_class"


class UsageError(AoccError):
    """Option combinations argparse cannot express; the CLI exits 2 on it."""
    kind = "usage"


#-----------------------------
# :: CSV Parse Error
#-----------------------------

"""
A malformed CSV row. `line` is the 1-based line number in the source text.
"""

class CsvParseError(AoccError):
    kind = "parse"

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


#-----------------------------
# :: Validation Error
#-----------------------------

"""
Raised by loaders when a decoded stream breaks an invariant; carries the full violation list.
"""

class StreamValidationError(AoccError):
    kind = "invalid_stream"

    def __init__(self, violations):
        self.violations = list(violations)
        head = "; ".join(v.message for v in self.violations[:3])
        more = f" (+{len(self.violations) - 3} more)" if len(self.violations) > 3 else ""
        super().__init__(f"{len(self.violations)} violation(s): {head}{more}")
