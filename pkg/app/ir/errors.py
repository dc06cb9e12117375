"""
Exception types shared by the IR, the engine and the CLI
"""

from typing import List, Optional


class DfiError(Exception):
    """Base class for every error raised by the analysis engine"""
    pass


class IRSyntaxError(DfiError):
    """Raised when .dfir text cannot be parsed"""

    def __init__(self, message: str, line: int = 0, column: int = 0, expected: Optional[str] = None):
        self.message = message
        self.line = line
        self.column = column
        self.expected = expected
        location = f"{line}:{column}: " if line else ""
        hint = f" (expected {expected})" if expected else ""
        super().__init__(f"{location}{message}{hint}")


class DuplicateValueError(IRSyntaxError):
    """Raised when a value id is defined twice in one function"""
    pass


class UseBeforeDefError(IRSyntaxError):
    """Raised when a value is used before (or without) its definition"""
    pass


class IRValidationError(DfiError):
    """Raised when a module fails structural validation"""

    def __init__(self, diagnostics: List[object]):
        self.diagnostics = diagnostics
        lines = "\n".join(f"  {d}" for d in diagnostics)
        super().__init__(f"{len(diagnostics)} validation error(s):\n{lines}")


class UnknownSymbolError(DfiError):
    """Raised when a function, value or operation reference does not resolve"""
    pass


class ArityMismatchError(DfiError):
    """Raised when a call site disagrees with the callee signature or summary"""
    pass


class PreprocessError(DfiError):
    """Raised when a module cannot be preprocessed"""
    pass


class ConfigError(DfiError):
    """Raised when a taint sidecar file is malformed or does not resolve"""
    pass


class FixpointLimitError(DfiError):
    """Raised when a fixpoint loop exceeds settings.max_fixpoint_rounds"""
    pass


class ReportSchemaError(DfiError):
    """Raised when a --json document does not match docs/report.schema.json"""
    pass
