from app.ir.errors import (
    ArityMismatchError, ConfigError, DfiError, DuplicateValueError, FixpointLimitError,
    IRSyntaxError, IRValidationError, PreprocessError, ReportSchemaError, UnknownSymbolError, UseBeforeDefError,
)
from app.ir.model import (
    Block, BranchTarget, ExternDecl, Function, Module, Operation, Terminator, Value,
)
from app.ir.parser import parse_file, parse_module
from app.ir.printer import print_module
from app.ir.validator import Diagnostic, ensure_valid, validate

__all__ = [
    "ArityMismatchError", "ConfigError", "DfiError", "DuplicateValueError", "FixpointLimitError",
    "IRSyntaxError", "IRValidationError", "PreprocessError", "ReportSchemaError", "UnknownSymbolError",
    "UseBeforeDefError",
    "Block", "BranchTarget", "ExternDecl", "Function", "Module", "Operation", "Terminator", "Value",
    "parse_file", "parse_module", "print_module",
    "Diagnostic", "ensure_valid", "validate",
]
