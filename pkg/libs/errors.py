#   @file errors.py
#   @brief Exception hierarchy shared by the analyzer modules and the CLI.
#   @date 19-Oct-2026

from __future__ import annotations

from typing import Optional


class AnalysisError(Exception):
    """Base class for every error raised by the analyzer."""


class InputError(AnalysisError):
    """Problems with user input (manifest, expressions, CLI usage). Exit code 1."""


class ExprSyntaxError(InputError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.text = text
        super().__init__(f"{message} at offset {offset}")


class UnknownIdentifierError(ExprSyntaxError):
    pass


class ManifestError(InputError):
    def __init__(self, message: str, location: Optional[str] = None):
        self.location = location
        super().__init__(f"{location}: {message}" if location else message)


class ArityError(AnalysisError):
    pass


class UninstantiatedParameterError(InputError):
    pass


class NotBracketGeneratingWithinCap(AnalysisError):
    pass


class NotImmersionError(AnalysisError):
    pass


class EnumerationOverflow(AnalysisError):
    pass


class TruncationError(AnalysisError):
    pass


class PrivilegeError(AnalysisError):
    pass


class DependentFamilyError(AnalysisError):
    pass


class NotRegularError(AnalysisError):
    pass


class PreconditionError(AnalysisError):
    pass


class ProbeError(AnalysisError):
    pass
