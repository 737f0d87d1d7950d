"""
Exception hierarchy for the QuickSync toolkit.

Each error carries a short reason code so callers (the node state
machine, the simulator, the CLI) can branch on it without parsing
messages.
"""

from typing import Any, Dict, Optional


class QuickSyncError(Exception):
    """Base class for every error raised by the toolkit."""


class ValidationError(QuickSyncError):
    """
    A header, block or chain failed structural validation.

    Attributes:
        reason: Stable reason code (e.g. 'stake mismatch', 'broken link')
        details: Extra context for logs and trace files
    """

    def __init__(self, reason: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(reason)
        self.reason = reason
        self.details = details or {}


class KeyEvolutionError(QuickSyncError):
    """A slot key was used at the wrong slot or rewound."""


class NoValidChainError(QuickSyncError):
    """No chain of the required length is known for the slot."""


class CheckpointConflictError(QuickSyncError):
    """An offered chain forks below the node's frozen checkpoint."""


class AnalysisError(QuickSyncError, ValueError):
    """Numeric preconditions of an analysis routine do not hold."""


class ConfigError(QuickSyncError):
    """
    A configuration file or flag is invalid.

    Attributes:
        field: Offending key (dotted path) or None for file-level problems
        line: 1-based line number in the config file, when known
    """

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        super().__init__(message)
        self.message = message
        self.field = field
        self.line = line

    def diagnostic(self) -> str:
        """Return 'line N: field: message' with whatever parts are known."""
        parts = []
        if self.line is not None:
            parts.append(f'line {self.line}')
        if self.field:
            parts.append(self.field)
        parts.append(self.message)
        return ': '.join(parts)
