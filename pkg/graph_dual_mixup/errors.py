"""Exception hierarchy shared by every Graph Dual Mixup module.

The CLI maps these to exit codes: usage problems exit 1, data problems exit 2,
numeric failures exit 3.
"""


class GdmError(Exception):
    """Base class for all errors raised by graph_dual_mixup."""


class ContractViolation(GdmError, ValueError):
    """Raised when a caller breaks an operation's precondition."""


class ConfigError(GdmError, ValueError):
    """Raised for malformed config files, unknown keys or invalid values."""


class DatasetError(GdmError):
    """Base class for dataset problems."""


class DatasetLoadError(DatasetError, FileNotFoundError):
    """Raised when a mandatory dataset file is missing."""


class DatasetFormatError(DatasetError, ValueError):
    """Raised when dataset content is malformed.

    The message names the offending file and 1-based line number.
    """


class LabelBudgetError(DatasetError, ValueError):
    """Raised when a fold cannot supply the requested labels per class."""


class CheckpointError(GdmError, ValueError):
    """Raised when a checkpoint file is unreadable or does not match its model kind."""


class NumericError(GdmError, FloatingPointError):
    """Raised when NaN or Inf shows up in a tensor."""


class KernelUsageError(GdmError, RuntimeError):
    """Raised when the compute tape or optimizer is driven incorrectly."""


__all__ = [
    "GdmError",
    "ContractViolation",
    "ConfigError",
    "DatasetError",
    "DatasetLoadError",
    "DatasetFormatError",
    "LabelBudgetError",
    "CheckpointError",
    "NumericError",
    "KernelUsageError",
]
