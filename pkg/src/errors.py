from typing import Optional


class NsconvError(Exception):
    """Base class for every error raised by the package"""


class ConfigError(NsconvError, ValueError):
    """Invalid run configuration"""


class FieldFormatError(NsconvError, ValueError):
    """Malformed scattered-data file"""

    def __init__(self, message: str, row: int):
        super().__init__(f"row {row}: {message}")
        self.row = row


class NotPositiveDefiniteError(NsconvError, ValueError):
    """Cholesky failed even after the largest jitter"""

    def __init__(self, pivot: int, jitter: float):
        super().__init__(
            f"matrix is not positive definite (failing pivot {pivot}, jitter {jitter:.1e})"
        )
        self.pivot = pivot
        self.jitter = jitter


class ModelFormatError(NsconvError, ValueError):
    """Unreadable or incompatible model file"""

    def __init__(self, message: str, section: Optional[str] = None):
        prefix = f"section '{section}': " if section else ""
        super().__init__(prefix + message)
        self.section = section


class FitError(NsconvError, RuntimeError):
    """Likelihood could not be evaluated at any start"""


class PartitionError(NsconvError, RuntimeError):
    """No usable restart in subregion selection"""


class TrainingError(NsconvError, RuntimeError):
    """Classifier training diverged or got unusable data"""
