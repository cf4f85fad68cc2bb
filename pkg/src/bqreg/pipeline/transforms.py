"""Column transforms applied between ingestion and design construction.

The implementations live in :mod:`bqreg.model` because design construction
applies them; they are re-exported here for pipeline code.
"""

from ..model import _log, apply_transforms, transform_column

__all__ = ["_log", "apply_transforms", "transform_column"]
