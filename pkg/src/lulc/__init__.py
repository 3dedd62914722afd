"""Land-use/land-cover classification toolkit.

Preprocessing, hybrid texture descriptors (HOG, LGBPHS, Haralick),
human-group particle swarm feature selection and an LSTM classifier.
"""

from .errors import (
    ConfigError,
    DimensionError,
    FormatError,
    IngestError,
    LulcError,
    TrainingDivergedError,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DimensionError",
    "FormatError",
    "IngestError",
    "LulcError",
    "TrainingDivergedError",
]
