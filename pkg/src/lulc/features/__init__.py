"""Per-image texture descriptors and the dataset-level feature matrix."""

from .haralick import HARALICK_NAMES, GlcmSpec, glcm, glcm_from_levels, haralick_features, quantize
from .hog import (
    HogSpec,
    gradient_magnitude_orientation,
    gradients,
    hog_descriptor,
    luminance,
)
from .lgbphs import GaborBankSpec, LgbphsSpec, gabor_bank, lbp_map, lgbphs_descriptor
from .matrix import (
    FeatureMatrix,
    FeatureSpecs,
    extract_all,
    load_features,
    load_features_csv,
    save_features,
    save_features_csv,
)

__all__ = [
    "FeatureMatrix",
    "FeatureSpecs",
    "GaborBankSpec",
    "GlcmSpec",
    "HARALICK_NAMES",
    "HogSpec",
    "LgbphsSpec",
    "extract_all",
    "gabor_bank",
    "glcm",
    "glcm_from_levels",
    "gradient_magnitude_orientation",
    "gradients",
    "haralick_features",
    "hog_descriptor",
    "lbp_map",
    "lgbphs_descriptor",
    "load_features",
    "load_features_csv",
    "luminance",
    "quantize",
    "save_features",
    "save_features_csv",
]
