from .features import (
    FeatureLayout,
    FeatureVector,
    apply_standardizer,
    feature_layout,
    fit_standardizer,
    impute_missing,
    minmax_normalize,
    read_features_bin,
    read_features_csv,
    series_features,
    sliding_stats,
    to_sequences,
    write_features_bin,
    write_features_csv,
)
from .smote import smote_oversample
from .wavelets import WaveletDecomposition, dwt_decompose, dwt_reconstruct

__all__ = [
    "FeatureLayout",
    "FeatureVector",
    "WaveletDecomposition",
    "apply_standardizer",
    "dwt_decompose",
    "dwt_reconstruct",
    "feature_layout",
    "fit_standardizer",
    "impute_missing",
    "minmax_normalize",
    "read_features_bin",
    "read_features_csv",
    "series_features",
    "sliding_stats",
    "smote_oversample",
    "to_sequences",
    "write_features_bin",
    "write_features_csv",
]
