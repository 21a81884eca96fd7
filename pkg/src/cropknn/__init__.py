"""Field-level crop type classification from satellite time series.

Pipeline: grid bundles -> cloud-masked per-field median series ->
percentile outlier masking -> Savitzky-Golay gap filling -> NDVI feature
vectors -> cosine-kNN classification -> balanced-undersampling
cross-validation experiments.
"""

from .bundle import read_bundle, write_bundle
from .experiments import (
    cross_validate,
    run_suite,
    select_k,
    stratified_folds,
    undersample,
)
from .grids import CROP_CLASSES, FieldSeries, FieldTable, Scene, SceneStack
from .indices import FeatureDataset, FeatureVector, build_features, gcvi, ndvi
from .knn import KnnModel, cosine_distance, predict, predict_batch
from .preprocess import (
    PreprocessConfig,
    cloud_mask,
    extract_field_series,
    field_median,
    percentile_mask,
    savgol_fill,
)

__version__ = "0.1.0"
