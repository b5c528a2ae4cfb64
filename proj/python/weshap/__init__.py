"""Python bindings for the weshap labeling-function valuation engine."""

from ._core import (
    Bundle,
    ConfigError,
    DataError,
    ProxyConfig,
    WeShapResult,
    __version__,
    blobs,
    compute,
    exact_shapley,
    fine_revision,
    fingerprint,
    load_bundle,
    motivating_example,
    prune,
    rank_curve,
    report_json,
    running_example,
    scores,
    sv_tables,
)

__all__ = [
    "Bundle",
    "ConfigError",
    "DataError",
    "ProxyConfig",
    "WeShapResult",
    "__version__",
    "blobs",
    "compute",
    "exact_shapley",
    "fine_revision",
    "fingerprint",
    "load_bundle",
    "motivating_example",
    "prune",
    "rank_curve",
    "report_json",
    "running_example",
    "scores",
    "sv_tables",
]
