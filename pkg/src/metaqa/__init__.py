"""Metadata quality scoring and prediction for open educational resources."""

__version__ = "0.1.0"

PROFILE_FORMAT = "metaqa-profile/1"
MODEL_FORMAT = "metaqa-model/1"
REPORT_FORMAT = "metaqa-report/1"
FEATURES_FORMAT = "metaqa-features/1"
