"""Zero-mean unit-variance observation encoding (the state-space Phi).

Statistics are fit once when a dataset is frozen and travel with it;
they are never recomputed at evaluation time.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .exceptions import DataFormatError

# dimensions with no variation in a corpus (e.g. lights never toggled)
# get this floor so transform stays finite and maps constants to zero
SCALE_FLOOR = 1e-6


class ObservationNormalizer(BaseEstimator, TransformerMixin):
    """Per-dimension affine map (x - mean_) / scale_."""

    def fit(self, X, y=None):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[0] == 0:
            raise DataFormatError(f"cannot fit normalizer on shape {X.shape}")
        self.mean_ = X.mean(axis=0)
        self.scale_ = np.maximum(X.std(axis=0), SCALE_FLOOR)
        if not (np.isfinite(self.mean_).all() and np.isfinite(self.scale_).all()):
            raise DataFormatError("non-finite normalization statistics")
        return self

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        return (X - self.mean_) / self.scale_

    def inverse_transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        return X * self.scale_ + self.mean_

    # stats travel inside dataset headers and model checkpoints
    def to_dict(self) -> dict:
        return {"mean": self.mean_.tolist(), "std": self.scale_.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ObservationNormalizer":
        norm = cls()
        norm.mean_ = np.asarray(d["mean"], dtype=np.float64)
        norm.scale_ = np.asarray(d["std"], dtype=np.float64)
        if norm.mean_.shape != norm.scale_.shape or norm.mean_.ndim != 1:
            raise DataFormatError("malformed normalization statistics")
        if (norm.scale_ <= 0).any():
            raise DataFormatError("normalization std must be positive")
        return norm
