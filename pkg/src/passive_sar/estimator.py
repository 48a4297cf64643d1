"""Scikit-learn style front end for the recurrent auto-encoder.

``fit`` learns the transmit waveform and threshold from raw measurements
(unsupervised); ``transform`` reconstructs normalized reflectivity images.
The estimator composes with sklearn tooling (get_params/set_params, clone,
pipelines), while the functional modules stay usable on their own.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .metrics import data_mismatch
from .network import forward_encode, make_network_params
from .sensing import SensingMatrix, max_eigenvalue_estimate
from .training import TrainConfig, train
from .validation import check_measurements
from .waveform import as_values, init_all_ones

# Fraction of the 1/lambda_max bound used when the step size is chosen
# automatically; leaves headroom for the eigenvalue estimation tolerance.
AUTO_STEP_SAFETY = 0.99


class PassiveSarImager(BaseEstimator, TransformerMixin):
    """Joint waveform estimation and sparse scene reconstruction.

    Parameters
    ----------
    sensing : SensingMatrix
        Discretized phase-kernel forward operator for the acquisition.
    layers : int
        Unrolled iteration count L.
    step_size : float or None
        Gradient step alpha; None picks just under 1 / lambda_max(F^H F).
    regularization : float
        Sparsity weight lambda; the initial threshold is alpha * lambda.
    epochs, batch_size, learning_rate_w, learning_rate_tau, enforce_stationarity :
        Projected-SGD training controls (batch_size 0 = full batch).
    random_state : int
        Seed for batch shuffling.
    """

    def __init__(
        self,
        sensing: SensingMatrix | None = None,
        layers: int = 4,
        step_size: float | None = None,
        regularization: float = 10.0,
        epochs: int = 10,
        batch_size: int = 0,
        learning_rate_w: float = 1e-4,
        learning_rate_tau: float = 1e-6,
        enforce_stationarity: bool = False,
        random_state: int = 0,
    ):
        self.sensing = sensing
        self.layers = layers
        self.step_size = step_size
        self.regularization = regularization
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate_w = learning_rate_w
        self.learning_rate_tau = learning_rate_tau
        self.enforce_stationarity = enforce_stationarity
        self.random_state = random_state

    def _resolve_step_size(self) -> float:
        lam_max = max_eigenvalue_estimate(self.sensing, tolerance=1e-3)
        if self.step_size is None:
            return AUTO_STEP_SAFETY / lam_max
        if self.step_size > 1.0 / lam_max * (1 + 1e-9):
            raise ValueError(
                f"step_size {self.step_size} exceeds the stability bound {1.0 / lam_max:.3e}"
            )
        return float(self.step_size)

    def fit(self, X, y=None):
        """Learn {waveform, threshold} from measurements X of shape (T, M)."""
        if self.sensing is None:
            raise ValueError("a SensingMatrix is required before fitting")
        X = check_measurements(X, n_features=self.sensing.shape[0])
        alpha = self._resolve_step_size()
        params = make_network_params(
            self.sensing,
            init_all_ones(self.sensing.shape[0]),
            step_size=alpha,
            regularization=self.regularization,
            layer_count=self.layers,
        )
        config = TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate_w=self.learning_rate_w,
            learning_rate_tau=self.learning_rate_tau,
            seed=self.random_state,
            enforce_stationarity=self.enforce_stationarity,
        )
        record = train(params, X, config)
        self.network_ = record.params
        self.waveform_ = as_values(record.params.waveform).copy()
        self.threshold_ = record.params.threshold
        self.step_size_ = alpha
        self.history_ = record
        self.n_features_in_ = X.shape[1]
        return self

    def _check_fitted(self):
        if not hasattr(self, "network_"):
            raise NotFittedError("this PassiveSarImager instance is not fitted yet")

    def transform(self, X) -> np.ndarray:
        """Reconstruct a normalized reflectivity image per measurement row."""
        self._check_fitted()
        X = check_measurements(X, n_features=self.n_features_in_)
        return np.stack([forward_encode(self.network_, d).final_normalized for d in X])

    def score(self, X, y=None) -> float:
        """Negative mean normalized data mismatch (higher is better)."""
        self._check_fitted()
        X = check_measurements(X, n_features=self.n_features_in_)
        mismatches = [
            data_mismatch(self.network_, forward_encode(self.network_, d).final_normalized, d)
            for d in X
        ]
        return -float(np.mean(mismatches))
