"""Projected stochastic gradient descent over the waveform and threshold.

Plain SGD with two constraint projections after every step: each waveform
entry back onto the unit circle, the threshold onto [0, inf).  No momentum,
no schedules.  Per-sample gradients inside a batch are accumulated in
ascending sample order so runs are bit-reproducible.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalError
from .gradients import compute_gradients
from .metrics import waveform_error
from .network import NetworkParams, forward_encode, loss
from .waveform import WaveformCoefficients, as_values, project_unit_modulus


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 0  # 0 means full batch
    learning_rate_w: float = 1e-4
    learning_rate_tau: float = 1e-6
    seed: int = 0
    enforce_stationarity: bool = False
    snapshot_every: int = 0  # 0 disables waveform snapshots

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.learning_rate_w <= 0 or self.learning_rate_tau <= 0:
            raise ValueError("learning rates must be positive")
        if self.batch_size < 0:
            raise ValueError("batch_size must be >= 0")


@dataclass
class TrainingRecord:
    """Per-epoch history plus the final parameters and a config echo."""

    loss: np.ndarray  # (epochs,) mean training loss after each epoch
    threshold: np.ndarray  # (epochs,)
    wall_time: np.ndarray  # (epochs,) seconds per epoch
    waveform_error: np.ndarray | None  # (epochs,), None without ground truth
    initial_loss: float
    initial_waveform_error: float | None
    params: NetworkParams
    config: TrainConfig
    snapshots: dict = field(default_factory=dict)  # epoch -> waveform values copy

    @property
    def epoch_count(self) -> int:
        return len(self.loss)


def _mean_batch_gradient(params: NetworkParams, batch, sample_ids):
    grad_w = np.zeros(params.sensing.shape[0], dtype=np.complex128)
    grad_tau = 0.0
    for idx, d in zip(sample_ids, batch):
        trace = forward_encode(params, d)
        bundle = compute_gradients(params, trace, d)
        if not (np.all(np.isfinite(bundle.waveform_gradient.view(float)))
                and np.isfinite(bundle.threshold_gradient)):
            raise NumericalError(f"non-finite gradient for sample {idx}")
        grad_w += bundle.waveform_gradient
        grad_tau += bundle.threshold_gradient
    return grad_w / len(batch), grad_tau / len(batch)


def _average_over_slow_time(grad: np.ndarray, params: NetworkParams) -> np.ndarray:
    n_freq = params.sensing.frequency_count
    n_slow = params.sensing.slow_time_count
    if n_freq <= 0 or n_slow <= 0:
        raise ValueError("sensing matrix lacks the (I, J) split needed for stationarity")
    profile = grad.reshape(n_slow, n_freq).mean(axis=0)
    return np.tile(profile, n_slow)


def sgd_step(params: NetworkParams, batch, config: TrainConfig) -> NetworkParams:
    """One projected gradient step from the batch-averaged gradients.

    The cached weight matrix is reused unchanged: projection keeps |w_m| = 1,
    which is exactly the condition under which it is waveform-independent.
    """
    batch = [np.asarray(d, dtype=np.complex128).reshape(-1) for d in batch]
    if not batch:
        raise ValueError("batch must be nonempty")
    grad_w, grad_tau = _mean_batch_gradient(params, batch, range(len(batch)))
    if config.enforce_stationarity:
        grad_w = _average_over_slow_time(grad_w, params)

    new_w = as_values(params.waveform) - config.learning_rate_w * grad_w
    stationary = getattr(params.waveform, "stationary", False) and config.enforce_stationarity
    waveform = project_unit_modulus(WaveformCoefficients(new_w, stationary=stationary))
    threshold = max(params.threshold - config.learning_rate_tau * grad_tau, 0.0)
    return params.with_parameters(waveform=waveform, threshold=threshold)


def _mean_loss(params: NetworkParams, samples) -> float:
    return float(np.mean([loss(forward_encode(params, d).synthesized, d) for d in samples]))


def train(params: NetworkParams, dataset, config: TrainConfig, truth=None) -> TrainingRecord:
    """Run projected SGD for config.epochs epochs over the dataset.

    ``dataset`` is a (T, M) array or list of measurement vectors.  ``truth``
    may be the true waveform (or a (waveform, scenes) pair) and enables the
    normalized waveform-mismatch column.  Deterministic for a fixed config,
    seed, and dataset.
    """
    samples = [np.asarray(d, dtype=np.complex128).reshape(-1) for d in dataset]
    if not samples:
        raise ValueError("dataset must be nonempty")
    w_true = None
    if truth is not None:
        w_true = as_values(truth[0] if isinstance(truth, tuple) else truth)

    rng = np.random.default_rng(config.seed)
    n_samples = len(samples)
    batch = config.batch_size if 0 < config.batch_size < n_samples else n_samples

    initial_loss = _mean_loss(params, samples)
    initial_werr = None if w_true is None else waveform_error(w_true, as_values(params.waveform))

    losses, thresholds, times = [], [], []
    werrs = [] if w_true is not None else None
    snapshots = {}
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        if batch < n_samples:
            order = rng.permutation(n_samples)
        else:
            order = np.arange(n_samples)
        for start in range(0, n_samples, batch):
            ids = order[start:start + batch]
            try:
                params = sgd_step(params, [samples[i] for i in ids], config)
            except NumericalError as err:
                raise NumericalError(f"epoch {epoch}: {err}") from err
        times.append(time.perf_counter() - t0)
        losses.append(_mean_loss(params, samples))
        thresholds.append(params.threshold)
        if werrs is not None:
            werrs.append(waveform_error(w_true, as_values(params.waveform)))
        if config.snapshot_every > 0 and epoch % config.snapshot_every == 0:
            snapshots[epoch] = as_values(params.waveform).copy()

    return TrainingRecord(
        loss=np.array(losses),
        threshold=np.array(thresholds),
        wall_time=np.array(times),
        waveform_error=None if werrs is None else np.array(werrs),
        initial_loss=initial_loss,
        initial_waveform_error=initial_werr,
        params=params,
        config=config,
        snapshots=snapshots,
    )
