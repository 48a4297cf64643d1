"""Unrolled proximal-gradient encoder, normalization, and linear decoder.

Each of the L layers applies rho <- max(|Q rho + alpha F^H d| - tau, 0): a
gradient step on the data-fit term followed by phaseless soft thresholding,
so every representation is a real nonnegative image.  The final layer output
is normalized to unit peak and re-projected into measurement space by the
linear decoder d* = diag(w) F rho*.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .sensing import GramOperator, SensingMatrix, apply_adjoint, apply_forward, build_gram
from .waveform import WaveformCoefficients, as_values

# Peak values at or below this are treated as a degenerate (all-zero) image.
NORM_EPS = 1e-12


@dataclass
class NetworkParams:
    """Learnable {waveform, threshold} plus the fixed network structure.

    The weight matrix ``gram`` is cached here: under the unit-modulus
    constraint it never changes during training, and gradient computations
    deliberately treat it as a constant.
    """

    waveform: WaveformCoefficients
    threshold: float  # tau >= 0
    step_size: float  # alpha
    regularization: float  # lambda
    layer_count: int  # L
    gram: GramOperator
    sensing: SensingMatrix

    def with_parameters(self, waveform=None, threshold=None) -> "NetworkParams":
        """Copy with updated learnable parameters; structure is shared."""
        out = replace(self)
        if waveform is not None:
            out.waveform = waveform
        if threshold is not None:
            out.threshold = float(threshold)
        return out


def make_network_params(
    sensing: SensingMatrix,
    waveform,
    step_size: float,
    regularization: float = 10.0,
    layer_count: int = 4,
    threshold: float | None = None,
) -> NetworkParams:
    """Assemble NetworkParams, building the cached weight matrix.

    The threshold defaults to step_size * regularization, the scale at which
    the thresholding matches the proximity operator of the l1 penalty.
    """
    if layer_count < 1:
        raise ValueError("layer_count must be >= 1")
    if step_size <= 0:
        raise ValueError("step_size must be positive")
    if threshold is None:
        threshold = step_size * regularization
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    if not isinstance(waveform, WaveformCoefficients):
        waveform = WaveformCoefficients(waveform)
    if not isinstance(sensing, SensingMatrix):
        sensing = SensingMatrix(np.asarray(sensing, dtype=np.complex128))
    gram = build_gram(sensing, waveform, step_size)
    return NetworkParams(
        waveform=waveform,
        threshold=float(threshold),
        step_size=float(step_size),
        regularization=float(regularization),
        layer_count=int(layer_count),
        gram=gram,
        sensing=sensing,
    )


@dataclass
class LayerTrace:
    """Everything the forward pass produced, retained for backpropagation."""

    pre_activations: list  # L complex (N,) vectors z^k
    magnitudes: list  # L real (N,) vectors y^k = |z^k|
    representations: list  # L real nonnegative (N,) vectors rho^k
    final_normalized: np.ndarray  # rho* (N,)
    synthesized: np.ndarray  # d* (M,)
    degenerate: bool  # final layer output had no usable peak


def phaseless_soft_threshold(values, threshold: float) -> np.ndarray:
    """Element-wise max(|v| - tau, 0): real, nonnegative output."""
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    return np.maximum(np.abs(np.asarray(values)) - threshold, 0.0)


def normalize(representation, eps: float = NORM_EPS) -> np.ndarray:
    """Scale a nonnegative image to unit peak; degenerate input passes through."""
    rho = np.asarray(representation, dtype=float)
    peak = rho.max(initial=0.0)
    if peak <= eps:
        return rho.copy()
    return rho / peak


def forward_encode(params: NetworkParams, data) -> LayerTrace:
    """Run the L-layer encoder, normalization, and decoder on one measurement.

    The bias alpha * F^H diag(conj(w)) d is computed once per call.
    """
    d = np.asarray(data, dtype=np.complex128).reshape(-1)
    mat = params.sensing.entries
    if d.shape[0] != mat.shape[0]:
        raise ValueError(f"data length {d.shape[0]} != measurement count {mat.shape[0]}")

    bias = params.step_size * apply_adjoint(params.sensing, params.waveform, d)
    q = params.gram.entries
    rho = np.zeros(mat.shape[1])
    pre, mags, reps = [], [], []
    for _ in range(params.layer_count):
        z = q @ rho + bias
        y = np.abs(z)
        rho = np.maximum(y - params.threshold, 0.0)
        pre.append(z)
        mags.append(y)
        reps.append(rho)

    peak = rho.max(initial=0.0)
    degenerate = peak <= NORM_EPS
    rho_star = rho.copy() if degenerate else rho / peak
    d_star = decode(params, rho_star)
    return LayerTrace(pre, mags, reps, rho_star, d_star, degenerate)


def decode(params: NetworkParams, rho_star) -> np.ndarray:
    """Linear decoder: synthesize the measurement diag(w) F rho*."""
    return apply_forward(params.sensing, params.waveform, rho_star)


def loss(d_star, d) -> float:
    """Squared l2 mismatch ||d* - d||^2 between synthesized and received data."""
    a = np.asarray(d_star, dtype=np.complex128).reshape(-1)
    b = np.asarray(d, dtype=np.complex128).reshape(-1)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    e = a - b
    return float(np.vdot(e, e).real)
