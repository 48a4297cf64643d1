"""Analytic complex gradients of the measurement-mismatch loss.

The loss l(w, tau) = ||diag(w) F rho*(w, tau) - d||^2 is a real function of a
complex parameter vector, so the waveform gradient is the conjugated Wirtinger
derivative, grad_w l = conj(dl/dw).  The waveform enters twice: explicitly in
the decoder and through the per-layer bias alpha * F^H diag(conj(w)) d.  The
weight matrix is treated as a constant: under the unit-modulus constraint it
carries no waveform dependence.

Jacobian-shaped quantities below are gradient propagators: the matrix written
for a stage maps the downstream gradient to the upstream one when applied from
the left (it is the transpose of the conventional Jacobian).  Entries with
|z_i^k| <= tau are inactive and contribute nothing anywhere; activity is
strict (y > tau), so zero pre-activations are masked automatically whenever
tau > 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .network import NORM_EPS, LayerTrace, NetworkParams, forward_encode, loss
from .waveform import WaveformCoefficients, as_values


@dataclass
class GradientBundle:
    waveform_gradient: np.ndarray  # (M,) complex, conj-Wirtinger convention
    threshold_gradient: float
    per_layer_image_gradients: list  # L real (N,) vectors, index k-1 <-> layer k


def grad_loss_wrt_image(params: NetworkParams, d_star, d) -> np.ndarray:
    """Gradient of the loss w.r.t. the normalized image: 2 Re(F^H (d* - d))."""
    a = np.asarray(d_star, dtype=np.complex128).reshape(-1)
    b = np.asarray(d, dtype=np.complex128).reshape(-1)
    mat = params.sensing.entries
    if a.shape != b.shape or a.shape[0] != mat.shape[0]:
        raise ValueError("measurement length mismatch")
    w = as_values(params.waveform)
    return 2.0 * np.real(mat.conj().T @ (np.conj(w) * (a - b)))


def grad_normalization(rho_final, downstream, eps: float = NORM_EPS) -> np.ndarray:
    """Pull a gradient back through the unit-peak normalization.

    The propagator is (1/m) I - (1/m^2) u rho^T with m the peak value and u
    the indicator of the argmax entry (ties broken at the lowest index).
    Degenerate input (peak <= eps) returns a zero gradient.
    """
    rho = np.asarray(rho_final, dtype=float).reshape(-1)
    g = np.asarray(downstream, dtype=float).reshape(-1)
    if rho.shape != g.shape:
        raise ValueError("vector length mismatch")
    peak = rho.max(initial=0.0)
    if peak <= eps:
        return np.zeros_like(g)
    j = int(np.argmax(rho))
    out = g / peak
    out[j] -= float(rho @ g) / peak**2
    return out


def _masked_phase(z, y, threshold):
    """Unit phases z/|z| on the active set y > tau, zero elsewhere."""
    mask = y > threshold
    safe = np.where(mask, y, 1.0)
    return mask, np.where(mask, z / safe, 0.0)


def backprop_through_layers(params: NetworkParams, trace: LayerTrace, g_final) -> list:
    """Per-layer image gradients g^k = dl/drho^k for k = 1..L.

    ``g_final`` is the gradient at the last representation (normalization
    already applied).  Moving down, g^{k-1} = Re(Q (u^k . g^k)) with u^k the
    masked pre-activation phases; masked entries drop out exactly.
    """
    layers = params.layer_count
    g_final = np.asarray(g_final, dtype=float).reshape(-1)
    if params.threshold == 0.0 and any(np.any(y == 0.0) for y in trace.magnitudes):
        raise NumericalError(
            "threshold 0 with a vanishing pre-activation: layer derivative undefined"
        )
    q = params.gram.entries
    grads = [None] * layers
    grads[layers - 1] = g_final
    for k in range(layers - 1, 0, -1):
        _, phase = _masked_phase(trace.pre_activations[k], trace.magnitudes[k], params.threshold)
        grads[k - 1] = np.real(q @ (phase * grads[k]))
    return grads


def compute_gradients(params: NetworkParams, trace: LayerTrace, d) -> GradientBundle:
    """Full gradient bundle for one training sample.

    Degenerate traces (all-zero final representation) contribute zero
    gradient: the normalization derivative does not exist there.
    """
    mat = params.sensing.entries
    m_count, n_count = mat.shape
    d = np.asarray(d, dtype=np.complex128).reshape(-1)
    if d.shape[0] != m_count:
        raise ValueError("measurement length mismatch")
    if trace.degenerate:
        zeros = [np.zeros(n_count) for _ in range(params.layer_count)]
        return GradientBundle(np.zeros(m_count, dtype=np.complex128), 0.0, zeros)

    g_star = grad_loss_wrt_image(params, trace.synthesized, d)
    g_final = grad_normalization(trace.representations[-1], g_star)
    layer_grads = backprop_through_layers(params, trace, g_final)

    # Per-layer bias contributions share the column structure conj(d) * F_{m,i},
    # so they contract to a single matrix-vector product with the accumulated
    # phase-weighted gradients.
    phase_weighted = np.zeros(n_count, dtype=np.complex128)
    tau_grad = 0.0
    for z, y, g in zip(trace.pre_activations, trace.magnitudes, layer_grads):
        mask, phase = _masked_phase(z, y, params.threshold)
        phase_weighted += phase * g
        tau_grad -= float(g[mask].sum())

    e = trace.synthesized - d
    decoder_term = (mat @ trace.final_normalized) * np.conj(e)
    bias_term = 0.5 * params.step_size * np.conj(d) * (mat @ phase_weighted)
    waveform_grad = np.conj(decoder_term + bias_term)
    return GradientBundle(waveform_grad, tau_grad, layer_grads)


def grad_wrt_waveform(params: NetworkParams, trace: LayerTrace, d) -> np.ndarray:
    """Waveform gradient grad_w l = conj(dl/dw) for one sample."""
    return compute_gradients(params, trace, d).waveform_gradient


def grad_wrt_threshold(params: NetworkParams, trace: LayerTrace, per_layer_gradients) -> float:
    """Threshold derivative: minus the sum of active-entry image gradients."""
    total = 0.0
    for y, g in zip(trace.magnitudes, per_layer_gradients):
        mask = y > params.threshold
        total -= float(np.asarray(g)[mask].sum())
    return total


def finite_difference_gradient(params: NetworkParams, d, step: float = 1e-6):
    """Central-difference oracle for (grad_w l, dl/dtau), independent of backprop.

    Differentiates the loss along Re(w_m), Im(w_m), and tau, then converts to
    the conjugated Wirtinger convention via
        dl/dRe(w_m) = 2 Re(dl/dw)_m,   dl/dIm(w_m) = -2 Im(dl/dw)_m.
    Requires the configuration to sit away from thresholding boundaries
    (min |y - tau| > 10 * step * ||d||), otherwise the piecewise activation
    flips inside the stencil and the check is meaningless.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    d = np.asarray(d, dtype=np.complex128).reshape(-1)
    base_trace = forward_encode(params, d)
    margin = min(float(np.min(np.abs(y - params.threshold))) for y in base_trace.magnitudes)
    if margin <= 10.0 * step * np.linalg.norm(d):
        raise NumericalError(
            f"activation boundary within {margin:.3e} of the threshold; "
            "finite-difference check unstable at this step size"
        )

    w0 = as_values(params.waveform)
    stationary = getattr(params.waveform, "stationary", False)

    def loss_at(values, tau):
        p = params.with_parameters(
            waveform=WaveformCoefficients(values, stationary=stationary), threshold=tau
        )
        return loss(forward_encode(p, d).synthesized, d)

    def central(m, unit):
        plus = w0.copy()
        plus[m] += step * unit
        minus = w0.copy()
        minus[m] -= step * unit
        return (loss_at(plus, params.threshold) - loss_at(minus, params.threshold)) / (2 * step)

    grad_w = np.empty(len(w0), dtype=np.complex128)
    for m in range(len(w0)):
        grad_w[m] = 0.5 * (central(m, 1.0) + 1j * central(m, 1.0j))

    tau_plus = loss_at(w0, params.threshold + step)
    tau_minus = loss_at(w0, max(params.threshold - step, 0.0))
    denom = step + (params.threshold - max(params.threshold - step, 0.0))
    grad_tau = (tau_plus - tau_minus) / denom
    return grad_w, float(grad_tau)


def gradient_check_case(sensing, layer_count: int = 2, seed: int = 0, step: float = 1e-6,
                        regularization: float = 10.0):
    """One randomized analytic-vs-oracle comparison on a given operator.

    Draws a random unit-modulus waveform and a random measurement, picks a
    threshold with a comfortable margin to every activation boundary, and
    returns (relative waveform-gradient error, scaled threshold error).
    """
    from .network import make_network_params  # deferred: keeps import graph flat
    from .sensing import matrix_of, max_eigenvalue_estimate

    mat = matrix_of(sensing)
    m_count = mat.shape[0]
    rng = np.random.default_rng(seed)
    w = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, m_count))
    d = rng.standard_normal(m_count) + 1j * rng.standard_normal(m_count)

    alpha = 0.5 / max_eigenvalue_estimate(sensing, tolerance=1e-9)
    params = make_network_params(sensing, w, alpha, regularization, layer_count)
    base_tau = float(np.median(np.abs(alpha * (mat.conj().T @ (np.conj(w) * d)))))
    needed = 20.0 * step * float(np.linalg.norm(d))
    # A usable threshold keeps some entries active (non-vacuous gradients) and
    # sits clear of every activation boundary.
    for factor in (1.0, 1.09, 0.92, 1.21, 0.83, 1.34, 0.74, 1.5, 0.66, 1.7, 0.58, 0.5):
        tau = base_tau * factor
        params = params.with_parameters(threshold=tau)
        trace = forward_encode(params, d)
        margin = min(float(np.min(np.abs(y - tau))) for y in trace.magnitudes)
        if margin > needed and not trace.degenerate:
            break
    else:
        raise NumericalError(f"seed {seed}: no threshold with margin above {needed:.3e} found")

    bundle = compute_gradients(params, trace, d)
    fd_w, fd_tau = finite_difference_gradient(params, d, step)
    rel_w = float(np.linalg.norm(bundle.waveform_gradient - fd_w) / np.linalg.norm(fd_w))
    err_tau = abs(bundle.threshold_gradient - fd_tau) / (abs(fd_tau) + 1.0)
    return rel_w, err_tau
