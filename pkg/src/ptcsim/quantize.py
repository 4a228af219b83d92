"""Digital-analog boundary: fake quantization, STE gradients, noise, ADC codes.

Rounding ties go half-away-from-zero everywhere, keeping the symmetric
encode range sign-symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuantizerParams",
    "NoiseModel",
    "round_half_away",
    "fake_quantize",
    "quantize_grad_ste",
    "inject_noise",
    "adc_sample",
    "adc_value",
    "minmax_params",
]


def round_half_away(x: np.ndarray) -> np.ndarray:
    """Round to nearest integer, ties away from zero."""
    x = np.asarray(x)
    return np.sign(x) * np.floor(np.abs(x) + 0.5)


@dataclass(frozen=True)
class QuantizerParams:
    """Per-channel learnable-step-size quantizer parameters.

    alpha and zero_point are broadcast along channel_axis; b-bit signed codes
    span [-2^(b-1), 2^(b-1)-1].
    """

    bits: int
    alpha: np.ndarray
    zero_point: np.ndarray
    channel_axis: int = -1

    def __post_init__(self):
        object.__setattr__(self, "alpha", np.atleast_1d(np.asarray(self.alpha, dtype=float)))
        object.__setattr__(
            self, "zero_point", np.atleast_1d(np.asarray(self.zero_point, dtype=float))
        )
        if not 2 <= self.bits <= 8:
            raise ValueError(f"bits must be in [2, 8], got {self.bits}")
        if np.any(self.alpha <= 0):
            raise ValueError("alpha must be positive elementwise")
        if not np.all(np.isfinite(self.zero_point)):
            raise ValueError("zero_point must be finite")
        if self.zero_point.shape not in ((1,), self.alpha.shape):
            raise ValueError("zero_point shape must match alpha")

    @property
    def q_min(self) -> int:
        return -(2 ** (self.bits - 1))

    @property
    def q_max(self) -> int:
        return 2 ** (self.bits - 1) - 1

    def _expand(self, vec: np.ndarray, ndim: int) -> np.ndarray:
        if vec.size == 1:
            return vec.reshape(())
        shape = [1] * ndim
        shape[self.channel_axis] = vec.size
        return vec.reshape(shape)


def _check_channels(x: np.ndarray, p: QuantizerParams) -> None:
    if p.alpha.size not in (1, x.shape[p.channel_axis]):
        raise ValueError(
            f"alpha length {p.alpha.size} does not match tensor channel dim "
            f"{x.shape[p.channel_axis]}"
        )


def fake_quantize(x: np.ndarray, p: QuantizerParams) -> np.ndarray:
    """Quantize-dequantize onto the per-channel lattice (q - z) * alpha.

    Idempotent: applying the transform twice returns the first result exactly.
    """
    x = np.asarray(x, dtype=float)
    _check_channels(x, p)
    alpha = p._expand(p.alpha, x.ndim)
    z = p._expand(p.zero_point, x.ndim)
    v = np.clip(x / alpha + z, p.q_min, p.q_max)
    return (round_half_away(v) - z) * alpha


def quantize_grad_ste(
    upstream: np.ndarray, x: np.ndarray, p: QuantizerParams
) -> tuple[np.ndarray, np.ndarray]:
    """Backward pass of fake_quantize.

    grad_x uses the straight-through estimator: upstream passes where
    x/alpha + z lands inside the clip range, zero outside.  grad_alpha is the
    exact local derivative of the quantizer output with respect to alpha
    (rounded code minus zero-point inside the range, the clip code at the
    rails), reduced over all non-channel axes; this is the quantity a central
    finite difference on fake_quantize measures.
    """
    upstream = np.asarray(upstream, dtype=float)
    x = np.asarray(x, dtype=float)
    if upstream.shape != x.shape:
        raise ValueError(f"upstream shape {upstream.shape} != x shape {x.shape}")
    _check_channels(x, p)
    alpha = p._expand(p.alpha, x.ndim)
    z = p._expand(p.zero_point, x.ndim)
    v = x / alpha + z
    below = v < p.q_min
    above = v > p.q_max
    in_range = ~(below | above)

    grad_x = upstream * in_range

    dq_dalpha = np.where(
        in_range,
        round_half_away(np.clip(v, p.q_min, p.q_max)) - z,
        np.where(below, p.q_min - z, p.q_max - z),
    )
    weighted = upstream * dq_dalpha
    if p.alpha.size == 1:
        grad_alpha = np.array([weighted.sum()])
    else:
        axes = tuple(i for i in range(x.ndim) if i != p.channel_axis % x.ndim)
        grad_alpha = weighted.sum(axis=axes)
    return grad_x, grad_alpha


@dataclass(frozen=True)
class NoiseModel:
    """Multiplicative Gaussian hardware noise: std = sigma * |value|.

    The default intensity is the value measured in modulator chip testing.
    Parallel workers draw from independent substreams of the same seed.
    """

    sigma: float = 0.0031
    seed: int = 0
    enabled: bool = True

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")

    def rng(self, stream: int = 0) -> np.random.Generator:
        return np.random.default_rng([self.seed, stream])


def inject_noise(x_q: np.ndarray, nm: NoiseModel, stream: int = 0) -> np.ndarray:
    """Add zero-mean Gaussian noise with elementwise std sigma * |x_q|."""
    x_q = np.asarray(x_q, dtype=float)
    if not nm.enabled or nm.sigma == 0.0:
        return x_q.copy()
    rng = nm.rng(stream)
    return x_q + rng.standard_normal(x_q.shape) * (nm.sigma * np.abs(x_q))


def adc_sample(v, full_scale: float, bits: int):
    """Mid-rise uniform quantization of v clipped to +-full_scale.

    Codes run 0 .. 2^bits - 1; the reconstruction lattice is
    (code - (2^(bits-1) - 0.5)) * full_scale / 2^(bits-1), so adc_value is
    the documented inverse.
    """
    if not 2 <= bits <= 12:
        raise ValueError(f"adc bits must be in [2, 12], got {bits}")
    if full_scale <= 0:
        raise ValueError(f"full_scale must be > 0, got {full_scale}")
    v = np.asarray(v, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("adc input must be finite")
    half = 2 ** (bits - 1)
    delta = full_scale / half
    code = np.floor(v / delta) + half
    code = np.clip(code, 0, 2 * half - 1).astype(int)
    return code if code.ndim else int(code)


def adc_value(code, full_scale: float, bits: int):
    """Reconstruction value at the center of an ADC code bin."""
    half = 2 ** (bits - 1)
    return (np.asarray(code, dtype=float) - (half - 0.5)) * full_scale / half


def minmax_params(x: np.ndarray, bits: int, channel_axis: int = -1, per_channel: bool = False) -> QuantizerParams:
    """Min-max initialization of quantizer parameters (symmetric, z = 0)."""
    x = np.asarray(x, dtype=float)
    if per_channel:
        axes = tuple(i for i in range(x.ndim) if i != channel_axis % x.ndim)
        peak = np.abs(x).max(axis=axes)
    else:
        peak = np.atleast_1d(np.abs(x).max())
    peak = np.where(peak > 0, peak, 1.0)
    alpha = peak / (2 ** (bits - 1))
    return QuantizerParams(
        bits=bits,
        alpha=alpha,
        zero_point=np.zeros_like(alpha),
        channel_axis=channel_axis,
    )
