"""Squared envelope spectrum (SES) and fault-frequency location."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError
from ..sgwt import forward_array

MIN_LENGTH = 16


@dataclass(frozen=True)
class SesResult:
    freqs: np.ndarray
    magnitude: np.ndarray
    fs: float
    source: str = "raw"

    @property
    def resolution(self) -> float:
        n = 2 * (self.freqs.size - 1)
        return self.fs / n if n else self.fs


@dataclass(frozen=True)
class LocateReport:
    located: bool
    peak_hz: float
    magnitude: float
    prominence: float


def analytic_signal(x) -> np.ndarray:
    """Frequency-domain Hilbert construction: zero negative bins, double positive, keep DC and Nyquist."""
    x = np.asarray(x, dtype=float)
    n = x.size
    h = np.zeros(n)
    h[0] = 1.0
    if n % 2 == 0:
        h[n // 2] = 1.0
        h[1:n // 2] = 2.0
    else:
        h[1:(n + 1) // 2] = 2.0
    return np.fft.ifft(np.fft.fft(x) * h)


def squared_envelope_spectrum(signal, fs: float, source: str = "raw") -> SesResult:
    """Magnitude spectrum of the mean-removed squared envelope.

    Args:
        signal: real 1-D signal of at least 16 samples.
        fs: sampling frequency in Hz.
        source: free-form tag describing where the signal came from.

    Returns:
        SesResult with ``n // 2 + 1`` bins, magnitudes normalized by ``n``.
    """
    x = np.asarray(signal, dtype=float)
    if x.ndim != 1 or x.size < MIN_LENGTH:
        raise ValidationError(f"SES needs a 1-D signal of at least {MIN_LENGTH} samples, got shape {x.shape}")
    if not fs > 0:
        raise ValidationError("fs must be positive")
    env2 = np.abs(analytic_signal(x)) ** 2
    env2 -= env2.mean()
    mag = np.abs(np.fft.rfft(env2)) / x.size
    return SesResult(np.fft.rfftfreq(x.size, 1.0 / fs), mag, float(fs), source)


def locate_fault_frequency(
    ses: SesResult, f_target: float, tol_bins: int = 1, kappa: float = 3.0, background_bins: int = 25
) -> LocateReport:
    """Is the largest SES value within ``tol_bins`` of ``f_target`` more than ``kappa`` times the median?

    The median is taken over the non-DC bins within ``background_bins`` of
    the target. The SES floor of broadband noise falls off with frequency,
    so a global median would overstate low-frequency peaks.
    """
    if not 0 <= f_target < ses.fs / 2:
        raise ValidationError(f"target {f_target} Hz outside [0, {ses.fs / 2})")
    mag = ses.magnitude
    k0 = int(round(f_target / ses.resolution))
    lo, hi = max(k0 - tol_bins, 0), min(k0 + tol_bins, mag.size - 1)
    k = lo + int(np.argmax(mag[lo:hi + 1]))
    peak = float(mag[k])
    bg = mag[max(k0 - background_bins, 1):min(k0 + background_bins, mag.size - 1) + 1]
    median = float(np.median(bg)) if bg.size else 0.0
    if median > 0:
        prominence = peak / median
    else:
        prominence = float("inf") if peak > 0 else 0.0
    return LocateReport(bool(peak > 0 and prominence > kappa), float(ses.freqs[k]), peak, prominence)


def band_names(spec) -> list:
    names = ["scaling"] if spec.has_scaling else []
    return names + [f"wavelet{j}" for j in range(1, spec.J + 1)]


def feature_ses_report(model, sample, node: int, fs: float) -> list:
    """SES of every first-layer band (before theta) at ``node``, then of that layer's output.

    Returns ``band_count + 1`` :class:`SesResult` objects; tags are
    ``scaling``, ``wavelet1`` .. ``waveletJ`` and ``layer_output``.
    """
    x = np.asarray(getattr(sample, "x", sample), dtype=float)
    n = model.graph.num_nodes
    if not 0 <= node < n:
        raise ValidationError(f"node {node} out of range for {n} nodes")
    layer = model.layers[0]
    bands = forward_array(layer.operator, x[None])[0]
    out, _ = layer.forward(x[None], training=False)
    names = band_names(model.kernel)
    results = [squared_envelope_spectrum(bands[b, node], fs, names[b]) for b in range(bands.shape[0])]
    results.append(squared_envelope_spectrum(out[0, node], fs, "layer_output"))
    return results
