"""Shifted-Chebyshev approximation of kernel-of-Laplacian operators.

A kernel f on [0, lambda_max] is expanded as

    f(lam) ~ c_0 / 2 + sum_{k=1..K} c_k T_k(2 lam / lambda_max - 1)

and f(L) x is then evaluated with the three-term recurrence on vectors,
never forming T_k(L) as a matrix. Every band of a filter bank shares the
same recurrence terms, so a whole bank costs K matrix products per input.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigurationError, NumericalError, ValidationError
from .graph import LaplacianMatrix, Spectrum
from .kernels import KernelSpec


def default_quad_points(K: int) -> int:
    return max(500, 8 * (K + 1))


def cheb_coeffs(f: Callable, lambda_max: float, K: int, quad_points: int | None = None) -> np.ndarray:
    """Coefficients c_0..c_K of f on [0, lambda_max] by midpoint quadrature in theta.

    c_k = (2/pi) * integral_0^pi cos(k theta) f(lambda_max (cos theta + 1) / 2) dtheta
    """
    if K < 1:
        raise ValidationError(f"order K must be at least 1, got {K}")
    n = default_quad_points(K) if quad_points is None else int(quad_points)
    if n < 4 * (K + 1):
        raise ValidationError(f"quad_points must be at least 4(K+1) = {4 * (K + 1)}, got {n}")
    theta = np.pi * (np.arange(n) + 0.5) / n
    values = np.asarray(f(lambda_max * (np.cos(theta) + 1.0) / 2.0), dtype=float)
    bad = np.flatnonzero(~np.isfinite(values))
    if bad.size:
        raise NumericalError(f"kernel is not finite at quadrature node theta = {theta[bad[0]]:.17g}")
    k = np.arange(K + 1)
    return (2.0 / n) * (np.cos(np.outer(k, theta)) @ values)


def cheb_eval(coeffs, lam, lambda_max: float) -> np.ndarray:
    """Evaluate the truncated series at scalar points (half-weight on c_0)."""
    c = np.asarray(coeffs, dtype=float)
    t = 2.0 * np.asarray(lam, dtype=float) / lambda_max - 1.0
    prev, cur = np.ones_like(t), t
    out = 0.5 * c[0] * prev
    if c.size > 1:
        out = out + c[1] * cur
    for ck in c[2:]:
        prev, cur = cur, 2.0 * t * cur - prev
        out = out + ck * cur
    return out


@dataclass(frozen=True)
class ChebyshevCoefficients:
    """Per-band coefficients, shape (bands, K + 1); band 0 is the scaling kernel when present."""

    bands: np.ndarray
    order: int
    lambda_max: float
    has_scaling: bool

    def __post_init__(self):
        b = np.array(self.bands, dtype=float)
        if b.ndim != 2 or b.shape[1] != self.order + 1:
            raise ValidationError(f"expected (bands, {self.order + 1}) coefficients, got {b.shape}")
        if not np.all(np.isfinite(b)):
            raise NumericalError("non-finite Chebyshev coefficients")
        b.setflags(write=False)
        object.__setattr__(self, "bands", b)

    @property
    def band_count(self) -> int:
        return self.bands.shape[0]


@dataclass(frozen=True)
class ChebyshevOperator:
    """Matrix-free stacked filter bank [h(L); g(a_1 L); ...; g(a_J L)] of order K."""

    coeffs: ChebyshevCoefficients
    laplacian: LaplacianMatrix
    spec: KernelSpec

    @property
    def band_count(self) -> int:
        return self.coeffs.band_count

    @property
    def num_nodes(self) -> int:
        return self.laplacian.num_nodes

    @property
    def provenance(self) -> str:
        return f"chebyshev({self.coeffs.order})"


@dataclass(frozen=True)
class WaveletCoefficients:
    """Band stack of shape (..., B, N, d) in order [scaling; a_1; ...; a_J]."""

    data: np.ndarray
    provenance: str
    has_scaling: bool = True

    @property
    def band_count(self) -> int:
        return self.data.shape[-3]

    def band(self, b: int) -> np.ndarray:
        return self.data[..., b, :, :]


def build_operator(spec: KernelSpec, lap: LaplacianMatrix, K: int, quad_points: int | None = None) -> ChebyshevOperator:
    if K < 1:
        raise ValidationError(f"order K must be at least 1, got {K}")
    if not math.isclose(spec.lambda_max, lap.lambda_max, rel_tol=1e-12):
        raise ConfigurationError(
            f"kernel designed for lambda_max={spec.lambda_max!r} but Laplacian bound is {lap.lambda_max!r}"
        )
    bands = np.stack([cheb_coeffs(f, lap.lambda_max, K, quad_points) for f in spec.filters()])
    return ChebyshevOperator(ChebyshevCoefficients(bands, K, lap.lambda_max, spec.has_scaling), lap, spec)


def _as_signal(x, n: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    vector = x.ndim == 1
    if vector:
        x = x[:, None]
    if x.ndim < 2 or x.shape[-2] != n:
        raise ValidationError(f"signal of shape {x.shape} does not have {n} node rows")
    return x, vector


def filter_bank(bands: np.ndarray, lap: np.ndarray, lambda_max: float, x: np.ndarray) -> np.ndarray:
    """Apply every band polynomial to x of shape (..., N, d); returns (..., B, N, d)."""
    K = bands.shape[1] - 1
    shifted = (2.0 / lambda_max) * lap - np.eye(lap.shape[0])
    t_prev = x
    out = 0.5 * bands[:, 0, None, None] * x[..., None, :, :]
    t_cur = shifted @ x
    out = out + bands[:, 1, None, None] * t_cur[..., None, :, :]
    for k in range(2, K + 1):
        t_prev, t_cur = t_cur, 2.0 * (shifted @ t_cur) - t_prev
        out += bands[:, k, None, None] * t_cur[..., None, :, :]
    return out


def filter_bank_adjoint(bands: np.ndarray, lap: np.ndarray, lambda_max: float, c: np.ndarray) -> np.ndarray:
    """sum_b p_b(L) c_b for c of shape (..., B, N, d); returns (..., N, d)."""
    K = bands.shape[1] - 1
    shifted = (2.0 / lambda_max) * lap - np.eye(lap.shape[0])
    w = bands[:, :, None, None]
    t_prev = c
    acc = 0.5 * w[:, 0] * c
    t_cur = shifted @ c
    acc = acc + w[:, 1] * t_cur
    for k in range(2, K + 1):
        t_prev, t_cur = t_cur, 2.0 * (shifted @ t_cur) - t_prev
        acc += w[:, k] * t_cur
    return acc.sum(axis=-3)


def apply(op: ChebyshevOperator, x) -> WaveletCoefficients:
    """Forward filter bank by the shifted-Chebyshev recurrence."""
    x, vector = _as_signal(x, op.num_nodes)
    data = filter_bank(op.coeffs.bands, op.laplacian.matrix, op.coeffs.lambda_max, x)
    if vector:
        data = data[..., 0]
    return WaveletCoefficients(data, op.provenance, op.coeffs.has_scaling)


def spectral_filter_bank(spec: KernelSpec, spectrum: Spectrum, x: np.ndarray) -> np.ndarray:
    u = spectrum.vectors
    resp = spec.band_responses(spectrum.values)
    xhat = u.T @ x
    return u @ (resp[:, :, None] * xhat[..., None, :, :])


def spectral_filter_bank_adjoint(spec: KernelSpec, spectrum: Spectrum, c: np.ndarray) -> np.ndarray:
    u = spectrum.vectors
    resp = spec.band_responses(spectrum.values)
    chat = u.T @ c
    return u @ np.sum(resp[:, :, None] * chat, axis=-3)


def exact_apply(spec: KernelSpec, spectrum: Spectrum, x) -> WaveletCoefficients:
    """Filter bank evaluated in the Laplacian eigenbasis (reference for ``apply``)."""
    x, vector = _as_signal(x, spectrum.num_nodes)
    data = spectral_filter_bank(spec, spectrum, x)
    if vector:
        data = data[..., 0]
    return WaveletCoefficients(data, "exact", spec.has_scaling)
