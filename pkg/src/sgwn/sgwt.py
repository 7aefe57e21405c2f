"""The stacked SGWT operator W, its adjoint, and the wavelet-domain diagonal filter.

``forward`` maps a graph signal X (N x d) to the band stack
[h(L) X; g(a_1 L) X; ...; g(a_J L) X]. ``adjoint`` maps a band stack back
by re-filtering each band and summing; since every band filter is a
symmetric matrix function of L this is the exact transpose of ``forward``.
It is not a pseudo-inverse: ``adjoint(forward(x))`` equals the frame
operator sum_b f_b(L)^2 x.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

from . import chebyshev
from .chebyshev import ChebyshevOperator, WaveletCoefficients
from .errors import ValidationError
from .graph import Spectrum
from .kernels import KernelSpec

__all__ = [
    "ExactOperator",
    "WaveletCoefficients",
    "forward",
    "adjoint",
    "diag_filter",
    "forward_array",
    "adjoint_array",
]


@dataclass(frozen=True)
class ExactOperator:
    """Filter bank evaluated through a full eigendecomposition (non-approximated mode)."""

    spec: KernelSpec
    spectrum: Spectrum

    @property
    def band_count(self) -> int:
        return self.spec.band_count

    @property
    def num_nodes(self) -> int:
        return self.spectrum.num_nodes

    @property
    def provenance(self) -> str:
        return "exact"


Operator = Union[ChebyshevOperator, ExactOperator]


def _resolve(op) -> Operator:
    if isinstance(op, (ChebyshevOperator, ExactOperator)):
        return op
    if isinstance(op, tuple) and len(op) == 2:
        return ExactOperator(*op)
    raise TypeError(f"expected a ChebyshevOperator, ExactOperator or (KernelSpec, Spectrum), got {type(op).__name__}")


def _check_nodes(op: Operator, a: np.ndarray, what: str):
    if a.ndim < 2 or a.shape[-2] != op.num_nodes:
        raise ValidationError(f"{what} of shape {a.shape} does not match a {op.num_nodes}-node operator")


def forward_array(op: Operator, x: np.ndarray) -> np.ndarray:
    """W x for x of shape (..., N, d); returns (..., B, N, d)."""
    _check_nodes(op, x, "signal")
    if isinstance(op, ChebyshevOperator):
        return chebyshev.filter_bank(op.coeffs.bands, op.laplacian.matrix, op.coeffs.lambda_max, x)
    return chebyshev.spectral_filter_bank(op.spec, op.spectrum, x)


def adjoint_array(op: Operator, c: np.ndarray) -> np.ndarray:
    """W^T c for c of shape (..., B, N, d); returns (..., N, d)."""
    if c.ndim < 3 or c.shape[-3] != op.band_count:
        raise ValidationError(f"coefficient stack of shape {c.shape} does not have {op.band_count} bands")
    _check_nodes(op, c, "coefficient stack")
    if isinstance(op, ChebyshevOperator):
        return chebyshev.filter_bank_adjoint(op.coeffs.bands, op.laplacian.matrix, op.coeffs.lambda_max, c)
    return chebyshev.spectral_filter_bank_adjoint(op.spec, op.spectrum, c)


def forward(op, x) -> WaveletCoefficients:
    op = _resolve(op)
    x = np.asarray(x, dtype=float)
    vector = x.ndim == 1
    data = forward_array(op, x[:, None] if vector else x)
    if vector:
        data = data[..., 0]
    return WaveletCoefficients(data, op.provenance, op.spec.has_scaling)


def adjoint(op, coeffs) -> np.ndarray:
    op = _resolve(op)
    c = coeffs.data if isinstance(coeffs, WaveletCoefficients) else np.asarray(coeffs, dtype=float)
    vector = c.ndim == 2
    out = adjoint_array(op, c[..., None] if vector else c)
    return out[..., 0] if vector else out


def diag_filter(coeffs: WaveletCoefficients, theta) -> WaveletCoefficients:
    """Scale entry (b, n, :) by theta[b * N + n]; one parameter per band-node pair."""
    data = coeffs.data
    b, n = data.shape[-3], data.shape[-2]
    theta = np.asarray(theta, dtype=float).ravel()
    if theta.size != b * n:
        raise ValidationError(f"theta has {theta.size} entries, expected {b} bands x {n} nodes = {b * n}")
    return WaveletCoefficients(data * theta.reshape(b, n, 1), coeffs.provenance, coeffs.has_scaling)
