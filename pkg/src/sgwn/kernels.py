"""Scaling and wavelet kernels of the spectral graph wavelet transform.

Three families are provided:

* ``mexican_hat``: g(x) = x exp(-x) with the low-pass scaling kernel below.
* ``cubic_spline``: monomial / cubic / inverse-monomial piecewise kernel,
  sharing the Mexican-hat scaling kernel.
* ``heat``: g(x) = exp(-x) with no scaling kernel. It does not vanish at
  the origin, so it fails the admissibility check, but it is kept as a
  comparison variant.

All kernels clamp negative spectral arguments to zero: a Laplacian spectrum
is nonnegative and negative values only come from rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigurationError, ValidationError

FAMILIES = ("mexican_hat", "cubic_spline", "heat")

GAMMA_GRID_POINTS = 10_000
DEFAULT_PROBE_FACTOR = 1e4

# Admissibility tolerances.
G_ZERO_TOL = 1e-12
DECAY_TOL = 1e-6


def scales(lambda_max: float, Q: float = 2.0, J: int = 2) -> np.ndarray:
    """Geometric scale ladder from 1/lambda_max up to 2/lambda_min, lambda_min = lambda_max/Q."""
    if lambda_max <= 0:
        raise ValidationError(f"lambda_max must be positive, got {lambda_max}")
    if Q <= 1:
        raise ValidationError(f"Q must exceed 1, got {Q}")
    if J < 1:
        raise ValidationError(f"J must be at least 1, got {J}")
    a_first = 1.0 / lambda_max
    if J == 1:
        return np.array([a_first])
    a_last = 2.0 / (lambda_max / Q)
    j = np.arange(J)
    return a_first * (a_last / a_first) ** (j / (J - 1))


def _mexican_hat(x):
    return x * np.exp(-x)


def _heat(x):
    return np.exp(-x)


def _cubic_spline(x, alpha, beta, lam1, lam2):
    x = np.asarray(x, dtype=float)
    low = lam1 ** (-alpha) * x ** alpha
    mid = -5.0 + 11.0 * x - 6.0 * x ** 2 + x ** 3
    # Written lambda_2^beta * x^-beta so the branch decays and joins s(lam2) continuously.
    with np.errstate(divide="ignore"):
        high = lam2 ** beta * np.where(x > 0, x, np.inf) ** (-beta)
    return np.where(x < lam1, low, np.where(x <= lam2, mid, high))


@dataclass(frozen=True)
class KernelSpec:
    """A wavelet kernel, optional scaling kernel and the scale ladder they are sampled at."""

    family: str
    scales: tuple
    lambda_max: float
    Q: float = 2.0
    gamma: Optional[float] = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ConfigurationError(f"unknown kernel family {self.family!r}")
        s = tuple(float(a) for a in self.scales)
        if len(s) < 1:
            raise ValidationError("at least one scale is required")
        if any(a <= 0 for a in s) or any(b <= a for a, b in zip(s, s[1:])):
            raise ValidationError("scales must be positive and strictly increasing")
        if self.lambda_max <= 0:
            raise ValidationError("lambda_max must be positive")
        if self.has_scaling and not (self.gamma is not None and self.gamma > 0):
            raise ValidationError("a scaling kernel needs gamma > 0")
        object.__setattr__(self, "scales", s)

    @property
    def J(self) -> int:
        return len(self.scales)

    @property
    def has_scaling(self) -> bool:
        return self.family != "heat"

    @property
    def band_count(self) -> int:
        return self.J + 1 if self.has_scaling else self.J

    def g(self, x):
        """Mother wavelet kernel evaluated at x (already scaled)."""
        x = np.maximum(np.asarray(x, dtype=float), 0.0)
        if self.family == "mexican_hat":
            return _mexican_hat(x)
        if self.family == "heat":
            return _heat(x)
        p = self.params
        return _cubic_spline(x, p["alpha"], p["beta"], p["lam1"], p["lam2"])

    def wavelet(self, lam, j: int):
        """g(a_j * lam) for the j-th scale (zero-based)."""
        lam = np.maximum(np.asarray(lam, dtype=float), 0.0)
        return self.g(self.scales[j] * lam)

    def scaling(self, lam):
        """h(lam) = gamma * exp(-(Q lam / (0.6 lambda_max))**4)."""
        if not self.has_scaling:
            raise ConfigurationError(f"the {self.family} family has no scaling kernel")
        lam = np.maximum(np.asarray(lam, dtype=float), 0.0)
        # One printed form of this kernel uses the first power of the ratio; the
        # fourth power is the one that gives the flat low-pass shape and is used here.
        return self.gamma * np.exp(-((self.Q * lam / (0.6 * self.lambda_max)) ** 4))

    def filters(self) -> list:
        """Band kernels as callables of lambda, in stacking order [h, g(a_1.), ..., g(a_J.)]."""
        out: list[Callable] = []
        if self.has_scaling:
            out.append(self.scaling)
        for j in range(self.J):
            out.append(lambda lam, j=j: self.wavelet(lam, j))
        return out

    def band_responses(self, lam) -> np.ndarray:
        """Stack of band responses, shape (band_count, len(lam))."""
        lam = np.atleast_1d(np.asarray(lam, dtype=float))
        return np.stack([f(lam) for f in self.filters()])

    def with_lambda_max(self, lambda_max: float) -> "KernelSpec":
        """Rebuild this family with the same design parameters for a new spectrum bound."""
        return make_kernel(self.family, lambda_max, J=self.J, Q=self.Q, **self.params)


def mexican_hat(Q: float = 2.0, lambda_max: float = 2.0, J: int = 2) -> KernelSpec:
    return KernelSpec("mexican_hat", tuple(scales(lambda_max, Q, J)), lambda_max, Q, gamma=float(np.exp(-1.0)))


def _grid_max(g, scale_set, lambda_max, Q) -> float:
    lam = np.linspace(0.0, Q * lambda_max, GAMMA_GRID_POINTS)
    return float(max(np.max(g(a * lam)) for a in scale_set))


def cubic_spline(
    Q: float = 2.0,
    lambda_max: float = 2.0,
    J: int = 2,
    alpha: float = 2.0,
    beta: float = 2.0,
    lam1: float = 1.0,
    lam2: float = 2.0,
) -> KernelSpec:
    if not 0 < lam1 < lam2:
        raise ValidationError(f"need 0 < lam1 < lam2, got {lam1}, {lam2}")
    params = {"alpha": float(alpha), "beta": float(beta), "lam1": float(lam1), "lam2": float(lam2)}
    a = scales(lambda_max, Q, J)
    gamma = _grid_max(lambda x: _cubic_spline(x, alpha, beta, lam1, lam2), a, lambda_max, Q)
    return KernelSpec("cubic_spline", tuple(a), lambda_max, Q, gamma=gamma, params=params)


def heat(lambda_max: float = 2.0, J: int = 2, Q: float = 2.0) -> KernelSpec:
    return KernelSpec("heat", tuple(scales(lambda_max, Q, J)), lambda_max, Q)


def make_kernel(family: str, lambda_max: float, J: int = 2, Q: float = 2.0, **params) -> KernelSpec:
    """Build a kernel family by name."""
    if family == "mexican_hat":
        return mexican_hat(Q, lambda_max, J)
    if family == "cubic_spline":
        return cubic_spline(Q, lambda_max, J, **params)
    if family == "heat":
        return heat(lambda_max, J, Q)
    raise ConfigurationError(f"unknown kernel family {family!r}")


@dataclass(frozen=True)
class AdmissibilityReport:
    g_at_zero: tuple
    g_at_probe: tuple
    h_at_zero: Optional[float]
    h_at_probe: Optional[float]
    lambda_probe: float
    failures: tuple

    @property
    def passed(self) -> bool:
        return not self.failures


def check_admissibility(spec: KernelSpec, lambda_probe: Optional[float] = None) -> AdmissibilityReport:
    """Check g(0) = 0, g -> 0, h(0) > 0, h -> 0 numerically at a far probe point.

    The probe defaults to 1e4 * lambda_max, far enough out that the
    polynomially decaying cubic spline is below the decay tolerance.
    Never raises; inspect ``failures`` instead.
    """
    if lambda_probe is None:
        lambda_probe = DEFAULT_PROBE_FACTOR * spec.lambda_max
    g0 = tuple(float(spec.wavelet(0.0, j)) for j in range(spec.J))
    gp = tuple(float(spec.wavelet(lambda_probe, j)) for j in range(spec.J))
    failures = []
    for j, (a, b) in enumerate(zip(g0, gp)):
        if abs(a) > G_ZERO_TOL:
            failures.append(f"g(a_{j + 1} * 0) = {a:.6g} != 0")
        if abs(b) > DECAY_TOL:
            failures.append(f"g(a_{j + 1} * probe) = {b:.6g} does not decay")
    h0 = hp = None
    if spec.has_scaling:
        h0 = float(spec.scaling(0.0))
        hp = float(spec.scaling(lambda_probe))
        if not h0 > 0:
            failures.append(f"h(0) = {h0:.6g} is not positive")
        if abs(hp) > DECAY_TOL:
            failures.append(f"h(probe) = {hp:.6g} does not decay")
    return AdmissibilityReport(g0, gp, h0, hp, float(lambda_probe), tuple(failures))


@dataclass(frozen=True)
class FrameProfile:
    lam: np.ndarray
    h: Optional[np.ndarray]
    g: np.ndarray
    sum_sq: np.ndarray
    lower: float
    upper: float


def frame_profile(spec: KernelSpec, grid: int = 1001) -> FrameProfile:
    """Sum of squared band responses over [0, lambda_max] and its extremes on (0, lambda_max]."""
    if grid < 2:
        raise ValidationError("grid needs at least two points")
    lam = np.linspace(0.0, spec.lambda_max, grid)
    g = np.stack([spec.wavelet(lam, j) for j in range(spec.J)])
    h = spec.scaling(lam) if spec.has_scaling else None
    total = np.sum(g ** 2, axis=0)
    if h is not None:
        total = total + h ** 2
    inner = total[1:]
    return FrameProfile(lam, h, g, total, float(inner.min()), float(inner.max()))
