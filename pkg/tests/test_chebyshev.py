import numpy as np
import pytest

from sgwn.chebyshev import (
    apply,
    build_operator,
    cheb_coeffs,
    cheb_eval,
    exact_apply,
)
from sgwn.errors import ConfigurationError, NumericalError, ValidationError
from sgwn.graph import Graph, LaplacianMatrix, eigendecompose, laplacian
from sgwn.kernels import cubic_spline, heat, mexican_hat

from conftest import random_graph


def test_coeffs_of_constant():
    c = cheb_coeffs(lambda lam: np.ones_like(lam), 3.0, 6)
    np.testing.assert_allclose(c, [2, 0, 0, 0, 0, 0, 0], atol=1e-10)


def test_coeffs_of_identity():
    c = cheb_coeffs(lambda lam: lam, 2.0, 5)
    np.testing.assert_allclose(c, [2, 1, 0, 0, 0, 0], atol=1e-12)
    lam = np.linspace(0, 2, 101)
    np.testing.assert_allclose(cheb_eval(c, lam, 2.0), lam, atol=1e-12)


def test_exponential_series_accuracy():
    c = cheb_coeffs(lambda lam: np.exp(-lam), 2.0, 30)
    lam = np.linspace(0, 2, 10_001)
    assert np.max(np.abs(cheb_eval(c, lam, 2.0) - np.exp(-lam))) < 1e-12


def test_coeff_preconditions():
    with pytest.raises(ValidationError):
        cheb_coeffs(np.exp, 2.0, 0)
    with pytest.raises(ValidationError):
        cheb_coeffs(np.exp, 2.0, 5, quad_points=10)


def test_nonfinite_kernel_names_node():
    with pytest.raises(NumericalError, match="theta"):
        cheb_coeffs(lambda lam: np.where(lam > 1.0, np.nan, lam), 2.0, 3)


def test_build_operator_shapes(k3):
    lap = laplacian(k3)
    op = build_operator(mexican_hat(2, lap.lambda_max, 2), lap, 2)
    assert op.coeffs.bands.shape == (3, 3)
    op_h = build_operator(heat(lap.lambda_max, 2), lap, 2)
    assert op_h.coeffs.bands.shape == (2, 3)
    spec = mexican_hat(2, lap.lambda_max, 2)
    np.testing.assert_array_equal(build_operator(spec, lap, 4).coeffs.bands[0], cheb_coeffs(spec.scaling, lap.lambda_max, 4))


def test_build_operator_lambda_mismatch(k3):
    lap = laplacian(k3)
    with pytest.raises(ConfigurationError):
        build_operator(mexican_hat(2, lap.lambda_max * 2, 2), lap, 2)


def _custom_operator(lap, funcs, K):
    """Operator whose bands are arbitrary functions (reuses build_operator machinery)."""
    from sgwn.chebyshev import ChebyshevCoefficients, ChebyshevOperator

    bands = np.stack([cheb_coeffs(f, lap.lambda_max, K) for f in funcs])
    spec = mexican_hat(2, lap.lambda_max, len(funcs) - 1)
    return ChebyshevOperator(ChebyshevCoefficients(bands, K, lap.lambda_max, True), lap, spec)


def test_apply_identity_and_laplacian(rng):
    lap = laplacian(random_graph(7, rng))
    op = _custom_operator(lap, [lambda lam: np.ones_like(lam), lambda lam: lam], 3)
    x = rng.standard_normal((7, 4))
    out = apply(op, x).data
    np.testing.assert_allclose(out[0], x, atol=1e-10)
    np.testing.assert_allclose(out[1], lap.matrix @ x, atol=1e-10)


def test_apply_rejects_bad_shape(k3):
    lap = laplacian(k3)
    op = build_operator(mexican_hat(2, lap.lambda_max, 2), lap, 2)
    with pytest.raises(ValidationError):
        apply(op, np.zeros((4, 2)))


def _band_errors(approx, exact):
    return np.array([np.linalg.norm(approx[b] - exact[b]) / max(np.linalg.norm(exact[b]), 1e-300) for b in range(exact.shape[0])])


@pytest.mark.parametrize("seed", range(5))
def test_apply_matches_exact_mexican_hat(seed):
    rng = np.random.default_rng(seed)
    lap = laplacian(random_graph(10, rng))
    spec = mexican_hat(2, lap.lambda_max, 3)
    x = rng.standard_normal((10, 5))
    err = _band_errors(apply(build_operator(spec, lap, 40), x).data, exact_apply(spec, eigendecompose(lap), x).data)
    # The steep scaling kernel converges more slowly than the wavelet bands.
    assert err[0] <= 1e-6
    assert np.all(err[1:] <= 1e-8)


@pytest.mark.parametrize("seed", range(8))
def test_error_decreases_with_order(seed):
    rng = np.random.default_rng(100 + seed)
    n = int(rng.integers(4, 13))
    lap = laplacian(random_graph(n, rng))
    spec = [mexican_hat(2, lap.lambda_max, 2), cubic_spline(2, lap.lambda_max, 2)][seed % 2]
    x = rng.standard_normal((n, 3))
    exact = exact_apply(spec, eigendecompose(lap), x).data
    errs = [_band_errors(apply(build_operator(spec, lap, K), x).data, exact).max() for K in (5, 10, 20, 40)]
    for lo, hi in zip(errs[1:], errs[:-1]):
        assert lo <= max(hi, 1e-13)


@pytest.mark.parametrize("seed", range(5))
def test_operator_error_bounded_by_polynomial_error(seed):
    rng = np.random.default_rng(200 + seed)
    lap = laplacian(random_graph(8, rng))
    spectrum = eigendecompose(lap)
    spec = mexican_hat(2, lap.lambda_max, 2)
    K = 6
    op = build_operator(spec, lap, K)
    x = rng.standard_normal(8)
    approx = apply(op, x).data
    exact = exact_apply(spec, spectrum, x).data
    for b, f in enumerate(spec.filters()):
        poly_err = np.max(np.abs(cheb_eval(op.coeffs.bands[b], spectrum.values, lap.lambda_max) - f(spectrum.values)))
        assert np.linalg.norm(approx[b] - exact[b]) <= poly_err * np.linalg.norm(x) * (1 + 1e-9) + 1e-14


def test_linearity(rng):
    lap = laplacian(random_graph(9, rng))
    op = build_operator(mexican_hat(2, lap.lambda_max, 3), lap, 12)
    x, y = rng.standard_normal((2, 9, 4))
    a, b = 1.7, -0.3
    lhs = apply(op, a * x + b * y).data
    rhs = a * apply(op, x).data + b * apply(op, y).data
    assert np.linalg.norm(lhs - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_permutation_equivariance(rng):
    lap = laplacian(random_graph(8, rng))
    perm = rng.permutation(8)
    lap_p = LaplacianMatrix(lap.matrix[np.ix_(perm, perm)], lap.lambda_max)
    spec = mexican_hat(2, lap.lambda_max, 2)
    x = rng.standard_normal((8, 3))
    out = apply(build_operator(spec, lap, 10), x).data
    out_p = apply(build_operator(spec, lap_p, 10), x[perm]).data
    np.testing.assert_allclose(out_p, out[:, perm], atol=1e-12)


def test_exact_constant_signal_kills_wavelets(rng):
    lap = laplacian(random_graph(6, rng))
    spec = mexican_hat(2, lap.lambda_max, 3)
    out = exact_apply(spec, eigendecompose(lap), np.full((6, 2), 3.0)).data
    np.testing.assert_allclose(out[1:], 0, atol=1e-12)
    np.testing.assert_allclose(out[0], spec.scaling(0.0) * 3.0, rtol=1e-12)


def test_exact_eigenvector_filtering(rng):
    lap = laplacian(random_graph(7, rng))
    spectrum = eigendecompose(lap)
    spec = mexican_hat(2, lap.lambda_max, 2)
    for l in range(7):
        u = spectrum.vectors[:, l]
        out = exact_apply(spec, spectrum, u).data
        for j in range(2):
            np.testing.assert_allclose(out[j + 1], spec.wavelet(spectrum.values[l], j) * u, atol=1e-12)


def test_exact_delta_on_path(path2):
    # Spectrum {0, 2}: u0 = [1, 1]/sqrt2, u1 = [1, -1]/sqrt2, so delta_0 = (u0 + u1)/sqrt2.
    spec = mexican_hat(2, 2.0, 1)  # single scale a = 1/2
    out = exact_apply(spec, eigendecompose(laplacian(path2)), np.array([1.0, 0.0])).data
    g2 = 1.0 * np.exp(-1.0)  # g(a * 2) = 1 * e^-1
    np.testing.assert_allclose(out[1], [g2 / 2, -g2 / 2], atol=1e-14)
    h0, h2 = np.exp(-1.0), np.exp(-1.0) * np.exp(-((2 * 2 / 1.2) ** 4))
    np.testing.assert_allclose(out[0], [(h0 + h2) / 2, (h0 - h2) / 2], atol=1e-14)
