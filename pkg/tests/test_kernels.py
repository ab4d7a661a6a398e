import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcid_hub.core.exceptions import BadParameterError, DegenerateCovariatesError, DimensionMismatchError
from mcid_hub.core.kernels import KernelSpec, cross_gram, gram, kernel_eval, resolve_bandwidth
from mcid_hub.core.models import make_rng

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_linear_gram_is_inner_products(rng):
    z = rng.standard_normal((5, 3))
    matrix = gram(KernelSpec.linear(), z)
    assert np.allclose(matrix.K, z @ z.T)
    assert matrix.is_symmetric(0.0)
    assert matrix.is_psd()


def test_gaussian_gram_properties(rng):
    z = rng.standard_normal((8, 2))
    matrix = gram(KernelSpec.gaussian(1.5), z)
    assert np.all(np.diag(matrix.K) == 1.0)
    assert matrix.is_symmetric(0.0)
    assert matrix.is_psd()
    assert np.all((matrix.K > 0) & (matrix.K <= 1))
    assert matrix.K[0, 1] == pytest.approx(kernel_eval(KernelSpec.gaussian(1.5), z[0], z[1]))


def test_gram_is_read_only(rng):
    with pytest.raises(ValueError):
        gram(KernelSpec.linear(), rng.standard_normal((3, 2))).K[0, 0] = 1.0


def test_cross_gram_agrees_with_gram(rng):
    z = rng.standard_normal((6, 2))
    spec = KernelSpec.gaussian(0.7)
    assert np.allclose(cross_gram(spec, z, z), gram(spec, z).K)


def test_subset_keeps_rows_and_columns(rng):
    z = rng.standard_normal((6, 2))
    matrix = gram(KernelSpec.linear(), z)
    sub = matrix.subset([4, 1])
    assert np.allclose(sub.K, matrix.K[np.ix_([4, 1], [4, 1])])
    assert np.array_equal(sub.anchors, z[[4, 1]])


def test_gaussian_eval():
    spec = KernelSpec.gaussian(2.0)
    assert kernel_eval(spec, [0.0, 0.0], [2.0, 0.0]) == pytest.approx(np.exp(-1.0))
    assert kernel_eval(KernelSpec.linear(), [1.0, 2.0], [3.0, 4.0]) == 11.0


def test_median_bandwidth():
    z = np.array([[0.0], [1.0], [3.0]])
    assert resolve_bandwidth(z) == 2.0
    assert resolve_bandwidth(z, squared=True) == 4.0
    spec = KernelSpec.gaussian(bandwidth_rule="median_squared").resolve(z)
    assert spec.sigma2 == 4.0
    assert spec.is_resolved


def test_degenerate_covariates():
    with pytest.raises(DegenerateCovariatesError):
        resolve_bandwidth(np.ones((4, 2)))
    with pytest.raises(DegenerateCovariatesError):
        resolve_bandwidth(np.ones((1, 2)))


def test_unresolved_gaussian_is_rejected():
    with pytest.raises(BadParameterError):
        gram(KernelSpec.gaussian(), np.eye(2))


def test_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        kernel_eval(KernelSpec.linear(), [1.0], [1.0, 2.0])
    with pytest.raises(DimensionMismatchError):
        cross_gram(KernelSpec.linear(), np.ones((2, 2)), np.ones((2, 3)))


def test_spec_validation_and_dict():
    with pytest.raises(BadParameterError):
        KernelSpec("polynomial")
    with pytest.raises(BadParameterError):
        KernelSpec.gaussian(-1.0)
    spec = KernelSpec.gaussian(0.5, "median_squared")
    assert KernelSpec.from_dict(spec.as_dict()) == spec


@settings(deadline=None)
@given(seed=seeds, n=st.integers(1, 7), p=st.integers(1, 4), sigma2=st.floats(0.1, 10.0))
def test_gram_matches_pairwise_eval(seed, n, p, sigma2):
    z = make_rng(seed).standard_normal((n, p))
    for spec in (KernelSpec.linear(), KernelSpec.gaussian(sigma2)):
        K = gram(spec, z).K
        expected = [[kernel_eval(spec, z[i], z[j]) for j in range(n)] for i in range(n)]
        assert np.allclose(K, expected, rtol=1e-12, atol=1e-12)


@settings(deadline=None)
@given(seed=seeds, n=st.integers(2, 12))
def test_median_bandwidth_ignores_row_order(seed, n):
    rng = make_rng(seed)
    z = rng.standard_normal((n, 3))
    shuffled = z[rng.permutation(n)]
    for squared in (False, True):
        assert resolve_bandwidth(shuffled, squared) == pytest.approx(resolve_bandwidth(z, squared), rel=1e-12)
