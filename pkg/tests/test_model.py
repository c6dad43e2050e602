import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from onebit_joint.errors import DataError, DimensionError, ParameterError
from onebit_joint.model import (
    BitMatrix,
    MeasurementMatrix,
    NoiseModel,
    SignalMatrix,
    SupportSet,
    compute_snr,
    generate_measurement_matrix,
    generate_signal_matrix,
    quantize,
    sense,
)


def test_signal_matrix_default_sizes():
    s, sup = generate_signal_matrix(100, 10, 5, np.random.default_rng(0))
    nonzero_rows = np.flatnonzero(np.any(s.data != 0, axis=1))
    assert len(nonzero_rows) == 5
    assert set(np.unique(s.data[nonzero_rows])) <= {-1.0, 1.0}
    assert np.all(s.data[nonzero_rows] != 0)
    assert tuple(nonzero_rows) == sup.indices


def test_signal_matrix_full_support():
    s, sup = generate_signal_matrix(4, 1, 4, np.random.default_rng(1))
    assert np.all(np.abs(s.data) == 1)
    assert sup.indices == (0, 1, 2, 3)


def test_signal_matrix_deterministic():
    a, sa = generate_signal_matrix(10, 2, 2, np.random.default_rng(42))
    b, sb = generate_signal_matrix(10, 2, 2, np.random.default_rng(42))
    assert a.data.tobytes() == b.data.tobytes()
    assert sa == sb


@pytest.mark.parametrize("n,p,k", [(5, 1, 6), (5, 1, 0), (0, 1, 1), (5, 0, 1)])
def test_signal_matrix_bad_dims(n, p, k):
    with pytest.raises(DimensionError):
        generate_signal_matrix(n, p, k, np.random.default_rng(0))


@settings(max_examples=50, deadline=None)
@given(n=st.integers(1, 40), p=st.integers(1, 6), data=st.data(), seed=st.integers(0, 2**32 - 1))
def test_joint_sparsity(n, p, data, seed):
    k = data.draw(st.integers(1, n))
    s, sup = generate_signal_matrix(n, p, k, np.random.default_rng(seed))
    assert len(sup) == k
    for j in range(p):
        assert tuple(np.flatnonzero(s.data[:, j])) == sup.indices
    assert s.row_support() == sup


def test_signal_sign_balance():
    s, _ = generate_signal_matrix(1000, 50, 400, np.random.default_rng(3))
    vals = s.data[s.data != 0]
    # 20000 fair coin flips: 5 sigma is about 0.035
    assert abs(np.mean(vals > 0) - 0.5) < 0.035


def test_measurement_matrix_mean():
    phi = generate_measurement_matrix(50, 100, 0.004, np.random.default_rng(0))
    assert phi.data.shape == (50, 100)
    assert abs(phi.data.mean()) <= 4 * math.sqrt(0.004 / 5000)


def test_measurement_matrix_variance_large_sample():
    phi = generate_measurement_matrix(500, 2000, 0.004, np.random.default_rng(5))
    assert abs(phi.data.var() / 0.004 - 1) < 0.01


@pytest.mark.parametrize("variance", [0.0, -1.0])
def test_measurement_matrix_bad_variance(variance):
    with pytest.raises(ParameterError):
        generate_measurement_matrix(3, 4, variance, np.random.default_rng(0))


def test_measurement_matrix_warns_when_not_compressive():
    with pytest.warns(RuntimeWarning):
        MeasurementMatrix(np.eye(3))


def test_sense_zero_signal_tiny_noise():
    phi = generate_measurement_matrix(6, 10, 0.004, np.random.default_rng(0))
    s = SignalMatrix(np.zeros((10, 3)))
    y = sense(phi, s, NoiseModel(1e-300), np.random.default_rng(1))
    assert np.all(np.abs(y) < 1e-290)


def test_sense_identity_noiseless():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        phi = MeasurementMatrix(np.eye(3))
    y = sense(phi, SignalMatrix(np.array([0.0, 1.0, 0.0])), None)
    np.testing.assert_array_equal(y[:, 0], [0.0, 1.0, 0.0])


def test_sense_noise_covariance():
    rng = np.random.default_rng(11)
    phi = generate_measurement_matrix(3, 5, 0.004, rng)
    s, _ = generate_signal_matrix(5, 1, 2, rng)
    sigma = 0.3
    noise = np.stack([(sense(phi, s, NoiseModel(sigma), rng) - phi.data @ s.data)[:, 0] for _ in range(10_000)])
    cov = np.cov(noise, rowvar=False)
    # sampling error of a variance estimate with 1e4 draws is ~1.4%
    np.testing.assert_allclose(cov, sigma**2 * np.eye(3), atol=0.06 * sigma**2)


def test_sense_dimension_mismatch():
    phi = generate_measurement_matrix(3, 5, 1.0, np.random.default_rng(0))
    with pytest.raises(DimensionError):
        sense(phi, SignalMatrix(np.zeros((4, 1))), NoiseModel(1.0), np.random.default_rng(0))


def test_quantize_boundary_maps_to_one():
    z = quantize(np.array([[0.5], [-0.2], [0.0]]))
    np.testing.assert_array_equal(z.data[:, 0], [1, 0, 1])


def test_quantize_all_negative():
    assert not quantize(-np.ones((4, 2)) * 3).data.any()


def test_quantize_rejects_nan():
    with pytest.raises(DataError):
        quantize(np.array([[1.0], [np.nan]]))


@given(
    y=st.lists(st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False), min_size=1, max_size=20),
    c=st.floats(1e-3, 1e3),
)
def test_quantize_positive_scaling_invariant(y, c):
    y = np.array(y)[:, None]
    assert np.array_equal(quantize(c * y).data, quantize(y).data)


def test_bit_matrix_rejects_other_values():
    with pytest.raises(DataError):
        BitMatrix(np.array([[0, 2]]))


def test_support_set_validation():
    with pytest.raises(ParameterError):
        SupportSet((2, 1), 5)
    with pytest.raises(DimensionError):
        SupportSet((1, 5), 5)
    assert SupportSet.from_iterable([3, 1, 3], 5).indices == (1, 3)


def test_noise_model_positive():
    with pytest.raises(ParameterError):
        NoiseModel(0.0)
    assert NoiseModel.from_variance(1e-4).sigma_v == pytest.approx(0.01)


def test_snr_high():
    assert compute_snr(5, 0.004, math.sqrt(1e-4)) == pytest.approx(23.0103, abs=5e-5)


def test_snr_zero_db():
    assert compute_snr(4, 0.25, 1.0) == pytest.approx(0.0, abs=1e-12)


def test_snr_low_is_10log10_2():
    assert compute_snr(5, 0.004, 0.1) == pytest.approx(10 * math.log10(2), abs=1e-12)
