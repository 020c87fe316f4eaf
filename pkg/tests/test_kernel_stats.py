import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.types import DataFormatError, Dataset, DegenerateConditioningError
from src.utils.kernel_stats import KernelStats
from src.utils.scm_simulator import sample_observational
from tests.conftest import unit_weight_spec

finite_samples = st.lists(
    st.floats(min_value=-50, max_value=50, allow_nan=False, allow_infinity=False),
    min_size=1,
    max_size=30,
)


class TestMmd:

    @pytest.mark.parametrize(
        "p, q, expected",
        [
            ((1.0, 2.0, 3.0), (1.0, 2.0, 3.0), 0.0),
            ((0.0,), (0.0,), 0.0),
            ((0.0, 0.0), (1.0, 1.0), 2.0 - 2.0 * math.exp(-0.5)),
        ],
    )
    def test_hand_computed(self, p, q, expected):
        assert KernelStats.mmd2_unbiased(p, q, 1.0) == pytest.approx(expected, abs=1e-12)

    def test_identical_multisets_are_exactly_zero(self, rng):
        sample = rng.normal(size=200)

        assert KernelStats.mmd2_unbiased(sample, sample.copy(), 0.7) == 0.0

    @settings(max_examples=50, deadline=None)
    @given(p=finite_samples, q=finite_samples, bandwidth=st.floats(0.1, 10.0))
    def test_symmetric_and_nonnegative(self, p, q, bandwidth):
        forward = KernelStats.mmd2_unbiased(p, q, bandwidth)

        assert forward >= 0.0
        assert forward == pytest.approx(KernelStats.mmd2_unbiased(q, p, bandwidth), abs=1e-12)

    @pytest.mark.parametrize("bandwidth", [0.0, -1.0])
    def test_bad_bandwidth(self, bandwidth):
        with pytest.raises(ValueError, match="bandwidth"):
            KernelStats.mmd2_unbiased([0.0], [1.0], bandwidth)

    def test_empty_sample(self):
        with pytest.raises(ValueError, match="nonempty"):
            KernelStats.mmd2_unbiased([], [1.0], 1.0)

    def test_shift_is_detected(self, rng):
        p = rng.normal(size=300)
        near = rng.normal(size=300)
        far = rng.normal(loc=1.5, size=300)
        sigma = KernelStats.median_bandwidth(p, far)

        assert KernelStats.mmd2_unbiased(p, far, sigma) > KernelStats.mmd2_unbiased(p, near, sigma)


class TestBandwidths:

    def test_median_heuristic(self):
        # pooled {0, 1, 3}: pairwise distances 1, 3, 2
        assert KernelStats.median_bandwidth([0.0, 1.0], [3.0]) == 2.0

    def test_median_degenerate(self):
        assert KernelStats.median_bandwidth([1.0, 1.0], [1.0]) == 1.0

    def test_silverman(self):
        x = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
        expected = 1.06 * np.std(x, ddof=1) * 5 ** (-0.2)

        assert KernelStats.silverman_bandwidth(x) == pytest.approx(expected)

    def test_silverman_constant_column(self):
        assert KernelStats.silverman_bandwidth(np.ones(10)) == 1.0


class TestWeightedConditional:

    def test_infinite_bandwidth_is_uniform(self, rng):
        data = Dataset(values=rng.normal(size=(40, 2)))

        sample = KernelStats.weighted_conditional_samples(data, 0, 1, 0.3, bandwidth_h=np.inf)

        np.testing.assert_allclose(sample.weights, np.full(40, 1 / 40))

    def test_mass_concentrates_on_matching_rows(self):
        condition = np.repeat([0.0, 10.0], 10)
        target = np.concatenate([np.full(10, -1.0), np.full(10, 1.0)])
        data = Dataset(values=np.column_stack([condition, target]))

        sample = KernelStats.weighted_conditional_samples(data, 0, 1, 0.0, bandwidth_h=0.5)

        assert sample.weights[:10].sum() == pytest.approx(1.0)
        assert sample.mean() == pytest.approx(-1.0)

    def test_linear_conditional_mean(self):
        data = sample_observational(unit_weight_spec("chain"), 20000)

        sample = KernelStats.weighted_conditional_samples(data, 0, 1, 1.0)

        assert sample.mean() == pytest.approx(1.0, abs=0.1)

    def test_underflow_is_reported(self):
        data = Dataset(values=np.column_stack([np.linspace(0, 1, 20), np.zeros(20)]))

        with pytest.raises(DegenerateConditioningError, match="underflow"):
            KernelStats.weighted_conditional_samples(data, 0, 1, 1e6, bandwidth_h=0.1)

    def test_too_few_rows(self):
        with pytest.raises(DataFormatError, match="at least 10"):
            KernelStats.weighted_conditional_samples(Dataset(values=np.zeros((5, 2))), 0, 1, 0.0)


class TestResampling:

    def test_equal_weights_reproduce_values(self):
        values = np.arange(5.0)

        np.testing.assert_array_equal(
            KernelStats.systematic_resample(values, np.full(5, 0.2), 5), values
        )

    def test_follows_weights(self):
        resampled = KernelStats.systematic_resample(np.array([0.0, 1.0]), np.array([0.25, 0.75]), 200)

        assert (resampled == 1.0).sum() == 150

    def test_empty_request(self):
        assert KernelStats.systematic_resample(np.arange(3.0), np.ones(3), 0).size == 0


class TestCountModes:

    def test_unimodal(self, rng):
        assert KernelStats.count_modes(rng.normal(size=2000)) == 1

    def test_bimodal(self, rng):
        samples = np.concatenate([rng.normal(-3, 0.5, 1000), rng.normal(3, 0.5, 1000)])

        assert KernelStats.count_modes(samples) == 2

    def test_constant(self):
        assert KernelStats.count_modes(np.zeros(10)) == 1
