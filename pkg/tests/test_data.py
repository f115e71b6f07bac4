import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from knockswap.data import (
    ConstantColumnError,
    Dataset,
    InputFormatError,
    LassoPath,
    ModelFamily,
    lambda_grid,
    standardize,
)


class TestStandardize:
    def test_already_standardized_column(self):
        Xs, means, scales = standardize(np.array([[1.0], [-1.0]]))
        np.testing.assert_allclose(Xs, [[1.0], [-1.0]])
        assert means[0] == 0.0 and scales[0] == 1.0

    def test_hand_computed_shift(self):
        # divisor-n sd of [2, 4] is 1, mean 3
        Xs, means, scales = standardize(np.array([[2.0], [4.0]]))
        np.testing.assert_allclose(Xs, [[-1.0], [1.0]])
        assert means[0] == 3.0 and scales[0] == 1.0

    def test_constant_column_names_index(self):
        X = np.column_stack([np.ones(3) * 5, np.arange(3.0)])
        with pytest.raises(ConstantColumnError, match="column 0"):
            standardize(X)

    def test_idempotent(self):
        rng = np.random.default_rng(3)
        X = rng.standard_normal((17, 4)) * 3 + 1
        once, _, _ = standardize(X)
        twice, _, _ = standardize(once)
        np.testing.assert_allclose(twice, once, atol=1e-12)

    def test_output_moments(self):
        rng = np.random.default_rng(4)
        X = rng.standard_normal((30, 6)) * 2 - 5
        Xs, _, _ = standardize(X)
        np.testing.assert_allclose(Xs.mean(axis=0), 0, atol=1e-12)
        np.testing.assert_allclose((Xs**2).mean(axis=0), 1, atol=1e-12)


class TestLambdaGrid:
    def test_log_equispaced(self):
        np.testing.assert_allclose(lambda_grid(1.0, 3, 0.01), [1.0, 0.1, 0.01])

    def test_endpoints_only(self):
        np.testing.assert_allclose(lambda_grid(1.0, 2, 0.5), [1.0, 0.5])

    def test_nonpositive_lambda_max(self):
        with pytest.raises(ValueError):
            lambda_grid(0.0, 10, 0.01)

    @given(
        lmax=st.floats(1e-6, 1e6),
        size=st.integers(2, 200),
        ratio=st.floats(1e-6, 0.99),
    )
    @settings(max_examples=50, deadline=None)
    def test_constant_ratio(self, lmax, size, ratio):
        grid = lambda_grid(lmax, size, ratio)
        ratios = grid[1:] / grid[:-1]
        assert np.all(np.diff(grid) < 0)
        np.testing.assert_allclose(ratios, ratios[0], atol=1e-12)


class TestModelFamily:
    def test_intercept_counts(self):
        assert ModelFamily.linear().n_intercepts == 1
        assert ModelFamily.logistic().n_intercepts == 1
        assert ModelFamily.cumulative_logit(4).n_intercepts == 3

    def test_levels_validation(self):
        with pytest.raises(ValueError):
            ModelFamily.cumulative_logit(2)
        with pytest.raises(ValueError):
            ModelFamily("linear", levels=3)
        with pytest.raises(ValueError):
            ModelFamily("poisson")


class TestDataset:
    def test_logistic_response_domain(self):
        X = np.random.default_rng(0).standard_normal((4, 2))
        with pytest.raises(ValueError, match="0, 1"):
            Dataset(X, np.array([0.0, 1.0, 2.0, 0.0]), ModelFamily.logistic())

    def test_ordinal_empty_level_warns(self):
        X = np.random.default_rng(0).standard_normal((4, 2))
        with pytest.warns(UserWarning, match=r"\[1\]"):
            Dataset(X, np.array([0.0, 0.0, 2.0, 2.0]), ModelFamily.cumulative_logit(3))

    def test_nonfinite_rejected(self):
        X = np.ones((3, 2))
        X[0, 0] = np.nan
        X[1, 1] = 2.0
        X[2, 0] = 3.0
        with pytest.raises(ValueError, match="non-finite"):
            Dataset(X, np.zeros(3), ModelFamily.linear())

    def test_too_few_rows(self):
        with pytest.raises(ValueError):
            Dataset(np.ones((1, 2)), np.zeros(1), ModelFamily.linear())


class TestCsv:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(1)
        ds = Dataset(rng.standard_normal((10, 3)), rng.standard_normal(10),
                     ModelFamily.linear())
        path = tmp_path / "data.csv"
        ds.to_csv(path)
        loaded = Dataset.from_csv(path, "linear")
        np.testing.assert_array_equal(loaded.X, ds.X)
        np.testing.assert_array_equal(loaded.y, ds.y)

    def test_missing_y_column(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1,2\n")
        with pytest.raises(InputFormatError, match="'y'"):
            Dataset.from_csv(path, "linear")

    def test_bad_field_diagnostics(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1.0,2.0\n1.0,oops\n")
        with pytest.raises(InputFormatError, match="row 3.*'x1'.*'oops'"):
            Dataset.from_csv(path, "linear")

    def test_ragged_row(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("y,x1\n1.0,2.0,3.0\n")
        with pytest.raises(InputFormatError, match="row 2"):
            Dataset.from_csv(path, "linear")


class TestLassoPath:
    def test_grid_must_decrease(self):
        with pytest.raises(ValueError):
            LassoPath(np.array([1.0, 1.0]), np.zeros((2, 1)), np.zeros((2, 1)))
        with pytest.raises(ValueError):
            LassoPath(np.array([1.0, -0.5]), np.zeros((2, 1)), np.zeros((2, 1)))

    def test_shape_consistency(self):
        with pytest.raises(ValueError):
            LassoPath(np.array([1.0, 0.5]), np.zeros((3, 1)), np.zeros((2, 1)))
