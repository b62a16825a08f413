import numpy as np
import pytest

from conjgen.errors import RangeLimitError, ResourceLimitError
from conjgen.number_theory import (
    build_pi_table,
    grid_dataset,
    pi_grid,
    rosser_schoenfeld_all,
    rosser_schoenfeld_check,
    write_feature_csv,
    write_pi_table_csv,
)

from conftest import hl_basis


def pi_trial_division(n: int) -> int:
    """Independent counting oracle: trial division."""
    count = 0
    for m in range(2, n + 1):
        if all(m % d for d in range(2, int(m**0.5) + 1)):
            count += 1
    return count


class TestPiTable:
    def test_small_values(self, table_small):
        assert table_small.count(2) == 1
        assert table_small.count(10) == 4
        assert table_small.count(100) == 25

    def test_trial_division_cross_check(self, table_small):
        # full agreement on 0..10^4, checked blockwise against the sieve
        expected = np.zeros(10_001, dtype=np.int64)
        count = 0
        for n in range(2, 10_001):
            if all(n % d for d in range(2, int(n**0.5) + 1)):
                count += 1
            expected[n] = count
        assert np.array_equal(table_small.pi, expected)

    def test_monotone_with_unit_steps(self, table_small):
        steps = np.diff(table_small.pi)
        assert table_small.pi[0] == 0 and table_small.pi[1] == 0
        assert np.all((steps == 0) | (steps == 1))

    def test_floor_semantics_for_real_arguments(self, table_small):
        assert table_small.count(10.9) == 4
        assert table_small.count(2 + 2**0.5) == 2  # pi(3)

    def test_limit_validation(self):
        with pytest.raises(ValueError):
            build_pi_table(1)

    def test_memory_cap(self):
        with pytest.raises(ResourceLimitError):
            build_pi_table(10_000, max_limit=5_000)

    def test_lookup_range_error_names_argument(self, table_small):
        with pytest.raises(RangeLimitError) as err:
            table_small.lookup(np.array([20_000]))
        assert "20000" in str(err.value)
        with pytest.raises(RangeLimitError):
            table_small.lookup(np.array([-1]))


class TestRosserSchoenfeld:
    def test_x17(self, table_small):
        assert rosser_schoenfeld_check(table_small, 17, 1.26)
        assert 17 / np.log(17) == pytest.approx(6.0003, abs=1e-3)

    def test_x100(self, table_small):
        assert rosser_schoenfeld_check(table_small, 100, 1.26)

    def test_below_17_rejected(self, table_small):
        with pytest.raises(ValueError):
            rosser_schoenfeld_check(table_small, 16, 1.26)

    def test_small_alpha_rejected(self, table_small):
        with pytest.raises(ValueError):
            rosser_schoenfeld_check(table_small, 17, 1.2)

    def test_vectorised_range(self, table_small):
        assert rosser_schoenfeld_all(table_small, 17, 10_000, 1.26)


class TestPiGrid:
    def test_exhaustive_count(self):
        rows = list(pi_grid([(2, 4), (2, 4)]))
        assert len(rows) == 9
        assert rows[0] == (2, 2) and rows[-1] == (4, 4)

    def test_lexicographic_order(self):
        rows = list(pi_grid([(2, 3), (2, 3)]))
        assert rows == [(2, 2), (2, 3), (3, 2), (3, 3)]

    def test_degenerate_values_excluded_by_default(self):
        with pytest.raises(ValueError):
            list(pi_grid([(0, 4)]))
        assert list(pi_grid([(0, 2)], min_value=0))[0] == (0,)

    def test_sampled_full_coverage_equals_exhaustive(self):
        full = set(pi_grid([(2, 5), (2, 5)]))
        sampled = list(pi_grid([(2, 5), (2, 5)], sample_count=1000, seed=3))
        assert set(sampled) == full
        assert len(sampled) == len(full)

    def test_sampled_is_seed_deterministic(self):
        a = list(pi_grid([(2, 50), (2, 50)], sample_count=20, seed=9))
        b = list(pi_grid([(2, 50), (2, 50)], sample_count=20, seed=9))
        assert a == b

    def test_table_sizing_rule(self, table_small):
        # pi(a*b) with a, b <= 2000 needs the table out to 4e6
        from conjgen.function_space import max_hook_argument
        basis = hl_basis(table_small)
        assert max_hook_argument(basis, [2000, 2000]) == 4_000_000


class TestCsvExports:
    def test_pi_table_dump(self, tmp_path):
        path = tmp_path / "pi.csv"
        write_pi_table_csv(path, build_pi_table(100))
        lines = path.read_text().splitlines()
        assert lines[0] == "n,pi"
        assert lines[-1] == "100,25"

    def test_feature_csv_header(self, tmp_path, table_small):
        basis = hl_basis(table_small)
        dataset = grid_dataset([(2, 4), (2, 4)])
        path = tmp_path / "features.csv"
        write_feature_csv(path, dataset, basis)
        lines = path.read_text().splitlines()
        assert lines[0] == "a,b,π(a)+π(b),π(a·b),π(a+b)"
        assert len(lines) == 10
        assert lines[1].startswith("2,2,")


class TestGridDataset:
    def test_shape_and_flags(self):
        ds = grid_dataset([(2, 10), (2, 10)])
        assert ds.rows.shape == (81, 2)
        assert ds.integer_columns == (True, True)
        assert ds.variables == ("a", "b")
