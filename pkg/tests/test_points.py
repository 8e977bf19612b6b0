import numpy as np
import pytest

from doptk import (
    PointSet,
    grid1d,
    latin_hypercube,
    load_points_csv,
    load_values_csv,
    save_points_csv,
    save_values_csv,
    sum_of_gaussians_1d,
    zhou_function,
)


class TestPointSet:
    def test_rejects_duplicates(self):
        with pytest.raises(ValueError, match="duplicate"):
            PointSet(np.array([[0.0, 1.0], [0.5, 0.5], [0.0, 1.0]]))

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            PointSet(np.array([[0.0], [np.nan]]))

    def test_near_duplicates_allowed(self):
        pts = PointSet(np.array([[0.0], [1e-15]]))
        assert pts.n == 2

    def test_coords_read_only(self):
        pts = PointSet(np.array([[0.0], [1.0]]))
        with pytest.raises(ValueError):
            pts.coords[0, 0] = 3.0


class TestGrid1d:
    def test_paper_grid_spacing(self):
        pts = grid1d(0.0, 10.0, 6001)
        x = pts.coords[:, 0]
        assert x[0] == 0.0
        assert x[-1] == 10.0
        assert np.allclose(np.diff(x), 10.0 / 6000.0, rtol=1e-12)

    def test_two_points(self):
        assert grid1d(0.0, 1.0, 2).coords[:, 0].tolist() == [0.0, 1.0]

    def test_unit_spacing_index(self):
        assert grid1d(0.0, 10.0, 11).coords[3, 0] == 3.0

    @pytest.mark.parametrize("a,b,n", [(1.0, 0.0, 5), (0.0, 0.0, 5), (0.0, 1.0, 1), (np.inf, 1.0, 5)])
    def test_invalid_inputs(self, a, b, n):
        with pytest.raises(ValueError):
            grid1d(a, b, n)


class TestLatinHypercube:
    def test_four_bins(self):
        x = np.sort(latin_hypercube(4, 1, seed=7).coords[:, 0])
        assert np.array_equal(np.floor(4 * x).astype(int), [0, 1, 2, 3])

    @pytest.mark.parametrize("n,dim", [(17, 3), (64, 2), (5, 5)])
    def test_bin_occupancy_every_axis(self, n, dim):
        coords = latin_hypercube(n, dim, seed=3).coords
        for d in range(dim):
            bins = np.floor(n * coords[:, d]).astype(int)
            assert np.array_equal(np.sort(bins), np.arange(n)), f"axis {d} occupancy broken"

    def test_large_4d_shape(self):
        pts = latin_hypercube(10000, 4, seed=0)
        assert pts.n == 10000 and pts.dim == 4

    def test_deterministic(self):
        a = latin_hypercube(50, 3, seed=11).coords
        b = latin_hypercube(50, 3, seed=11).coords
        assert np.array_equal(a, b)
        c = latin_hypercube(50, 3, seed=12).coords
        assert not np.array_equal(a, c)

    def test_unit_cube(self):
        coords = latin_hypercube(30, 2, seed=5).coords
        assert np.all(coords >= 0.0) and np.all(coords < 1.0)


class TestZhouFunction:
    def test_value_at_first_bump_1d(self):
        # independent evaluation: 5 sqrt(2 pi) (1 + exp(-0.5 (10/3)^2))
        pts = PointSet(np.array([[1.0 / 3.0]]))
        expected = 5.0 * np.sqrt(2.0 * np.pi) * (1.0 + np.exp(-0.5 * (10.0 / 3.0) ** 2))
        val = zhou_function(pts, 1.0 / 3.0, 2.0 / 3.0)[0]
        assert val == pytest.approx(expected, rel=1e-14)
        assert val == pytest.approx(12.581593496800341, rel=1e-12)

    def test_coincident_bumps(self):
        pts = PointSet(np.array([[0.5]]))
        assert zhou_function(pts, 0.5, 0.5)[0] == pytest.approx(10.0 * np.sqrt(2.0 * np.pi), rel=1e-14)

    def test_swap_symmetry(self):
        pts = PointSet(np.array([[0.25, 0.25], [0.75, 0.75]]))
        fwd = zhou_function(pts, 0.25, 0.75)
        rev = zhou_function(pts, 0.75, 0.25)
        assert fwd[0] == pytest.approx(rev[1], rel=1e-14)
        assert fwd[1] == pytest.approx(rev[0], rel=1e-14)

    def test_coordinate_permutation_invariance(self):
        rng = np.random.default_rng(0)
        x = rng.random(4)
        pts = PointSet(np.vstack([x, x[::-1]]))
        vals = zhou_function(pts)
        assert vals[0] == pytest.approx(vals[1], rel=1e-14)

    def test_paper_scale_4d(self):
        pts = latin_hypercube(100, 4, seed=1)
        vals = zhou_function(pts)
        assert vals.shape == (100,)
        assert np.all(vals >= 0.0)


class TestSumOfGaussians:
    def test_peak_value(self):
        pts = PointSet(np.array([[2.0]]))
        assert sum_of_gaussians_1d(pts, [2.0], [0.3], [1.7])[0] == pytest.approx(1.7, rel=1e-15)

    def test_empty_is_zero(self):
        pts = grid1d(0.0, 1.0, 5)
        assert np.array_equal(sum_of_gaussians_1d(pts, [], [], []), np.zeros(5))

    def test_three_bumps_direct_evaluation(self):
        pts = grid1d(0.0, 10.0, 41)
        centers, widths, heights = [2.0, 5.0, 8.0], [0.4, 0.8, 0.5], [1.0, 2.0, 1.5]
        got = sum_of_gaussians_1d(pts, centers, widths, heights)
        x = pts.coords[:, 0]
        expected = np.zeros_like(x)
        for i in range(len(x)):
            for c, w, h in zip(centers, widths, heights):
                expected[i] += h * np.exp(-((x[i] - c) ** 2) / (2 * w * w))
        assert np.allclose(got, expected, rtol=1e-14)

    def test_mismatched_lengths(self):
        pts = grid1d(0.0, 1.0, 3)
        with pytest.raises(ValueError, match="equal lengths"):
            sum_of_gaussians_1d(pts, [0.5], [0.1, 0.2], [1.0])

    def test_requires_1d(self):
        with pytest.raises(ValueError, match="1-D"):
            sum_of_gaussians_1d(PointSet(np.zeros((1, 2))), [0.0], [1.0], [1.0])


class TestCsv:
    def test_round_trip_points(self, tmp_path):
        rng = np.random.default_rng(3)
        pts = PointSet(rng.random((9, 3)))
        path = tmp_path / "pts.csv"
        save_points_csv(path, pts)
        back = load_points_csv(path)
        assert np.array_equal(back.coords, pts.coords)

    def test_round_trip_values(self, tmp_path):
        rng = np.random.default_rng(4)
        vals = rng.standard_normal(20) * 1e3
        path = tmp_path / "vals.csv"
        save_values_csv(path, vals, header="value")
        assert np.array_equal(load_values_csv(path), vals)

    def test_plain_numeric_csv(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.0,1.0\n2.0,3.0\n4.0,5.0\n")
        pts = load_points_csv(path)
        assert pts.n == 3 and pts.dim == 2

    def test_header_detected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("lon,lat\n0.0,1.0\n2.0,3.0\n")
        pts = load_points_csv(path)
        assert pts.n == 2

    def test_ragged_row_names_line(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.0,1.0\n2.0\n4.0,5.0\n")
        with pytest.raises(ValueError, match="line 2"):
            load_points_csv(path)

    def test_non_numeric_cell_names_line(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.0,1.0\n2.0,oops\n")
        with pytest.raises(ValueError, match="line 2"):
            load_points_csv(path)

    def test_duplicate_rows_rejected(self, tmp_path):
        path = tmp_path / "p.csv"
        path.write_text("0.0,1.0\n0.0,1.0\n")
        with pytest.raises(ValueError, match="duplicate"):
            load_points_csv(path)

    def test_values_needs_single_column(self, tmp_path):
        path = tmp_path / "v.csv"
        path.write_text("0.0,1.0\n")
        with pytest.raises(ValueError, match="single column"):
            load_values_csv(path)

    def test_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_points_csv(tmp_path / "nope.csv")
