import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.errors import FieldFormatError
from src.field import (
    Location,
    Region,
    SpatialField,
    Stream,
    derive_seed,
    perturbed_grid_locations,
    read_field_csv,
    read_raster_csv,
    regular_grid_locations,
    rng_for,
    write_field_csv,
    write_pgm,
    write_raster_csv,
)
from src.preprocess import preprocess


def test_perturbed_grid_stays_in_its_cell():
    side = 7
    coords = perturbed_grid_locations(side * side, seed=3)
    assert coords.shape == (49, 2)
    i, j = np.meshgrid(np.arange(side), np.arange(side), indexing="ij")
    expected = np.column_stack([i.ravel(), j.ravel()])
    np.testing.assert_array_equal(np.floor(coords * side).astype(int), expected)


def test_perturbed_grid_jitter_bound():
    side = 10
    coords = perturbed_grid_locations(side * side, seed=0)
    centres = regular_grid_locations(side * side)
    assert np.abs(coords - centres).max() <= 0.4 / side + 1e-15


def test_perturbed_grid_is_deterministic():
    a = perturbed_grid_locations(25, seed=11)
    b = perturbed_grid_locations(25, seed=11)
    c = perturbed_grid_locations(25, seed=12)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


@pytest.mark.parametrize("n", [0, 2, 10, -4])
def test_grid_needs_perfect_square(n):
    with pytest.raises(ValueError):
        perturbed_grid_locations(n, seed=0)


def test_regular_grid_cell_centres():
    np.testing.assert_allclose(
        regular_grid_locations(4),
        [[0.25, 0.25], [0.25, 0.75], [0.75, 0.25], [0.75, 0.75]],
    )


def test_location_rejects_non_finite():
    with pytest.raises(ValidationError):
        Location(x=math.nan, y=0.1)


def test_field_validation():
    with pytest.raises(ValidationError):
        SpatialField(coords=np.zeros((3, 2)), values=np.zeros(2))
    with pytest.raises(ValidationError):
        SpatialField(coords=np.zeros((1, 2)), values=[np.inf])
    with pytest.raises(ValidationError):
        SpatialField(coords=[[1.5, 0.5]], values=[0.0])


def test_subset_shrinks_region(small_field):
    mask = small_field.coords[:, 0] < 0.5
    sub = small_field.subset(mask)
    assert sub.n == int(mask.sum())
    assert sub.region.x_min == pytest.approx(sub.coords[:, 0].min())
    assert sub.region.x_max == pytest.approx(sub.coords[:, 0].max())


def test_stretched_spans_unit_square():
    coords = np.array([[2.0, -1.0], [4.0, 1.0], [3.0, 0.0]])
    field = SpatialField.from_arrays(coords, np.zeros(3))
    np.testing.assert_allclose(field.stretched(), [[0.0, 0.0], [1.0, 1.0], [0.5, 0.5]])


def test_stretched_degenerate_axis():
    field = SpatialField.from_arrays(np.array([[0.3, 0.1], [0.3, 0.9]]), np.zeros(2))
    np.testing.assert_allclose(field.stretched()[:, 0], [0.5, 0.5])


def test_region_diameter_and_contains():
    region = Region(x_min=0.0, x_max=3.0, y_min=0.0, y_max=4.0)
    assert region.diameter == pytest.approx(5.0)
    assert region.contains(np.array([[1.0, 1.0], [3.5, 1.0]])).tolist() == [True, False]


def test_csv_keeps_values_exactly(tmp_path, small_field):
    path = tmp_path / "field.csv"
    write_field_csv(small_field, path)
    loaded = read_field_csv(path)
    np.testing.assert_array_equal(loaded.coords, small_field.coords)
    np.testing.assert_array_equal(loaded.values, small_field.values)
    assert loaded.region == small_field.region
    assert path.read_text().splitlines()[:2] == ["# region: 0,1,0,1", "x,y,z"]


def test_csv_keeps_a_region_wider_than_the_points(tmp_path, rng):
    field = SpatialField(
        coords=rng.uniform(0.1, 0.9, size=(100, 2)), values=rng.standard_normal(100)
    )
    path = tmp_path / "field.csv"
    write_field_csv(field, path)
    loaded = read_field_csv(path)
    assert loaded.region == Region.unit()
    np.testing.assert_array_equal(preprocess(loaded).pixels, preprocess(field).pixels)


def test_csv_without_region_line_uses_bounding_box(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text("x,y,z\n0.1,0.2,1.5\n0.3,0.6,2.0\n")
    loaded = read_field_csv(path)
    assert loaded.n == 2
    assert loaded.region == Region(x_min=0.1, x_max=0.3, y_min=0.2, y_max=0.6)


@pytest.mark.parametrize(
    "content, row",
    [
        ("", 0),
        ("a,b,c\n1,2,3\n", 0),
        ("x,y,z\n0.1,0.2,0.3\n0.1,oops,0.3\n", 2),
        ("x,y,z\n0.1,0.2\n", 1),
        ("x,y,z\n0.1,0.2,nan\n", 1),
        ("x,y,z\n", 1),
        ("# region: 0,1,0\nx,y,z\n0.1,0.2,0.3\n", 0),
        ("# region: 0,0.5,0,0.5\nx,y,z\n0.9,0.2,0.3\n", 0),
        ("# region: 0,1,0,1\nx,y,z\n0.1,0.2\n", 1),
    ],
)
def test_csv_errors_name_the_row(tmp_path, content, row):
    path = tmp_path / "bad.csv"
    path.write_text(content)
    with pytest.raises(FieldFormatError) as info:
        read_field_csv(path)
    assert info.value.row == row


def test_raster_and_pgm(tmp_path):
    raster = np.array([[0.0, 0.5], [1.0, 0.25]])
    write_raster_csv(raster, tmp_path / "r.csv")
    np.testing.assert_array_equal(read_raster_csv(tmp_path / "r.csv"), raster)
    write_pgm(raster, tmp_path / "r.pgm")
    lines = (tmp_path / "r.pgm").read_text().splitlines()
    assert lines[:3] == ["P2", "2 2", "255"]
    assert lines[3:] == ["0 128", "255 64"]


def test_streams_are_independent():
    a = rng_for(5, Stream.FIELD).standard_normal(4)
    b = rng_for(5, Stream.FIELD).standard_normal(4)
    c = rng_for(5, Stream.PARTITION).standard_normal(4)
    d = rng_for(5, Stream.FIELD, 1).standard_normal(4)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)
    assert derive_seed(5, Stream.CORPUS, 1) == derive_seed(5, Stream.CORPUS, 1)
    assert derive_seed(5, Stream.CORPUS, 1) != derive_seed(5, Stream.CORPUS, 2)
