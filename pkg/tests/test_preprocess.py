import numpy as np
import pytest
from pydantic import ValidationError

from src.field import Location, Region, SpatialField
from src.preprocess import GridImage, cell_index, cell_indices, preprocess


@pytest.mark.parametrize(
    "x, y, cell",
    [
        (0.0, 0.0, (1, 1)),
        (1.0, 1.0, (100, 100)),
        (0.005, 0.01, (1, 2)),
        (0.999, 0.5, (100, 51)),
        # 0.29 * 100 rounds below 29 but 0.29 sits on the edge of cell 30
        (0.29, 0.57, (30, 58)),
    ],
)
def test_cell_index(x, y, cell):
    assert cell_index(Location(x=x, y=y)) == cell


def test_cell_indices_reject_outside():
    with pytest.raises(ValueError):
        cell_indices(np.array([[1.2, 0.5]]))


def test_pixels_in_unit_interval(small_field):
    image = preprocess(small_field, g=10)
    assert image.pixels.shape == (10, 10)
    assert image.pixels.min() == 0.0
    assert image.pixels.max() == 1.0


def test_constant_field_is_mid_grey(small_field):
    image = preprocess(small_field.with_values(np.full(small_field.n, 3.7)), g=8)
    np.testing.assert_array_equal(image.pixels, np.full((8, 8), 0.5))


def test_value_scaling_invariance(small_field):
    a = preprocess(small_field, g=12)
    b = preprocess(small_field.with_values(2.0 * small_field.values), g=12)
    np.testing.assert_array_equal(a.pixels, b.pixels)


@pytest.mark.parametrize("scale, shift", [(3.0, 0.7), (0.5, -4.2), (7.0, -25.0)])
def test_affine_value_invariance(small_field, scale, shift):
    a = preprocess(small_field)
    b = preprocess(small_field.with_values(scale * small_field.values + shift))
    np.testing.assert_array_equal(a.pixels, b.pixels)


def test_coordinate_scaling_invariance(small_field):
    scaled = SpatialField(
        coords=2.0 * small_field.coords,
        values=small_field.values,
        region=Region(x_min=0.0, x_max=2.0, y_min=0.0, y_max=2.0),
    )
    np.testing.assert_array_equal(
        preprocess(small_field, g=12).pixels, preprocess(scaled, g=12).pixels
    )


def test_cell_means():
    field = SpatialField(
        coords=[[0.1, 0.1], [0.2, 0.2], [0.9, 0.9], [0.1, 0.9]],
        values=[1.0, 3.0, 6.0, 4.0],
    )
    image = preprocess(field, g=2)
    # cell means 2, 4, 6 plus a filled cell
    assert image.fill_count == 1
    np.testing.assert_allclose(image.pixels, [[0.0, 0.5], [0.0, 1.0]])


def test_empty_cells_tie_to_smallest_cell():
    field = SpatialField(coords=[[0.1, 0.1], [0.9, 0.9]], values=[0.0, 1.0])
    image = preprocess(field, g=2)
    assert image.fill_count == 2
    np.testing.assert_array_equal(image.pixels, [[0.0, 0.0], [0.0, 1.0]])


def test_grid_image_validation():
    with pytest.raises(ValidationError):
        GridImage(g=2, pixels=np.zeros((3, 3)))
    with pytest.raises(ValidationError):
        GridImage(g=1, pixels=np.array([[1.5]]))


def test_grid_image_csv(tmp_path, small_field):
    image = preprocess(small_field, g=4)
    image.to_csv(tmp_path / "image.csv")
    assert len((tmp_path / "image.csv").read_text().splitlines()) == 4
