import json

import numpy as np
import pytest

from src.convnet import init_model
from src.errors import ConfigError, PartitionError
from src.datagen import SettingSpec, setting_regimes
from src.field import SpatialField, regular_grid_locations
from src.partition import (
    assign_to_nearest,
    label_agreement,
    partition_field,
    select_subregions,
    user_defined_split,
)


@pytest.fixture(scope="module")
def model():
    return init_model(5, seed=1, n_filters=2, hidden=3)


def test_nearest_assignment_ties_to_lower_label():
    labels = assign_to_nearest([[0.5, 0.5], [0.1, 0.5], [0.9, 0.5]], [[0.0, 0.5], [1.0, 0.5]])
    assert labels.tolist() == [1, 1, 2]


def test_select_subregions_picks_lowest_score(small_field, model):
    part = select_subregions(small_field, 3, model, iters=6, seed=2)
    assert part.method == "convnet"
    assert len(part.restart_scores) == 6
    assert part.score == min(part.restart_scores)
    assert part.restart_scores.index(part.score) == part.restart_index
    assert part.score == pytest.approx(sum(part.subregion_indices))
    assert set(part.labels.tolist()) <= {1, 2, 3}
    assert part.anchors.shape == (3, 2)


def test_select_subregions_anchors_are_centroids(small_field, model):
    part = select_subregions(small_field, 2, model, iters=3, seed=0)
    for k in (1, 2):
        members = small_field.coords[part.members(k)]
        if len(members):
            np.testing.assert_allclose(part.anchors[k - 1], members.mean(axis=0))


def test_select_subregions_is_deterministic(small_field, model):
    a = select_subregions(small_field, 2, model, iters=4, seed=5)
    b = select_subregions(small_field, 2, model, iters=4, seed=5)
    np.testing.assert_array_equal(a.labels, b.labels)
    assert a.restart_scores == b.restart_scores


def test_every_restart_degenerate(model):
    field = SpatialField(coords=[[0.1, 0.1], [0.5, 0.5], [0.9, 0.9]], values=[0.0, 1.0, 2.0])
    with pytest.raises(PartitionError):
        select_subregions(field, 3, model, iters=2)


def test_select_subregions_validation(small_field, model):
    with pytest.raises(ValueError):
        select_subregions(small_field, 0, model)
    with pytest.raises(ValueError):
        select_subregions(small_field.subset(np.arange(small_field.n) < 2), 3, model)


def test_user_split_bands(small_field):
    part = user_defined_split(small_field, 2)
    np.testing.assert_allclose(part.anchors, [[0.25, 0.5], [0.75, 0.5]])
    expected = np.where(small_field.coords[:, 0] < 0.5, 1, 2)
    np.testing.assert_array_equal(part.labels, expected)
    assert part.score is None


def test_user_split_along_y(small_field):
    part = user_defined_split(small_field, 4, axis="y")
    np.testing.assert_allclose(part.anchors[:, 1], [0.125, 0.375, 0.625, 0.875])
    assert (part.anchors[:, 0] == 0.5).all()


def test_partition_field_dispatch(small_field, model):
    assert partition_field(small_field, "user", 3).method == "user"
    assert partition_field(small_field, "convnet", 2, model=model, iters=2).method == "convnet"
    with pytest.raises(ConfigError):
        partition_field(small_field, "convnet", 2)


@pytest.mark.parametrize(
    "labels, truth, expected",
    [
        ([1, 1, 2, 2], [2, 2, 1, 1], 1.0),
        ([1, 1, 1, 2], [1, 1, 2, 2], 0.75),
        ([1, 2, 3, 3], [1, 1, 1, 1], 0.5),
    ],
)
def test_label_agreement(labels, truth, expected):
    assert label_agreement(np.array(labels), np.array(truth)) == expected


def test_x_split_against_diagonal_regimes():
    spec = SettingSpec.standard(2, n=16)
    coords = regular_grid_locations(16)
    field = SpatialField(coords=coords, values=np.zeros(16))
    regimes = setting_regimes(spec, coords)
    # the four anti-diagonal points tie and join the lower regime
    assert np.bincount(regimes).tolist() == [0, 10, 6]
    assert label_agreement(user_defined_split(field, 2).labels, regimes) == 0.75


def test_partition_csv_and_sidecar(tmp_path, small_field):
    part = user_defined_split(small_field, 2)
    sidecar = part.to_csv(small_field, tmp_path / "partition.csv")
    lines = (tmp_path / "partition.csv").read_text().splitlines()
    assert lines[0] == "x,y,z,label"
    assert len(lines) == small_field.n + 1
    meta = json.loads(sidecar.read_text())
    assert meta["method"] == "user"
    assert meta["anchors"] == [{"x": 0.25, "y": 0.5}, {"x": 0.75, "y": 0.5}]
