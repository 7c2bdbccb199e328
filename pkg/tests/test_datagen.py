import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.convnet import Label
from src.covariance import StationaryParams
from src.datagen import (
    PatternSpec,
    SettingSpec,
    gen_nonstationary_sample,
    gen_setting,
    gen_stationary_corpus,
    modulate,
    pattern_specs,
    pick_combos,
    setting_regimes,
    setting_truth,
    sigma_pattern,
    sigma_pattern_values,
    stationary_combos,
)
from src.datagen.corpus import build_corpus, load_corpus, read_manifest, split_corpus
from src.errors import ConfigError
from src.field import Location, regular_grid_locations

BASE = StationaryParams(sigma2=1.0, alpha=0.1, nu=0.5)
THETA_E = math.pi / 6


@pytest.mark.parametrize("r, theta", [(5.0, 0.0), (20.0, 1.1), (50.0, math.pi / 4)])
def test_first_pattern_is_half_at_centre(r, theta):
    spec = PatternSpec(u=1, theta=theta, r=r, base=BASE)
    assert sigma_pattern(spec, Location(x=0.5, y=0.5)) == pytest.approx(0.5)


def test_fourth_pattern_at_right_edge():
    spec = PatternSpec(u=4, theta=0.0, base=BASE)
    assert sigma_pattern(spec, Location(x=1.0, y=0.5)) == pytest.approx(1.0)


def test_third_pattern_at_centre():
    spec = PatternSpec(u=3, theta=0.7, r=10.0, base=BASE)
    assert sigma_pattern(spec, Location(x=0.5, y=0.5)) == pytest.approx(0.1192029, abs=1e-7)


@pytest.mark.parametrize("u", [1, 2, 3, 4, 5])
def test_patterns_stay_in_unit_interval(u, rng):
    specs = pattern_specs(u)
    for i in rng.choice(len(specs), 25, replace=False):
        values = sigma_pattern_values(specs[i], rng.uniform(0, 1, size=(200, 2)))
        assert values.min() >= 0.0
        assert values.max() <= 1.0


def test_fifth_pattern_spans_observations_exactly(rng):
    spec = PatternSpec(u=5, theta=THETA_E, base=BASE)
    values = sigma_pattern_values(spec, rng.uniform(0, 1, size=(300, 2)))
    assert values.min() == 0.0
    assert values.max() == 1.0


def test_pattern_spec_needs_its_hyperparameters():
    with pytest.raises(ValidationError):
        PatternSpec(u=1, theta=0.0, base=BASE)
    with pytest.raises(ValidationError):
        PatternSpec(u=2, theta=0.0, r=3.0, base=BASE)
    with pytest.raises(ValidationError):
        PatternSpec(u=6, theta=0.0, base=BASE)


@pytest.mark.parametrize("u", [1, 2, 3, 4, 5])
def test_each_pattern_enumerates_3200_combinations(u):
    specs = pattern_specs(u)
    assert len(specs) == 3200
    assert len({(s.theta, s.r, s.p, s.base.nu, s.h_eff) for s in specs}) == 3200


def test_stationary_combination_grid():
    combos = stationary_combos()
    assert len(combos) == 16_000
    nus = sorted({nu for nu, _ in combos})
    assert nus[0] == 0.125
    assert nus[-1] == 2.9375
    assert min(h for _, h in combos) == pytest.approx(0.05)


def test_pick_combos():
    picks = pick_combos(100, 10, seed=3)
    assert picks.tolist() == sorted(set(picks.tolist()))
    np.testing.assert_array_equal(picks, pick_combos(100, 10, seed=3))
    with pytest.raises(ValueError):
        pick_combos(5, 6, seed=0)


def test_modulate_extremes(rng):
    z = rng.standard_normal(50)
    np.testing.assert_array_equal(modulate(z, np.ones(50)), z)
    np.testing.assert_allclose(modulate(z, np.zeros(50)), 0.01 * z)


def test_stationary_corpus_is_deterministic():
    combos = [(0.5, 0.2), (1.0, 0.4), (1.5, 0.1)]
    a = gen_stationary_corpus(2, combos, seed=4, n=16)
    b = gen_stationary_corpus(2, combos, seed=4, n=16)
    assert len(a) == 2
    for fa, fb in zip(a, b):
        np.testing.assert_array_equal(fa.values, fb.values)
        np.testing.assert_array_equal(fa.coords, fb.coords)
    assert not np.array_equal(a[0].values, a[1].values)


def test_nonstationary_sample_keeps_its_profile():
    spec = pattern_specs(1)[0]
    sample = gen_nonstationary_sample(spec, 36, seed=2)
    again = gen_nonstationary_sample(spec, 36, seed=2)
    np.testing.assert_array_equal(sample.field.values, again.field.values)
    np.testing.assert_array_equal(sample.sigma, sigma_pattern_values(spec, sample.field.coords))
    np.testing.assert_array_equal(sample.regimes, np.where(sample.sigma >= 0.5, 2, 1))


def test_setting_specs():
    s1 = SettingSpec.standard(1)
    assert s1.k == 4
    assert (s1.params[0].sigma, s1.params[0].lambda1, s1.params[0].nu) == (1.2, 0.05, 0.9)
    assert all(p.phi == math.pi / 2 for p in s1.params)
    assert SettingSpec.standard(2).anchors.tolist() == [[0.25, 0.25], [0.75, 0.75]]
    with pytest.raises(ValueError):
        SettingSpec.standard(9)


def test_setting_three_truth_is_constant():
    coords = regular_grid_locations(25)
    truth = setting_truth(SettingSpec.standard(3), coords)
    np.testing.assert_allclose(truth, np.tile([2.0, 0.15, 0.8], (25, 1)))


def test_setting_one_truth_at_anchor():
    spec = SettingSpec.standard(1, bandwidth=1e-4)
    truth = setting_truth(spec, [[0.25, 0.25]])
    np.testing.assert_allclose(truth[0], [1.2, 0.05, 0.9])


def test_gen_setting():
    spec = SettingSpec.standard(2, n=16)
    field = gen_setting(spec, seed=1)
    np.testing.assert_array_equal(field.coords, regular_grid_locations(16))
    np.testing.assert_array_equal(field.values, gen_setting(spec, seed=1).values)
    regimes = setting_regimes(spec, field.coords)
    assert regimes[0] == 1 and regimes[-1] == 2


def test_corpus_build_and_load(tmp_path):
    manifest = build_corpus(tmp_path / "a", n_stationary=3, n_nonstationary=5, n=16, seed=1)
    assert manifest.count(Label.STATIONARY) == 3
    assert manifest.count(Label.NONSTATIONARY) == 5
    assert [e.pattern.u for e in manifest.entries if e.pattern] == [1, 2, 3, 4, 5]
    assert read_manifest(tmp_path / "a") == manifest

    build_corpus(tmp_path / "b", n_stationary=3, n_nonstationary=5, n=16, seed=1)
    for entry in manifest.entries:
        assert (tmp_path / "a" / entry.path).read_bytes() == (
            tmp_path / "b" / entry.path
        ).read_bytes()

    samples = load_corpus(tmp_path / "a" / "manifest.yaml", g=4)
    assert len(samples) == 8
    assert samples[0].image.g == 4
    assert [s.label for s in samples].count(Label.STATIONARY) == 3


def test_invalid_manifest(tmp_path):
    (tmp_path / "manifest.yaml").write_text("kind: something-else\nseed: 0\nn: 4\n")
    with pytest.raises(ConfigError):
        read_manifest(tmp_path)


def test_split_is_per_class(tmp_path):
    build_corpus(tmp_path, n_stationary=3, n_nonstationary=5, n=16, seed=2)
    samples = load_corpus(tmp_path, g=4)
    train, test = split_corpus(samples, 0.4, seed=0)
    assert len(train) + len(test) == 8
    assert [s.label for s in test].count(Label.STATIONARY) == 1
    assert [s.label for s in test].count(Label.NONSTATIONARY) == 2
    with pytest.raises(ValueError):
        split_corpus(samples, 1.0, seed=0)
