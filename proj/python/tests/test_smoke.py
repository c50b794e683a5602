import numpy as np
import pytest

import manifold_align as ma


@pytest.fixture(scope="module")
def pair():
    x = ma.generate_dataset(ma.PendulumConfig.pendulum1(), 120)
    y = ma.generate_dataset(ma.PendulumConfig.pendulum2(), 120)
    return x, y, ma.select_correspondences(x, y, 120)


def test_kinematics():
    p = ma.PendulumConfig(1.25, 0.75)
    np.testing.assert_allclose(ma.forward_kinematics(p, (0, 0, 0, 0)), [2, 0, 0], atol=1e-12)
    np.testing.assert_allclose(ma.forward_kinematics(p, (0, 90, 0, 0)), [0, 2, 0], atol=1e-12)
    f = ma.feature_vector(p, (90, 0, 0, 0))
    np.testing.assert_allclose(f, [0, 0, -2, 0, 1, 1, 1, 0, 1, 0, 0], atol=1e-12)
    with pytest.raises(ma.InvalidArgument):
        ma.PendulumConfig(1.0, 2.0)


def test_dataset(pair):
    x, y, corr = pair
    assert len(x) == 81
    assert x.features.shape == (81, 11)
    assert x.grid_angles.shape == (81, 4)
    assert len(corr) == 81
    noisy = ma.add_noise(x, "coordinate", 0.5, 3)
    diff = noisy.features - x.features
    assert np.abs(diff[:, :3]).max() <= 0.5
    assert np.all(diff[:, 3:] == 0)
    assert not noisy.noise_free


@pytest.mark.parametrize("method", ma.METHODS)
def test_feature_alignment(pair, method):
    x, y, corr = pair
    r = ma.align(x, y, corr, method, "feature")
    assert r.sx.shape == (81, 3)
    assert r.method == method
    np.testing.assert_allclose(x.features @ r.map_x, r.sx, atol=1e-10)
    np.testing.assert_allclose(y.features @ r.map_y + r.offset_y, r.sy, atol=1e-10)
    row = ma.map_out_of_sample(r, x.features[5], "x")
    assert np.array_equal(row, r.sx[5])
    stats = ma.evaluate(r, ma.grid_pairing(x, y))
    assert np.isfinite(stats["delta"]) and stats["delta"] >= 0


def test_instance_has_no_map(pair):
    x, y, corr = pair
    r = ma.align(x, y, corr, "local_laplacian", "instance")
    assert r.map_x is None
    with pytest.raises(ma.Unsupported):
        ma.map_out_of_sample(r, x.features[0], "x")


def test_errors(pair):
    x, y, corr = pair
    with pytest.raises(ma.DisconnectedGraph):
        ma.align(x, y, corr, "global_distance", "feature", k=1)
    with pytest.raises(ma.InvalidArgument):
        ma.align(x, y, corr, "cca")
    assert issubclass(ma.Unsupported, ma.Error)


def test_metrics():
    sx = np.array([[0.0, 0.0], [1.0, 0.0]])
    sy = np.array([[0.0, 1.0], [1.0, 1.0]])
    d = ma.normalized_distances(sx, sy, ma.CorrespondenceSet.identity(2))
    assert d == [1.0, 1.0]
    s = ma.summarize([0.0, 2.0])
    assert s["delta"] == 1.0 and s["sigma"] == 1.0


def test_procrustes():
    rng = np.random.default_rng(0)
    src = rng.standard_normal((20, 3))
    t = ma.procrustes_fit(src, 2.0 * src + 1.0)
    assert abs(t.scale - 2.0) < 1e-10
    np.testing.assert_allclose(t.translation, [1, 1, 1], atol=1e-10)
