import json
import math

import numpy as np
import pytest

import sonarmvs as sm


def small_intrinsics():
    k = sm.Intrinsics()
    k.range_bins = 128
    k.azimuth_bins = 32
    k.elevation_planes = 16
    return k


def test_geometry_round_trip():
    p = sm.spherical_to_euclidean(1.3, 0.2, -0.1)
    r, theta, phi = sm.euclidean_to_spherical(p)
    assert (r, theta, phi) == pytest.approx((1.3, 0.2, -0.1), abs=1e-12)
    assert np.allclose(sm.spherical_to_euclidean(1, 0, 0), [1, 0, 0])


def test_pose_group():
    a = sm.Pose.roll(0.3) * sm.Pose.translation_only([0.1, 0.2, 0.3])
    ident = a * a.inverse()
    assert np.allclose(ident.rotation, np.eye(3), atol=1e-12)
    assert np.allclose(ident.translation, 0, atol=1e-12)
    assert np.allclose(sm.Pose.roll(math.pi / 2).apply([0, 1, 0]), [0, 0, 1], atol=1e-12)
    q = a.quaternion()
    b = sm.Pose.from_quaternion(q, a.translation)
    assert np.allclose(b.rotation, a.rotation, atol=1e-12)


def test_raycast_on_axis_sphere():
    k = small_intrinsics()
    k.range_max = 3.0
    image, depth = sm.raycast(sm.Scene.sphere([2, 0, 0], 0.5), sm.Pose(), k)
    assert image.shape == (128, 32)
    assert depth.shape == (16, 32)
    assert image.min() >= 0 and image.sum() > 0
    assert depth.min() == pytest.approx(1.5, abs=1e-3)


def test_reconstruct_and_evaluate_sphere():
    k = small_intrinsics()
    center = sm.spherical_to_euclidean(1.5, 0.05, math.radians(3))
    views = sm.generate_views(sm.Scene.sphere(center, 0.15), sm.Pose(), [7.0], k, seed=3)
    assert len(views["sources"]) == 1
    depth, tau = sm.reconstruct(views["reference"], views["sources"], views["relative_poses"], k)
    assert depth.shape == views["ground_truth"].shape
    assert tau > 0
    metrics = sm.evaluate(depth, views["ground_truth"], k)
    assert metrics["estimate_points"] > 0
    assert math.isfinite(metrics["chamfer"])
    exact = sm.evaluate(views["ground_truth"], views["ground_truth"], k)
    assert exact["mae"] == 0 and exact["chamfer"] == 0

    cloud = sm.baseline(views["reference"], views["sources"], views["relative_poses"], k)
    assert cloud.ndim == 2 and cloud.shape[1] == 3


def test_params_and_errors():
    p = sm.ReconstructParams()
    assert p.feature_mode == "patch-stats"
    p.feature_mode = "gradient"
    p.sigma = [1.0, 0.0, 0.5]
    assert p.sigma == [1.0, 0.0, 0.5]
    with pytest.raises(sm.ConfigError):
        p.feature_mode = "colour"
    k = small_intrinsics()
    with pytest.raises(sm.DataError):
        sm.reconstruct(np.zeros((10, 10)), [], [], k)


def test_chamfer():
    a = np.zeros((1, 3))
    b = np.array([[1.0, 0, 0]])
    assert sm.chamfer(a, b) == 1000.0
    rng = np.random.default_rng(0)
    x = rng.random((300, 3))
    y = rng.random((200, 3))
    assert sm.chamfer(x, y) == pytest.approx(sm.chamfer(x, y, brute_force=True), rel=1e-9)


def test_file_round_trips(tmp_path):
    values = np.random.default_rng(1).standard_normal((7, 5)).astype(np.float32)
    sm.write_tensor(tmp_path / "t.snr", values, ["elevation", "azimuth"])
    back, labels = sm.read_tensor(tmp_path / "t.snr")
    assert labels == ["elevation", "azimuth"]
    assert back.dtype == np.float32 and np.array_equal(back, values)

    pts = np.random.default_rng(2).random((50, 3)).astype(np.float32).astype(np.float64)
    sm.write_ply(tmp_path / "c.ply", pts)
    assert np.array_equal(sm.read_ply(tmp_path / "c.ply"), pts)
    with pytest.raises(sm.IoError):
        sm.read_tensor(tmp_path / "missing.snr")


def test_cli_pipeline(tmp_path):
    config = {
        "family": "sphere",
        "count": 2,
        "seed": 1,
        "intrinsics": {"range_bins": 64, "azimuth_bins": 16, "elevation_planes": 8},
        "render": {"rays_per_elevation": 64},
    }
    (tmp_path / "config.json").write_text(json.dumps(config))
    ds = tmp_path / "ds"
    code, out, err = sm.run_cli(["gen", "--config", str(tmp_path / "config.json"), "--out", str(ds)])
    assert code == 0, err
    manifest = str(ds / "manifest.json")
    code, _, err = sm.run_cli(["reconstruct", "--manifest", manifest, "--all", "--out", str(tmp_path / "est")])
    assert code == 0, err
    code, out, err = sm.run_cli(["eval", "--manifest", manifest, "--estimates", str(tmp_path / "est")])
    assert code == 0, err
    report = json.loads((tmp_path / "est" / "report.json").read_text())
    assert report["count"] == 2
    assert set(report["aggregate"]["mae"]) == {"mean", "std"}

    sample = sm.generate_sample(json.dumps(config), 0)
    depth, _ = sm.read_tensor(ds / "sample_0000" / "gt_depth.snr")
    assert np.array_equal(depth, sample["ground_truth"].astype(np.float32))
    assert sm.run_cli(["gen", "--bogus"])[0] == 2
