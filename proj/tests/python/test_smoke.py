"""End-to-end smoke tests for the python module and the CLI binary."""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

import _sparseloc as sl

CLI = os.environ.get("SPARSELOC_CLI")


def make_operator(m=4, ratio=2, sigma=0.8):
    geom = sl.GridGeometry(m, ratio)
    psf = sl.GaussianPsf.with_default_truncation(sigma)
    return sl.build_measurement_matrix(psf, geom), geom


def test_forward_model_roundtrip():
    op, geom = make_operator()
    a = op.matrix
    assert a.shape == (geom.low_res_count, geom.high_res_count)
    x = np.random.default_rng(0).uniform(size=geom.high_res_count)
    np.testing.assert_allclose(op.apply(x), a @ x, atol=1e-12)
    np.testing.assert_allclose(op.apply_conv(x), a @ x, atol=1e-12)
    r = np.random.default_rng(1).normal(size=geom.low_res_count)
    np.testing.assert_allclose(op.apply_adjoint(r), a.T @ r, atol=1e-12)


def test_diffraction_limit():
    assert sl.diffraction_limit(sl.OpticsParams(600.0, 1.5)) == pytest.approx(200.0)


def test_ista_identity_closed_form():
    eye = np.eye(6)
    y = np.array([2.0, -1.0, 0.1, 0.0, 3.0, -0.25])
    cfg = sl.IstaConfig()
    cfg.lambda_ = 0.5
    cfg.max_iters = 200
    res = sl.ista(eye, y, cfg)
    expected = np.sign(y) * np.maximum(np.abs(y) - 0.25, 0.0)
    np.testing.assert_allclose(res.x, expected, atol=1e-10)
    obj = np.asarray(res.objective)
    assert np.all(obj[1:] <= obj[:-1] + 1e-14 * np.abs(obj[:-1]))


def test_untrained_lista_equals_ista():
    op, geom = make_operator()
    net = sl.init_lista_from_model(op, 0.1, 5)
    cfg = sl.IstaConfig()
    cfg.lambda_ = 0.1
    cfg.max_iters = 5
    y = np.random.default_rng(2).normal(size=geom.low_res_count)
    np.testing.assert_allclose(sl.lista_forward(net, y), sl.ista_op(op, y, cfg).x, atol=1e-10)


def test_simulation_and_sparcom_pipeline():
    op, geom = make_operator()
    emitters = [sl.Emitter(2.5, 5.5, 10.0, 0.5)]
    rendered = sl.render_sequence(emitters, op, sl.NoiseModel(), 500, 7)
    assert len(rendered.sequence.frames) == 500
    cov = sl.empirical_covariance(rendered.sequence)
    pre = sl.sparcom_precompute(op)
    res = sl.sparcom_ista(cov, pre, 0.05, 200)
    grid = np.asarray(res.m).reshape(8, 8)
    peak = np.unravel_index(np.argmax(grid), grid.shape)
    assert peak == (5, 2)  # row floor(5.5), col floor(2.5)


def test_backprop_matches_finite_difference():
    geom = sl.GridGeometry(4, 2)
    net = sl.make_conv_net(sl.NetKind.UlmConv, geom, 2, 3, 5)
    rng = np.random.default_rng(3)
    sample = sl.TrainSample(rng.normal(size=(4, 4)), rng.normal(size=(8, 8)))
    loss, grad = sl.backprop(net, sample)
    flat = net.flatten()
    probe = sl.make_conv_net(sl.NetKind.UlmConv, geom, 2, 3, 5)
    index, h = 7, 1e-5

    def loss_at(value):
        moved = flat.copy()
        moved[index] = value
        probe.unflatten(moved)
        return sl.backprop(probe, sample)[0]

    fd = (loss_at(flat[index] + h) - loss_at(flat[index] - h)) / (2 * h)
    assert grad[index] == pytest.approx(fd, rel=1e-4)


def test_metrics():
    pts = [sl.Localization(1.0, 2.0, 1.0), sl.Localization(5.0, 5.0, 1.0)]
    match = sl.match_points(pts, pts, 1.0)
    metrics = sl.compute_metrics(match)
    assert metrics.precision == 1.0
    assert metrics.recall == 1.0
    assert metrics.rmse_loc == 0.0


@pytest.mark.skipif(CLI is None, reason="cli binary not provided")
def test_cli_pipeline(tmp_path):
    sim_cfg = {
        "seed": 5,
        "geometry": {"low_res_side": 4, "ratio": 2},
        "psf": {"sigma": 0.8},
        "frames": 20,
        "mode": "smlm",
        "structure": {
            "kind": "uniform-points",
            "count": 3,
            "mean_photons": 300.0,
            "on_probability": 0.4,
        },
    }
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps(sim_cfg))
    sim_dir = tmp_path / "sim"
    run = subprocess.run(
        [CLI, "simulate", "--config", str(cfg_path), "--out", str(sim_dir)],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    for name in ("frames.slfr", "truth_static.slfr", "emitters.csv", "manifest.json"):
        assert (sim_dir / name).exists()

    solve_cfg = {
        "geometry": {"low_res_side": 4, "ratio": 2},
        "psf": {"sigma": 0.8},
        "solver": "sparcom",
        "frames": str(sim_dir / "frames.slfr"),
        "lambda_preset": "low",
        "iterations": 100,
        "truth_emitters": str(sim_dir / "emitters.csv"),
    }
    solve_path = tmp_path / "solve.json"
    solve_path.write_text(json.dumps(solve_cfg))
    solve_dir = tmp_path / "solve"
    run = subprocess.run(
        [CLI, "solve", "--config", str(solve_path), "--out", str(solve_dir)],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    manifest = json.loads((solve_dir / "manifest.json").read_text())
    assert manifest["config"]["lambda"] == 0.05
    assert (solve_dir / "recovered.slfr").exists()
    assert (solve_dir / "metrics.json").exists()

    render_cfg = {"grid": str(solve_dir / "recovered.slfr"), "gamma": 0.7, "image": "out.pgm"}
    render_path = tmp_path / "render.json"
    render_path.write_text(json.dumps(render_cfg))
    render_dir = tmp_path / "render"
    run = subprocess.run(
        [CLI, "render", "--config", str(render_path), "--out", str(render_dir)],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 0, run.stderr
    assert (render_dir / "out.pgm").read_bytes().startswith(b"P5\n")


@pytest.mark.skipif(CLI is None, reason="cli binary not provided")
def test_cli_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"geometry": {"low_res_side": 4, "ratio": 2}, "unknown_key": 1}))
    run = subprocess.run(
        [CLI, "simulate", "--config", str(bad), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 2

    run = subprocess.run(
        [CLI, "render", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path / "o")],
        capture_output=True,
        text=True,
    )
    assert run.returncode == 4


@pytest.mark.skipif(CLI is None, reason="cli binary not provided")
def test_cli_reproducibility(tmp_path):
    cfg = {
        "seed": 9,
        "geometry": {"low_res_side": 4, "ratio": 2},
        "psf": {"sigma": 0.8},
        "noise": {"gaussian_sigma": 0.5, "poisson": True},
        "frames": 8,
        "mode": "ulm",
        "density": 2.0,
    }
    cfg_path = tmp_path / "sim.json"
    cfg_path.write_text(json.dumps(cfg))
    dirs = [tmp_path / "a", tmp_path / "b"]
    for d in dirs:
        run = subprocess.run(
            [CLI, "simulate", "--config", str(cfg_path), "--out", str(d)],
            capture_output=True,
            text=True,
        )
        assert run.returncode == 0, run.stderr
    for name in ("frames.slfr", "truth_frames.slfr", "emitters.csv", "manifest.json"):
        assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
