"""Smoke tests for the python bindings."""

import numpy as np
import pytest

import jano


def make_scene(height=48, width=48, frames=8, channels=4):
    return {
        "channels": channels,
        "frames": frames,
        "height": height,
        "width": width,
        "seed": 11,
        "regions": [
            {"box": [0, frames, 0, height, 0, width], "pattern": "constant", "amplitude": 0.3},
            {
                "box": [0, frames, 0, 16, 0, 16],
                "pattern": "checkerboard",
                "amplitude": 3.0,
                "period": 8,
            },
            {
                "box": [0, frames, 16, 32, 16, 32],
                "pattern": "sinusoid",
                "amplitude": 6.0,
                "freq": 0.375,
            },
        ],
    }


def test_latent_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    latent = rng.normal(size=(2, 3, 8, 8)).astype(np.float32)
    path = str(tmp_path / "x.jlat")
    jano.save_latent(latent, path)
    back = jano.load_latent(path)
    assert back.shape == latent.shape
    assert np.array_equal(back, latent)


def test_load_rejects_garbage(tmp_path):
    path = tmp_path / "bad.jlat"
    path.write_bytes(b"NOPE" + b"\x00" * 32)
    with pytest.raises(ValueError):
        jano.load_latent(str(path))


def test_render_and_fft_ground_truth():
    clean = jano.render_scene(make_scene())
    assert clean.shape == (4, 8, 48, 48)
    scores = jano.fft_ground_truth(clean, block=(2, 16, 16))
    assert len(scores) == 4 * 3 * 3
    assert min(scores) >= 0.0 and max(scores) <= 1.0
    # The high-frequency tile outranks the constant background.
    assert max(scores) > 0.9
    assert min(scores) < 0.05


def test_analyzer_pipeline_end_to_end():
    clean = jano.render_scene(make_scene())
    steps, _noise = jano.synth_trajectory(clean, steps=50, seed=3)
    assert len(steps) == 50
    scores = jano.complexity_map(steps[:5], warmup_steps=5, block=(2, 16, 16))
    gt = jano.fft_ground_truth(clean, block=(2, 16, 16))
    acc = jano.recognition_accuracy(scores, gt)
    r, rho = jano.rank_correlation(scores, gt)
    assert acc > 0.6
    assert rho > 0.5
    assert r == pytest.approx(rho, abs=0.5)

    levels = jano.classify_levels(scores, 0.4, 0.6)
    assert set(levels) <= {1, 2, 3}
    fraction = jano.plan_cost_fraction(
        levels, 8, 48, 48, (2, 16, 16), 50, 6, 2, 6, 4
    )
    assert 0.0 < fraction <= 1.0


def test_threshold_optimizer_budget():
    rng = np.random.default_rng(5)
    scores = rng.uniform(0.01, 1.0, size=36).tolist()
    lo, hi = jano.optimize_thresholds(scores, 0.6, 8, 48, 48, (2, 16, 16), 50, 6, 2, 6, 4)
    assert 0.0 <= lo <= hi <= 1.0
    levels = jano.classify_levels(scores, lo, hi)
    fraction = jano.plan_cost_fraction(levels, 8, 48, 48, (2, 16, 16), 50, 6, 2, 6, 4)
    assert fraction <= 0.6 + 1e-9


def test_oracle_velocity_shared_target_distance():
    mu = [2.0, -1.0, 0.5]
    x0a = [0.1, 0.2, -0.3]
    x0b = [-0.4, 0.8, 0.9]
    t = 0.3
    xta = [t * m + (1 - t) * x for m, x in zip(mu, x0a)]
    xtb = [t * m + (1 - t) * x for m, x in zip(mu, x0b)]
    va = jano.oracle_velocity([mu], [1.0], xta, t)
    vb = jano.oracle_velocity([mu], [1.0], xtb, t)
    assert abs(jano.latent_distance(va, vb, x0a, x0b)) < 1e-9


def test_toy_dit_forward_is_deterministic():
    model = jano.ToyDiT(layers=2, d_model=32, heads=4, ff_dim=64, token_dim=4, seed=9)
    rng = np.random.default_rng(1)
    tokens = rng.normal(size=(16, 4)).astype(np.float32)
    a = model.full_forward(tokens, 0.2)
    b = model.full_forward(tokens, 0.2)
    assert np.array_equal(a, b)
    assert a.shape == tokens.shape
    assert np.isfinite(a).all()


def test_oracle_pipeline_smoke():
    scene = make_scene()
    out = jano.run_oracle_pipeline(scene, sigma_scale=0.2, seed=7)
    assert out["token_step_fraction"] <= 1.0
    assert out["rel_l2_vs_full"] < 0.05
    assert out["final"].shape == (4, 8, 48, 48)
    static, moderate, active = out["level_counts"]
    assert static + moderate + active == 36
