import numpy as np

from pytest import approx, fixture, raises
from scipy.special import expit, logit

from flockwave.denoising import (
    Dbn,
    load_model,
    load_pgm,
    load_profile,
    PairedDataset,
    Rbm,
    run_experiment,
    RunConfiguration,
    StageError,
    VisibleKind,
)
from flockwave.denoising.experiment import (
    evaluate,
    GRID_FILE,
    load_test_pairs,
    load_training_pairs,
    MODEL_FILE,
    pretrain,
    PROFILE_FILE,
    REPORT_FILE,
    select_profile,
)


@fixture
def config(mnist_dir, tmp_path) -> RunConfiguration:
    return RunConfiguration(
        mnist_dir=str(mnist_dir),
        out_dir=str(tmp_path / "out"),
        widths=(16, 8, 4),
        epochs=3,
        batch_size=10,
        train_count=60,
        test_count=20,
        grid_samples=3,
        seed=1,
    )


def test_loading_pairs(config):
    train = load_training_pairs(config)
    test = load_test_pairs(config)
    assert len(train) == 60 and len(test) == 20
    assert (train.width, train.height) == (4, 4)
    assert not np.array_equal(train.clean, train.noisy)
    assert np.array_equal(load_training_pairs(config).noisy, train.noisy)


def test_loading_fewer_pairs_than_available(config):
    pairs = load_training_pairs(config.updated(train_count=10))
    assert len(pairs) == 10
    assert np.array_equal(pairs.clean, load_training_pairs(config).clean[:10])


def test_loading_more_pairs_than_available(config):
    assert len(load_test_pairs(config.updated(test_count=100))) == 20


def test_pretrain_checks_input_width(config):
    pairs = load_training_pairs(config)
    with raises(ValueError):
        pretrain(config.updated(widths=(25, 8)), pairs)


def test_select_profile_records_thresholds(config):
    pairs = load_training_pairs(config)
    dbn = pretrain(config, pairs)
    profile, counts = select_profile(dbn, pairs, config)

    assert [threshold for threshold, _ in counts] == [0.9, 0.7, 0.5, 0.3]
    assert dict(counts)[profile.threshold] == len(profile)
    assert profile.is_consistent()


def test_select_profile_falls_back_to_configured_threshold(config):
    pairs = load_training_pairs(config.updated(noise_variance=0.0))
    dbn = pretrain(config, pairs)
    profile, counts = select_profile(dbn, pairs, config)
    assert profile.threshold == 0.9
    assert len(profile) == 0
    assert all(count == 0 for _, count in counts)


def test_evaluate(config):
    pairs = load_training_pairs(config)
    dbn = pretrain(config, pairs)
    profile, _ = select_profile(dbn, pairs, config)

    test = load_test_pairs(config)
    mse_noisy, mse_plain, mse_denoised, plain, denoised = evaluate(dbn, profile, test)
    assert mse_noisy > 0
    assert mse_plain > 0 and mse_denoised > 0
    assert plain.shape == denoised.shape == (20, 16)
    if len(profile) == 0:
        assert mse_plain == mse_denoised


def test_run_experiment(config, tmp_path):
    report = run_experiment(config)

    assert report.train_count == 60
    assert report.test_count == 20
    assert report.config is config
    assert sum(count for _, _, count in report.histogram) == 4

    out_dir = tmp_path / "out"
    profile = load_profile(out_dir / PROFILE_FILE)
    assert report.n_noise_nodes == len(profile) == int(profile.flags.sum())
    assert load_model(out_dir / MODEL_FILE).layer_widths == [16, 8, 4]

    text = (out_dir / REPORT_FILE).read_text(encoding="utf-8")
    assert text == report.format()
    assert text.startswith("[results]\n")
    assert f"mse_denoised = {report.mse_denoised:.10g}" in text
    assert "[configuration]" in text

    grid = load_pgm(out_dir / GRID_FILE)
    assert grid.shape == (4 * 4 + 3 * 2, 3 * 4 + 2 * 2)


def test_run_experiment_is_deterministic(config, tmp_path):
    out_dir = tmp_path / "out"
    names = (MODEL_FILE, PROFILE_FILE, REPORT_FILE, GRID_FILE)

    run_experiment(config)
    first = {name: (out_dir / name).read_bytes() for name in names}
    run_experiment(config)
    second = {name: (out_dir / name).read_bytes() for name in names}

    assert first == second


def test_run_experiment_without_training(config, tmp_path):
    report = run_experiment(config.updated(epochs=0), write_outputs=False)
    assert report.mse_noisy > 0
    assert not (tmp_path / "out").exists()


def test_run_experiment_without_grid(config, tmp_path):
    run_experiment(config.updated(grid_samples=0))
    assert (tmp_path / "out" / REPORT_FILE).exists()
    assert not (tmp_path / "out" / GRID_FILE).exists()


def test_stage_errors(config, tmp_path):
    with raises(StageError) as info:
        run_experiment(config.updated(mnist_dir=str(tmp_path / "missing")))
    assert info.value.stage == "load"
    assert isinstance(info.value.__cause__, FileNotFoundError)

    with raises(StageError) as info:
        run_experiment(config.updated(widths=(25, 8)))
    assert info.value.stage == "pretrain"


def noise_detector_dbn(weight: float, bias: float, background: float) -> Dbn:
    """Single-layer 16-2 network whose second hidden unit responds to the
    overall brightness of the image, while the first one is constant. The
    visible biases make a neutral second unit reconstruct the background.
    """
    neutral = expit(16 * background * weight + bias)
    weights = np.zeros((16, 2))
    weights[:, 1] = weight
    rbm = Rbm(
        weights=weights,
        visible_bias=np.full(16, logit(background) - weight * neutral),
        hidden_bias=[0.0, bias],
        visible_kind=VisibleKind.UNIT_INTERVAL,
    )
    return Dbn([rbm])


def brightened_pairs(background: float) -> PairedDataset:
    clean = np.full((2, 16), background)
    noisy = np.vstack([np.tile([0.5, 1.0], 8), np.full(16, 0.75)])
    return PairedDataset(clean, noisy, 4, 4, 0.2)


def check_noise_node_suppression(
    weight: float, bias: float, threshold: float
) -> None:
    pairs = brightened_pairs(0.25)
    dbn = noise_detector_dbn(weight, bias, 0.25)

    profile, counts = select_profile(dbn, pairs, RunConfiguration())
    assert profile.noise_nodes == (1,)
    assert profile.threshold == threshold
    assert dict(counts)[threshold] == 1
    assert profile.neutral_values == approx([expit(4 * weight + bias)])

    mse_noisy, mse_plain, mse_denoised, plain, denoised = evaluate(dbn, profile, pairs)
    assert mse_denoised < mse_plain < mse_noisy
    assert mse_noisy == approx(0.28125)
    assert denoised == approx(pairs.clean, abs=1e-12)
    assert np.all(plain > pairs.clean)


def test_noise_node_suppression_improves_on_plain_reconstruction():
    check_noise_node_suppression(1.0, -8.0, 0.9)


def test_noise_node_found_by_threshold_sweep_improves_reconstruction():
    check_noise_node_suppression(0.25, -2.0, 0.3)
