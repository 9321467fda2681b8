import numpy as np

from pytest import approx, raises

from flockwave.denoising import (
    average_relative_activity,
    build_profile,
    denoise,
    denoise_batch,
    detect_noise_nodes,
    encode,
    FormatError,
    Image,
    load_profile,
    make_pairs,
    neutral_values,
    NoiseProfile,
    reconstruct,
    relative_activity,
    save_profile,
)
from flockwave.denoising.denoising import (
    activity_histogram,
    format_profile,
    parse_profile,
    relative_activity_batch,
    suppress_noise_nodes,
)
from flockwave.denoising.images import normalize_bytes

from .conftest import make_digits


def random_images(count: int, seed: int = 0) -> list[Image]:
    rng = np.random.default_rng(seed)
    return [Image(width=4, height=4, pixels=rng.random(16)) for _ in range(count)]


def digit_pairs(count: int, variance: float = 0.2, seed: int = 0):
    matrix = normalize_bytes(make_digits(count, seed=seed)).reshape(count, 16)
    return make_pairs(matrix, variance, seed, shape=(4, 4))


def test_relative_activity_of_identical_images(random_dbn):
    image = random_images(1)[0]
    assert np.all(relative_activity(random_dbn, image, image) == 0.0)


def test_relative_activity_of_zero_network(zero_dbn):
    clean, noisy = random_images(2)
    assert np.all(relative_activity(zero_dbn, clean, noisy) == 0.0)


def test_relative_activity_is_symmetric_and_bounded(random_dbn):
    images = random_images(20, seed=1)
    for clean, noisy in zip(images[::2], images[1::2]):
        forward = relative_activity(random_dbn, clean, noisy)
        assert np.array_equal(forward, relative_activity(random_dbn, noisy, clean))
        assert np.all((forward >= 0.0) & (forward <= 1.0))


def test_relative_activity_batch_matches_single_pairs(random_dbn):
    pairs = digit_pairs(6)
    result = relative_activity_batch(random_dbn, pairs.clean, pairs.noisy)
    for row, (clean, noisy) in zip(result, pairs):
        assert np.allclose(row, relative_activity(random_dbn, clean, noisy))

    with raises(ValueError):
        relative_activity_batch(random_dbn, pairs.clean, pairs.noisy[:3])


def test_average_relative_activity(random_dbn):
    pairs = digit_pairs(10)
    ara = average_relative_activity(random_dbn, pairs)
    assert ara.shape == (4,)
    expected = np.mean([relative_activity(random_dbn, *pair) for pair in pairs], axis=0)
    assert ara == approx(expected)

    with raises(ValueError):
        average_relative_activity(random_dbn, pairs[:0])


def test_detect_noise_nodes():
    ara = [0.95, 0.2, 0.91, 0.9]
    assert detect_noise_nodes(ara, 0.9) == (0, 2)
    assert detect_noise_nodes(ara, 1.0) == ()
    assert detect_noise_nodes(ara, 0.0) == (0, 1, 2, 3)
    assert detect_noise_nodes([0.0, 0.0], 0.0) == ()

    with raises(ValueError):
        detect_noise_nodes(ara, 1.5)


def test_detect_noise_nodes_is_monotonic_in_threshold():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        ara = rng.random(20)
        low, high = sorted(rng.random(2))
        assert set(detect_noise_nodes(ara, high)) <= set(detect_noise_nodes(ara, low))


def test_neutral_values(zero_dbn, random_dbn):
    images = random_images(5)
    assert np.all(neutral_values(zero_dbn, images, [0, 3]) == 0.5)

    values = neutral_values(random_dbn, images, [3, 1])
    tops = np.array([encode(random_dbn, image).top for image in images])
    assert values == approx(tops.mean(axis=0)[[3, 1]])
    assert neutral_values(random_dbn, images, []).shape == (0,)

    with raises(ValueError):
        neutral_values(random_dbn, [], [0])

    with raises(ValueError):
        neutral_values(random_dbn, images, [4])


def test_noise_profile_validation():
    ara = np.array([0.1, 0.95, 0.3])

    with raises(ValueError):
        NoiseProfile(1.5, (), np.zeros(0), ara)

    with raises(ValueError):
        NoiseProfile(0.9, (3,), [0.5], ara)

    with raises(ValueError):
        NoiseProfile(0.9, (2, 1), [0.5, 0.5], ara)

    with raises(ValueError):
        NoiseProfile(0.9, (1,), [0.5, 0.5], ara)

    with raises(ValueError):
        NoiseProfile(0.9, (1,), [1.5], ara)

    profile = NoiseProfile(0.9, (1,), [0.25], ara)
    assert len(profile) == 1
    assert profile.top_width == 3
    assert profile.flags.tolist() == [False, True, False]
    assert profile.is_consistent()
    assert not NoiseProfile(0.2, (1,), [0.25], ara).is_consistent()


def test_empty_profile_denoising_equals_plain_reconstruction(random_dbn):
    profile = NoiseProfile.empty(random_dbn.top_width)
    assert len(profile) == 0

    for image in random_images(100, seed=3):
        plain = reconstruct(random_dbn, encode(random_dbn, image).top)
        assert denoise(random_dbn, profile, image) == plain


def test_fully_flagged_profile_gives_constant_output(random_dbn):
    profile = NoiseProfile(0.0, (0, 1, 2, 3), [0.1, 0.9, 0.5, 0.3], np.ones(4))
    outputs = [denoise(random_dbn, profile, image) for image in random_images(10)]
    assert all(output == outputs[0] for output in outputs)
    assert outputs[0] == reconstruct(random_dbn, [0.1, 0.9, 0.5, 0.3])


def test_suppression_only_touches_noise_nodes():
    profile = NoiseProfile(0.5, (1, 3), [0.25, 0.75], [0.1, 0.6, 0.2, 0.7, 0.4])
    top = np.array([0.9, 0.8, 0.7, 0.6, 0.5])

    result = suppress_noise_nodes(top, profile)
    assert result.tolist() == [0.9, 0.25, 0.7, 0.75, 0.5]
    assert top.tolist() == [0.9, 0.8, 0.7, 0.6, 0.5]

    batch = suppress_noise_nodes(np.tile(top, (3, 1)), profile)
    assert np.all(batch == result)

    with raises(ValueError):
        suppress_noise_nodes(np.zeros(4), profile)


def test_denoise_batch_matches_single_images(random_dbn):
    pairs = digit_pairs(5)
    profile = build_profile(random_dbn, pairs, 0.05)
    result = denoise_batch(random_dbn, profile, pairs.noisy)
    for row, noisy in zip(result, pairs.noisy_images()):
        assert row == approx(denoise(random_dbn, profile, noisy).pixels)


def test_denoise_rejects_wrong_image_size(random_dbn):
    profile = NoiseProfile.empty(random_dbn.top_width)
    with raises(ValueError):
        denoise(random_dbn, profile, Image(width=2, height=2, pixels=np.zeros(4)))


def test_build_profile_without_noise(random_dbn):
    pairs = digit_pairs(10, variance=0.0)
    profile = build_profile(random_dbn, pairs, 0.0)
    assert len(profile) == 0
    assert np.all(profile.average_relative_activity == 0.0)


def test_build_profile(random_dbn):
    pairs = digit_pairs(20, variance=0.5)
    ara = average_relative_activity(random_dbn, pairs)
    threshold = float(np.median(ara))

    profile = build_profile(random_dbn, pairs, threshold)
    assert profile.is_consistent()
    assert profile.noise_nodes == detect_noise_nodes(ara, threshold)
    assert profile.neutral_values == approx(
        neutral_values(random_dbn, pairs.clean, profile.noise_nodes)
    )


def test_profile_file_roundtrip(tmp_path):
    profile = NoiseProfile(
        0.9, (1, 4), [0.123456789, 0.5], [0.1, 0.95, 0.3, 0.0, 0.9125]
    )
    path = tmp_path / "profile.txt"
    save_profile(profile, path)
    loaded = load_profile(path)

    assert loaded.threshold == 0.9
    assert loaded.noise_nodes == (1, 4)
    assert loaded.neutral_values == approx(profile.neutral_values, rel=1e-9)
    assert loaded.average_relative_activity == approx(
        profile.average_relative_activity, rel=1e-9
    )


def test_profile_text_format():
    profile = NoiseProfile(0.5, (1,), [0.25], [0.125, 0.75])
    lines = format_profile(profile).splitlines()
    assert lines[0] == "# threshold 0.5"
    assert lines[2].split() == ["0", "0.125", "0", "-"]
    assert lines[3].split() == ["1", "0.75", "1", "0.25"]


def test_invalid_profiles():
    with raises(FormatError):
        parse_profile("")

    with raises(FormatError):
        parse_profile("  0 0.5 0 -\n")

    with raises(FormatError):
        parse_profile("# threshold 0.5\n  1 0.5 0 -\n")

    with raises(FormatError):
        parse_profile("# threshold 0.5\n  0 0.5 2 -\n")

    with raises(FormatError):
        parse_profile("# threshold 0.5\n  0 0.5 0 0.3\n")

    with raises(FormatError):
        parse_profile("# threshold 0.5\n  0 0.5 1 1.5\n")


def test_activity_histogram():
    histogram = activity_histogram([0.05, 0.15, 0.95, 1.0, 0.0])
    assert len(histogram) == 10
    assert histogram[0] == (0.0, approx(0.1), 2)
    assert histogram[1][2] == 1
    assert histogram[-1][2] == 2
    assert sum(count for _, _, count in histogram) == 5


def test_relative_activity_and_neutral_values_of_paired_block_network(
    paired_block_dbn,
):
    gray = np.full(16, 0.5)
    noisy = np.array([1, 1, 1, 1, 1, 1, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0, 0, 0, 0])
    activity = relative_activity(
        paired_block_dbn,
        Image(width=4, height=4, pixels=gray),
        Image(width=4, height=4, pixels=noisy),
    )
    expected = [0.25, 0.1339745962155614, 0.0, 0.25]
    assert activity == approx(expected, rel=1e-12, abs=1e-15)

    images = np.vstack([gray, noisy])
    assert neutral_values(paired_block_dbn, images, [0, 1, 2, 3]) == approx(
        [0.625, 0.5669872981077807, 0.5, 0.375], rel=1e-12
    )
    assert neutral_values(paired_block_dbn, images, [3, 0]) == approx(
        [0.375, 0.625], rel=1e-12
    )
