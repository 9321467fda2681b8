from pytest import raises

from flockwave.denoising import FormatError, load_config, RunConfiguration
from flockwave.denoising.config import (
    parse_bool,
    parse_config,
    parse_float_list,
    parse_widths,
)


def test_parse_widths():
    assert parse_widths("784,1000,500,250,100") == (784, 1000, 500, 250, 100)
    assert parse_widths("784-256-128-64") == (784, 256, 128, 64)
    assert parse_widths(" 16, 8 ") == (16, 8)

    for value in ("16", "16,x", "16,0", ""):
        with raises(ValueError):
            parse_widths(value)


def test_parse_float_list():
    assert parse_float_list("0.7, 0.5,0.7,0.3") == (0.7, 0.5, 0.3)
    assert parse_float_list("") == ()

    with raises(ValueError):
        parse_float_list("0.5,abc")


def test_default_configuration():
    config = RunConfiguration()
    assert config.widths == (784, 1000, 500, 250, 100)
    assert config.noise_variance == 0.2
    assert config.threshold == 0.9
    assert config.train_config.learning_rate == 0.1
    assert config.train_config.epochs == 10
    assert config.train_config.seed == 0


def test_configuration_validation():
    with raises(ValueError):
        RunConfiguration(widths=(784,))

    with raises(ValueError):
        RunConfiguration(threshold=1.1)

    with raises(ValueError):
        RunConfiguration(threshold_sweep=(0.5, -0.1))

    with raises(ValueError):
        RunConfiguration(noise_variance=-0.2)

    with raises(ValueError):
        RunConfiguration(train_count=0)

    with raises(ValueError):
        RunConfiguration(learning_rate=-1.0)

    with raises(ValueError):
        RunConfiguration(batch_size=0)


def test_updated_ignores_missing_values():
    config = RunConfiguration().updated(epochs=3, seed=None, widths=(16, 4))
    assert config.epochs == 3
    assert config.seed == 0
    assert config.widths == (16, 4)


def test_format_and_parse():
    config = RunConfiguration(
        widths=(784, 256, 128, 64),
        train_count=2000,
        test_count=1000,
        threshold_sweep=(0.7, 0.5),
        seed=42,
    )
    text = config.format()
    assert "widths = 784,256,128,64\n" in text
    assert "noise_variance = 0.2\n" in text
    assert parse_config(text) == config


def test_parse_config():
    config = parse_config(
        """
        # desk-scale run
        widths = 784-256-128-64
        noise-variance = 0.1

        threshold_sweep = 0.5, 0.3
        """
    )
    assert config.widths == (784, 256, 128, 64)
    assert config.noise_variance == 0.1
    assert config.threshold_sweep == (0.5, 0.3)
    assert config.epochs == 10


def test_parse_config_with_base():
    base = RunConfiguration(epochs=3, seed=9)
    config = parse_config("seed = 1\n", base)
    assert config.epochs == 3
    assert config.seed == 1


def test_invalid_configurations():
    for text in (
        "epochs\n",
        "colour = blue\n",
        "epochs = many\n",
        "threshold = 2\n",
        "widths = 784\n",
    ):
        with raises(FormatError):
            parse_config(text)


def test_load_config(tmp_path):
    path = tmp_path / "run.conf"
    path.write_text("epochs = 2\ntest_count = 50\n", encoding="utf-8")
    config = load_config(path)
    assert config.epochs == 2
    assert config.test_count == 50


def test_parse_bool():
    assert parse_bool("true") is True
    assert parse_bool(" Yes ") is True
    assert parse_bool("0") is False
    assert parse_bool("False") is False

    with raises(ValueError):
        parse_bool("maybe")


def test_visible_bias_initialization_option():
    config = parse_config("init_visible_bias = true\n")
    assert config.init_visible_bias is True
    assert config.train_config.init_visible_bias is True
    assert parse_config(config.format()) == config
    assert RunConfiguration().train_config.init_visible_bias is False
