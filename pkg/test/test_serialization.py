import numpy as np

from pytest import raises
from struct import pack

from flockwave.denoising import (
    Dbn,
    encode_batch,
    FormatError,
    load_model,
    save_model,
    TruncatedDataError,
    VisibleKind,
)
from flockwave.denoising.serialization import dump_model, parse_model


def test_model_file_roundtrip(random_dbn, tmp_path):
    path = tmp_path / "model.dbnm"
    save_model(random_dbn, path)

    loaded = load_model(path)
    assert loaded == random_dbn
    assert loaded.image_shape == (4, 4)
    assert loaded.layers[0].visible_kind is VisibleKind.UNIT_INTERVAL
    assert loaded.layers[1].visible_kind is VisibleKind.BINARY

    inputs = np.random.default_rng(0).random((5, 16))
    assert np.array_equal(
        encode_batch(loaded, inputs).top, encode_batch(random_dbn, inputs).top
    )


def test_full_scale_model_roundtrip():
    dbn = Dbn.create([784, 1000, 500, 250, 100], seed=1)
    data = dump_model(dbn)
    assert data[:4] == b"DBNM"
    assert parse_model(data) == dbn


def test_model_file_header(random_dbn):
    data = dump_model(random_dbn)
    assert data[:12] == pack("<4sII", b"DBNM", 1, 2)
    assert data[12:20] == pack("<II", 16, 8)
    assert len(data) == 12 + 2 * 8 + 8 * (16 + 8 + 16 * 8) + 8 * (8 + 4 + 8 * 4)


def test_truncated_model_file(random_dbn):
    data = dump_model(random_dbn)
    for length in (0, 8, 16, len(data) - 1):
        with raises(TruncatedDataError):
            parse_model(data[:length])


def test_bad_magic(random_dbn):
    data = dump_model(random_dbn)
    with raises(FormatError, match="magic"):
        parse_model(b"XBNM" + data[4:])


def test_bad_version(random_dbn):
    data = dump_model(random_dbn)
    with raises(FormatError, match="version"):
        parse_model(data[:4] + pack("<I", 2) + data[8:])


def test_trailing_bytes(random_dbn):
    with raises(FormatError, match="trailing"):
        parse_model(dump_model(random_dbn) + b"\x00")


def test_mismatching_layer_widths(random_dbn):
    data = bytearray(dump_model(random_dbn))
    # Visible width of the second machine
    offset = 12 + 8 + 8 * (16 + 8 + 16 * 8)
    data[offset : offset + 4] = pack("<I", 7)
    with raises(FormatError):
        parse_model(bytes(data))


def test_empty_model():
    with raises(FormatError):
        parse_model(pack("<4sII", b"DBNM", 1, 0))
