import numpy as np
import pytest

from modelforge import pgwt


def test_roundtrip():
    tensors = {
        "layer0.w": np.random.default_rng(0).normal(size=(8, 4)).astype(np.float32),
        "layer0.b": np.zeros(4, np.float32),
        "half": np.ones((3, 3), np.float16),
    }
    blob = pgwt.dump(tensors)
    loaded, version = pgwt.load(blob)
    assert version == pgwt.VERSION
    assert set(loaded) == set(tensors)
    for name in tensors:
        assert loaded[name].dtype == tensors[name].dtype
        assert np.array_equal(loaded[name], tensors[name])
    assert pgwt.dump(loaded) == blob


def test_empty_dump_is_header_only():
    assert len(pgwt.dump({})) == 8


def test_f16_halves_payload():
    arr32 = np.ones((100, 100), np.float32)
    a = pgwt.dump({"w": arr32})
    b = pgwt.dump({"w": arr32.astype(np.float16)})
    # header 8 + record metadata 13 (name_len, "w", dtype, rank, 2 dims)
    meta = 8 + 13
    assert len(a) - meta == 40000
    assert (len(b) - meta) * 2 == len(a) - meta


def test_bad_magic():
    with pytest.raises(pgwt.PgwtError):
        pgwt.load(b"NOPE" + b"\x00" * 4)


def test_truncated():
    blob = pgwt.dump({"w": np.ones((4, 4), np.float32)})
    with pytest.raises(pgwt.PgwtError):
        pgwt.load(blob[:-8])


def test_non_finite_rejected():
    with pytest.raises(pgwt.PgwtError):
        pgwt.dump({"w": np.array([np.inf], np.float32)})


def test_integer_arrays_rejected():
    with pytest.raises(pgwt.PgwtError):
        pgwt.dump({"w": np.ones(3, np.int32)})
