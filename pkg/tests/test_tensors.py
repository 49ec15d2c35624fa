import struct

import numpy as np
import pytest

from phishguard.errors import (
    BadMagicError,
    DimOverflowError,
    DuplicateNameError,
    InvalidNameError,
    MissingWeightError,
    NonFiniteError,
    QuantizeOverflowError,
    ShapeMismatchError,
    TruncatedStreamError,
)
from phishguard.tensors import (
    MAGIC,
    LayerSpec,
    MlpSpec,
    Tensor,
    WeightStore,
    infer_mlp_spec,
    load_weights,
    mlp_forward,
    quantize,
    save_weights,
    softmax,
    weight_names,
)

from .conftest import oracle_mlp


def random_store(rng, n_tensors=4, dtype="f32") -> WeightStore:
    tensors = []
    for i in range(n_tensors):
        rank = int(rng.integers(1, 4))
        dims = tuple(int(d) for d in rng.integers(1, 6, rank))
        arr = rng.normal(0, 1, dims)
        tensors.append((f"t{i}", Tensor.from_values(arr, dtype)))
    return WeightStore(tensors)


class TestTensor:
    def test_rejects_non_finite(self):
        with pytest.raises(NonFiniteError):
            Tensor(np.array([1.0, np.nan], dtype=np.float32))

    def test_rejects_other_dtypes(self):
        with pytest.raises(ValueError):
            Tensor(np.array([1, 2], dtype=np.int32))

    def test_immutable(self):
        t = Tensor.from_values([1.0, 2.0])
        with pytest.raises(ValueError):
            t.array[0] = 3.0

    def test_f16_widens_exactly(self):
        t = Tensor.from_values([1.0, 0.5, -2.25], "f16")
        assert t.dtype == "f16"
        assert t.as_f32().dtype == np.float32
        assert list(t.as_f32()) == [1.0, 0.5, -2.25]


class TestWeightFile:
    def test_empty_store_is_header_only(self):
        blob = save_weights(WeightStore())
        assert len(blob) == 8
        assert blob[:4] == MAGIC

    def test_single_tensor_roundtrip(self):
        store = WeightStore([("w", Tensor.from_values([[1.0, 2.0], [3.0, 4.0]]))])
        loaded = load_weights(save_weights(store))
        assert len(loaded) == 1
        assert loaded["w"] == store["w"]

    def test_f16_dtype_tag(self):
        store = WeightStore([("h", Tensor.from_values([1.0], "f16"))])
        blob = save_weights(store)
        # header(8) + name_len(2) + name(1) -> dtype tag byte
        assert blob[11] == 1

    def test_bad_magic(self):
        with pytest.raises(BadMagicError):
            load_weights(b"XXXX" + b"\x00" * 8)

    def test_truncated_header(self):
        with pytest.raises(TruncatedStreamError):
            load_weights(b"PGWT\x01")

    def test_truncated_payload(self):
        store = WeightStore([("w", Tensor.from_values(np.ones((3, 3))))])
        blob = save_weights(store)
        with pytest.raises(TruncatedStreamError, match="'w'"):
            load_weights(blob[:-4])

    def test_duplicate_name(self):
        store = WeightStore([("w", Tensor.from_values([1.0]))])
        record = save_weights(store)[8:]
        with pytest.raises(DuplicateNameError, match="'w'"):
            load_weights(save_weights(store) + record)

    def test_dim_overflow(self):
        blob = MAGIC + struct.pack("<I", 1)
        blob += struct.pack("<H", 1) + b"w" + struct.pack("<BB", 0, 2)
        blob += struct.pack("<II", 2**31, 2**20)
        with pytest.raises(DimOverflowError, match="'w'"):
            load_weights(blob)

    def test_zero_extent_rejected(self):
        blob = MAGIC + struct.pack("<I", 1)
        blob += struct.pack("<H", 1) + b"w" + struct.pack("<BB", 0, 1) + struct.pack("<I", 0)
        with pytest.raises(Exception, match="extent"):
            load_weights(blob)

    def test_non_finite_payload_rejected(self):
        blob = MAGIC + struct.pack("<I", 1)
        blob += struct.pack("<H", 1) + b"w" + struct.pack("<BB", 0, 1) + struct.pack("<I", 1)
        blob += struct.pack("<f", float("inf"))
        with pytest.raises(NonFiniteError, match="'w'"):
            load_weights(blob)

    def test_empty_name_rejected(self):
        blob = MAGIC + struct.pack("<I", 1) + struct.pack("<H", 0)
        blob += struct.pack("<BB", 0, 1) + struct.pack("<I", 1) + struct.pack("<f", 1.0)
        with pytest.raises(InvalidNameError):
            load_weights(blob)

    @pytest.mark.parametrize("seed", range(10))
    def test_roundtrip_random_stores(self, seed):
        rng = np.random.default_rng(seed)
        dtype = "f16" if seed % 2 else "f32"
        store = random_store(rng, n_tensors=int(rng.integers(0, 6)), dtype=dtype)
        blob = save_weights(store)
        loaded = load_weights(blob)
        assert loaded == store
        assert save_weights(loaded) == blob  # byte-exact round trip

    def test_version_preserved(self):
        store = WeightStore([("w", Tensor.from_values([1.0]))], format_version=7)
        assert load_weights(save_weights(store)).format_version == 7


class TestMlpSpec:
    def test_dimension_chaining_enforced(self):
        with pytest.raises(ValueError, match="chain"):
            MlpSpec((LayerSpec(4, 8), LayerSpec(9, 2, "none")))

    def test_final_activation_must_be_none(self):
        with pytest.raises(ValueError, match="logits"):
            MlpSpec((LayerSpec(4, 2, "relu"),))

    def test_from_dims(self):
        spec = MlpSpec.from_dims([25600, 512, 2], dropout_rate=0.2)
        assert [l.activation for l in spec.layers] == ["relu", "none"]
        assert spec.in_dim == 25600 and spec.out_dim == 2
        assert weight_names(spec) == ["layer0.w", "layer0.b", "layer1.w", "layer1.b"]

    def test_dropout_range(self):
        with pytest.raises(ValueError):
            MlpSpec.from_dims([4, 2], dropout_rate=1.0)


def make_net(rng, dims):
    tensors = []
    arrays = {}
    for i, (a, b) in enumerate(zip(dims, dims[1:])):
        w = rng.normal(0, 1.0 / np.sqrt(a), (a, b))
        bias = rng.normal(0, 0.1, b)
        arrays[f"layer{i}.w"] = w
        arrays[f"layer{i}.b"] = bias
        tensors += [(f"layer{i}.w", Tensor.from_values(w)), (f"layer{i}.b", Tensor.from_values(bias))]
    return MlpSpec.from_dims(dims), WeightStore(tensors), arrays


class TestMlpForward:
    def test_zero_weights_two_class_head(self):
        spec = MlpSpec.from_dims([6, 2])
        store = WeightStore(
            [
                ("layer0.w", Tensor.from_values(np.zeros((6, 2)))),
                ("layer0.b", Tensor.from_values(np.zeros(2))),
            ]
        )
        logits = mlp_forward(spec, store, np.ones((1, 6), np.float32))
        assert np.array_equal(logits, np.zeros((1, 2), np.float32))
        assert list(softmax(logits)[0]) == [0.5, 0.5]

    def test_identity_layer(self):
        spec = MlpSpec.from_dims([4, 4])
        store = WeightStore(
            [
                ("layer0.w", Tensor.from_values(np.eye(4))),
                ("layer0.b", Tensor.from_values(np.zeros(4))),
            ]
        )
        x = np.array([[0.5, -1.0, 2.0, 0.0]], np.float32)
        assert np.array_equal(mlp_forward(spec, store, x), x)

    def test_missing_weight(self):
        spec = MlpSpec.from_dims([4, 2])
        with pytest.raises(MissingWeightError, match="layer0.w"):
            mlp_forward(spec, WeightStore(), np.zeros((1, 4)))

    def test_shape_mismatch(self):
        spec, store, _ = make_net(np.random.default_rng(0), [4, 3, 2])
        with pytest.raises(ShapeMismatchError):
            mlp_forward(spec, store, np.zeros((1, 5)))

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_naive_oracle(self, seed):
        rng = np.random.default_rng(seed)
        depth = int(rng.integers(2, 5))
        dims = [int(d) for d in rng.integers(2, 24, depth + 1)]
        spec, store, arrays = make_net(rng, dims)
        x = rng.normal(0, 1, (int(rng.integers(1, 6)), dims[0]))
        got = mlp_forward(spec, store, x)
        want = oracle_mlp(dims, arrays, x)
        rel = np.abs(got - want).max() / max(np.abs(want).max(), 1e-12)
        assert rel <= 1e-5

    def test_deterministic_across_calls(self):
        rng = np.random.default_rng(3)
        spec, store, _ = make_net(rng, [8, 8, 2])
        x = rng.normal(0, 1, (4, 8)).astype(np.float32)
        a = mlp_forward(spec, store, x)
        b = mlp_forward(spec, store, x)
        assert np.array_equal(a, b)

    def test_bit_identical_across_threads(self):
        from concurrent.futures import ThreadPoolExecutor

        rng = np.random.default_rng(13)
        spec, store, _ = make_net(rng, [64, 16, 2])
        x = rng.normal(0, 1, (32, 64)).astype(np.float32)
        reference = mlp_forward(spec, store, x)
        with ThreadPoolExecutor(max_workers=8) as pool:
            results = list(pool.map(lambda _: mlp_forward(spec, store, x), range(64)))
        assert all(np.array_equal(r, reference) for r in results)

    def test_infer_spec_roundtrip(self):
        spec, store, _ = make_net(np.random.default_rng(1), [10, 6, 2])
        inferred = infer_mlp_spec(store)
        assert [
            (l.in_dim, l.out_dim, l.activation) for l in inferred.layers
        ] == [(l.in_dim, l.out_dim, l.activation) for l in spec.layers]


class TestSoftmax:
    def test_symmetry(self):
        assert list(softmax(np.array([[0.0, 0.0]]))[0]) == [0.5, 0.5]
        row = softmax(np.array([[2.0, 2.0, 2.0]]))[0]
        assert np.allclose(row, 1.0 / 3.0)

    def test_no_overflow(self):
        row = softmax(np.array([[1000.0, 0.0]]))[0]
        assert row[0] == 1.0 and row[1] == 0.0

    def test_rows_sum_to_one_and_argmax_stable(self):
        rng = np.random.default_rng(9)
        logits = rng.normal(0, 10, (50, 7))
        probs = softmax(logits)
        assert np.allclose(probs.sum(axis=1), 1.0, atol=1e-6)
        assert np.array_equal(np.argmax(probs, axis=1), np.argmax(logits, axis=1))
        assert np.all(probs >= 0.0)


class TestQuantize:
    def test_exactly_representable(self):
        store = WeightStore([("w", Tensor.from_values([1.0, 0.5, -2.0]))])
        q = quantize(store, "f16")
        assert q["w"].dtype == "f16"
        assert list(q["w"].as_f32()) == [1.0, 0.5, -2.0]

    def test_pi_rounds_to_nearest_even(self):
        store = WeightStore([("w", Tensor.from_values([3.14159265]))])
        q = quantize(store, "f16")
        assert float(q["w"].as_f32()[0]) == 3.140625

    def test_roundtrip_idempotent_on_f16_lattice(self):
        rng = np.random.default_rng(4)
        store = quantize(random_store(rng), "f16")
        back = quantize(quantize(store, "f32"), "f16")
        assert back == store

    def test_overflow_reported_with_tensor_name(self):
        store = WeightStore([("big", Tensor.from_values([70000.0]))])
        with pytest.raises(QuantizeOverflowError, match="'big'"):
            quantize(store, "f16")

    def test_rounding_boundary(self):
        # 65519 still rounds down to f16 max, 65520 ties to infinity
        assert float(np.float16(65519.0)) == 65504.0
        with pytest.raises(QuantizeOverflowError):
            quantize(WeightStore([("w", Tensor.from_values([65520.0]))]), "f16")

    def test_relative_error_bound_normal_range(self):
        rng = np.random.default_rng(8)
        exponents = rng.uniform(-14, 15, 20000)
        mantissa = rng.uniform(1.0, 2.0, 20000)
        signs = rng.choice([-1.0, 1.0], 20000)
        values = (signs * mantissa * np.exp2(exponents)).astype(np.float32)
        store = WeightStore([("v", Tensor(values))])
        widened = quantize(store, "f16")["v"].as_f32()
        rel = np.abs(widened - values) / np.abs(values)
        assert rel.max() <= 2.0**-11

    def test_f16_payload_half_of_f32(self):
        rng = np.random.default_rng(6)
        store = random_store(rng, n_tensors=3)
        q = quantize(store, "f16")
        assert q.payload_bytes() * 2 == store.payload_bytes()
        blob_f32 = save_weights(store)
        blob_f16 = save_weights(q)
        assert len(blob_f16) <= 0.55 * len(blob_f32) + 64  # tiny stores carry header weight

    def test_dims_preserved(self):
        store = WeightStore([("w", Tensor.from_values(np.ones((3, 4, 5))))])
        assert quantize(store, "f16")["w"].dims == (3, 4, 5)
