"""Dense tensors, the PGWT weight-file format, MLP inference, and quantization.

Inference runs in float32 throughout; f16 tensors are widened on use, which
mirrors fp16 storage with fp32 accumulation and keeps the numeric contract
simple. Tensors and stores are immutable after construction and safe to
share across threads.

Weight-file format (little-endian), magic ``PGWT``:

    magic        4 bytes  b"PGWT"
    version      u32
    per tensor:
      name_len   u16
      name       ASCII bytes
      dtype      u8   (0 = f32, 1 = f16)
      rank       u8
      dims       rank x u32
      payload    raw row-major scalars

The file ends at stream end; there is no padding.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

import numpy as np

from .errors import (
    BadMagicError,
    DimOverflowError,
    DuplicateNameError,
    InvalidNameError,
    MissingWeightError,
    NonFiniteError,
    QuantizeOverflowError,
    ShapeMismatchError,
    TruncatedStreamError,
    WeightFormatError,
)

MAGIC = b"PGWT"
FORMAT_VERSION = 1

_DTYPE_TO_TAG = {"f32": 0, "f16": 1}
_TAG_TO_DTYPE = {0: "f32", 1: "f16"}
_DTYPE_TO_NP = {"f32": np.dtype("<f4"), "f16": np.dtype("<f2")}

# Declared element counts above this are treated as corrupt headers.
MAX_ELEMENTS = 2**32


@dataclass(frozen=True)
class Tensor:
    """An immutable dense tensor, f32 or f16, row-major."""

    array: np.ndarray

    def __post_init__(self):
        arr = np.ascontiguousarray(self.array)
        if arr.dtype == np.float32:
            pass
        elif arr.dtype == np.float16:
            pass
        else:
            raise ValueError(f"tensor dtype must be float32 or float16, got {arr.dtype}")
        if any(d <= 0 for d in arr.shape):
            raise ValueError(f"tensor extents must be positive, got {arr.shape}")
        if not np.all(np.isfinite(arr.astype(np.float32, copy=False))):
            raise NonFiniteError("tensor holds NaN or Inf values")
        arr.setflags(write=False)
        object.__setattr__(self, "array", arr)

    @classmethod
    def from_values(cls, values, dtype: str = "f32") -> "Tensor":
        if dtype not in _DTYPE_TO_TAG:
            raise ValueError(f"unknown dtype {dtype!r}")
        np_dtype = np.float32 if dtype == "f32" else np.float16
        return cls(np.asarray(values, dtype=np_dtype))

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(self.array.shape)

    @property
    def dtype(self) -> str:
        return "f32" if self.array.dtype == np.float32 else "f16"

    @property
    def size(self) -> int:
        return int(self.array.size)

    def as_f32(self) -> np.ndarray:
        """The tensor widened to float32 (a no-op view for f32 tensors)."""
        return self.array.astype(np.float32, copy=False)

    def payload_bytes(self) -> int:
        return self.array.nbytes

    def __eq__(self, other) -> bool:
        if not isinstance(other, Tensor):
            return NotImplemented
        return (
            self.dtype == other.dtype
            and self.dims == other.dims
            and self.array.tobytes() == other.array.tobytes()
        )


def _check_name(name: str) -> str:
    if not name or not name.isascii():
        raise InvalidNameError(f"tensor names must be non-empty ASCII, got {name!r}")
    return name


class WeightStore:
    """Ordered, immutable name -> Tensor mapping with a format version."""

    def __init__(
        self,
        tensors: Mapping[str, Tensor] | Iterable[tuple[str, Tensor]] = (),
        format_version: int = FORMAT_VERSION,
    ):
        if not 0 <= int(format_version) < 2**32:
            raise ValueError(f"format_version out of u32 range: {format_version}")
        self._version = int(format_version)
        self._tensors: dict[str, Tensor] = {}
        items = tensors.items() if isinstance(tensors, Mapping) else tensors
        for name, tensor in items:
            _check_name(name)
            if name in self._tensors:
                raise DuplicateNameError(f"duplicate tensor name {name!r}")
            if not isinstance(tensor, Tensor):
                tensor = Tensor(np.asarray(tensor))
            self._tensors[name] = tensor

    @property
    def format_version(self) -> int:
        return self._version

    def names(self) -> list[str]:
        return list(self._tensors)

    def items(self) -> Iterator[tuple[str, Tensor]]:
        return iter(self._tensors.items())

    def get(self, name: str) -> Tensor | None:
        return self._tensors.get(name)

    def __getitem__(self, name: str) -> Tensor:
        try:
            return self._tensors[name]
        except KeyError:
            raise MissingWeightError(f"weight {name!r} not found in store") from None

    def __contains__(self, name: str) -> bool:
        return name in self._tensors

    def __len__(self) -> int:
        return len(self._tensors)

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightStore):
            return NotImplemented
        return self._version == other._version and list(self.items()) == list(other.items())

    def payload_bytes(self) -> int:
        """Raw scalar bytes across all tensors, header overhead excluded."""
        return sum(t.payload_bytes() for _, t in self.items())


def save_weights(store: WeightStore) -> bytes:
    """Canonical byte encoding; equal stores serialize to equal bytes."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", store.format_version)
    for name, tensor in store.items():
        raw = name.encode("ascii")
        if len(raw) > 0xFFFF:
            raise InvalidNameError(f"tensor name too long: {len(raw)} bytes")
        out += struct.pack("<H", len(raw))
        out += raw
        out += struct.pack("<BB", _DTYPE_TO_TAG[tensor.dtype], len(tensor.dims))
        out += struct.pack(f"<{len(tensor.dims)}I", *tensor.dims)
        out += np.ascontiguousarray(tensor.array, dtype=_DTYPE_TO_NP[tensor.dtype]).tobytes()
    return bytes(out)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, n: int, what: str) -> bytes:
        if self.pos + n > len(self.data):
            raise TruncatedStreamError(
                f"stream ends at byte {len(self.data)} while reading {what} "
                f"({n} bytes at offset {self.pos})"
            )
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def eof(self) -> bool:
        return self.pos >= len(self.data)


def load_weights(data: bytes) -> WeightStore:
    """Parse a PGWT byte stream into a store.

    Raises BadMagicError, TruncatedStreamError, DuplicateNameError,
    DimOverflowError, InvalidNameError, or NonFiniteError, each naming the
    offending offset or tensor.
    """
    r = _Reader(bytes(data))
    magic = r.take(4, "magic")
    if magic != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r} at offset 0, got {magic!r}")
    (version,) = struct.unpack("<I", r.take(4, "format version"))
    tensors: list[tuple[str, Tensor]] = []
    seen: set[str] = set()
    while not r.eof():
        rec_off = r.pos
        (name_len,) = struct.unpack("<H", r.take(2, "name length"))
        name_raw = r.take(name_len, "tensor name")
        try:
            name = name_raw.decode("ascii")
        except UnicodeDecodeError:
            raise InvalidNameError(f"non-ASCII tensor name at offset {rec_off}") from None
        _check_name(name)
        if name in seen:
            raise DuplicateNameError(f"duplicate tensor name {name!r} at offset {rec_off}")
        seen.add(name)
        dtype_tag, rank = struct.unpack("<BB", r.take(2, f"dtype/rank of {name!r}"))
        if dtype_tag not in _TAG_TO_DTYPE:
            raise WeightFormatError(f"unknown dtype tag {dtype_tag} for tensor {name!r}")
        dtype = _TAG_TO_DTYPE[dtype_tag]
        dims = struct.unpack(f"<{rank}I", r.take(4 * rank, f"dims of {name!r}"))
        if any(d == 0 for d in dims):
            raise WeightFormatError(f"zero extent in dims {dims} of tensor {name!r}")
        count = 1
        for d in dims:
            count *= d
        if count > MAX_ELEMENTS:
            raise DimOverflowError(
                f"tensor {name!r} declares {count} elements (dims {dims}), beyond "
                f"the {MAX_ELEMENTS} limit"
            )
        np_dtype = _DTYPE_TO_NP[dtype]
        payload = r.take(count * np_dtype.itemsize, f"payload of {name!r}")
        arr = np.frombuffer(payload, dtype=np_dtype).reshape(dims).copy()
        if not np.all(np.isfinite(arr.astype(np.float32))):
            raise NonFiniteError(f"tensor {name!r} holds NaN or Inf values")
        tensors.append((name, Tensor(arr)))
    return WeightStore(tensors, format_version=version)


@dataclass(frozen=True)
class LayerSpec:
    in_dim: int
    out_dim: int
    activation: str = "relu"

    def __post_init__(self):
        if self.in_dim <= 0 or self.out_dim <= 0:
            raise ValueError(f"layer dims must be positive, got {self.in_dim}x{self.out_dim}")
        if self.activation not in ("relu", "none"):
            raise ValueError(f"activation must be 'relu' or 'none', got {self.activation!r}")


@dataclass(frozen=True)
class MlpSpec:
    """Layer shapes of a perceptron head; dropout_rate is training metadata only."""

    layers: tuple[LayerSpec, ...]
    dropout_rate: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not self.layers:
            raise ValueError("MlpSpec needs at least one layer")
        for prev, cur in zip(self.layers, self.layers[1:]):
            if prev.out_dim != cur.in_dim:
                raise ValueError(
                    f"layer dims do not chain: {prev.out_dim} -> {cur.in_dim}"
                )
        if self.layers[-1].activation != "none":
            raise ValueError("final layer must emit raw logits (activation 'none')")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError(f"dropout_rate must lie in [0, 1), got {self.dropout_rate}")

    @classmethod
    def from_dims(cls, dims, dropout_rate: float = 0.0) -> "MlpSpec":
        """Hidden layers get relu, the final layer none."""
        dims = list(dims)
        if len(dims) < 2:
            raise ValueError("need at least input and output dims")
        layers = [
            LayerSpec(a, b, "relu" if i < len(dims) - 2 else "none")
            for i, (a, b) in enumerate(zip(dims, dims[1:]))
        ]
        return cls(tuple(layers), dropout_rate)

    @property
    def in_dim(self) -> int:
        return self.layers[0].in_dim

    @property
    def out_dim(self) -> int:
        return self.layers[-1].out_dim


def weight_names(spec: MlpSpec) -> list[str]:
    names = []
    for i in range(len(spec.layers)):
        names += [f"layer{i}.w", f"layer{i}.b"]
    return names


def infer_mlp_spec(store: WeightStore, dropout_rate: float = 0.0) -> MlpSpec:
    """Reconstruct an MlpSpec from ``layer{i}.w`` shapes in a store."""
    dims: list[int] = []
    i = 0
    while f"layer{i}.w" in store:
        w = store[f"layer{i}.w"]
        if len(w.dims) != 2:
            raise ShapeMismatchError(f"layer{i}.w must be rank 2, got dims {w.dims}")
        if not dims:
            dims.append(w.dims[0])
        dims.append(w.dims[1])
        i += 1
    if i == 0:
        raise MissingWeightError("store holds no layer0.w tensor")
    return MlpSpec.from_dims(dims, dropout_rate)


def mlp_forward(spec: MlpSpec, weights: WeightStore, x: np.ndarray) -> np.ndarray:
    """Forward pass y = activation(x W + b) per layer, float32, inference mode.

    The spec's dropout_rate is ignored here (training-time metadata).
    """
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 2:
        raise ShapeMismatchError(f"input must be (batch, dim), got shape {x.shape}")
    if x.shape[1] != spec.in_dim:
        raise ShapeMismatchError(
            f"input dim {x.shape[1]} does not match layer 0 in_dim {spec.in_dim}"
        )
    for i, layer in enumerate(spec.layers):
        w = weights[f"layer{i}.w"].as_f32()
        b = weights[f"layer{i}.b"].as_f32()
        if w.shape != (layer.in_dim, layer.out_dim):
            raise ShapeMismatchError(
                f"layer{i}.w has dims {w.shape}, spec wants {(layer.in_dim, layer.out_dim)}"
            )
        if b.shape != (layer.out_dim,):
            raise ShapeMismatchError(
                f"layer{i}.b has dims {b.shape}, spec wants {(layer.out_dim,)}"
            )
        x = x @ w + b
        if layer.activation == "relu":
            x = np.maximum(x, 0.0, out=x)
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("forward pass produced non-finite values")
    return x


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; rows sum to 1 within 1e-6."""
    z = np.asarray(logits, dtype=np.float32)
    if z.ndim != 2:
        raise ShapeMismatchError(f"logits must be (batch, classes), got shape {z.shape}")
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def quantize(store: WeightStore, target: str) -> WeightStore:
    """Convert every tensor to ``target`` with IEEE round-to-nearest-even.

    f32 -> f16 values beyond the f16 finite range raise QuantizeOverflowError
    naming the tensor; f16 -> f32 is exact, so a round trip through f16 is
    the identity on the f16 lattice.
    """
    if target not in _DTYPE_TO_TAG:
        raise ValueError(f"target dtype must be 'f16' or 'f32', got {target!r}")
    converted: list[tuple[str, Tensor]] = []
    for name, tensor in store.items():
        if tensor.dtype == target:
            converted.append((name, tensor))
            continue
        if target == "f16":
            with np.errstate(over="ignore"):  # overflow is reported as an error below
                narrowed = tensor.array.astype(np.float16)
            bad = np.isinf(narrowed) & np.isfinite(tensor.array)
            if np.any(bad):
                worst = float(np.abs(tensor.array[bad]).max())
                raise QuantizeOverflowError(
                    f"tensor {name!r} holds |{worst}| which overflows f16 to infinity"
                )
            converted.append((name, Tensor(narrowed)))
        else:
            converted.append((name, Tensor(tensor.array.astype(np.float32))))
    return WeightStore(converted, format_version=store.format_version)
