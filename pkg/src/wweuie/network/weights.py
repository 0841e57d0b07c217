"""Weight container, seeded initialization and the binary ``WWEW`` file format.

Layout (little-endian): magic ``WWEW``, u32 version, u32 config length and
UTF-8 ``key=value`` lines, u32 tensor count, then per tensor a u16 name
length, UTF-8 name, u8 ndim, ndim x u32 dims and row-major f32 data.
"""

import struct
from dataclasses import dataclass, replace

import numpy as np

from ..validation import FormatError
from .config import NetConfig
from .model import param_shapes

MAGIC = b"WWEW"
VERSION = 1


@dataclass(frozen=True, eq=False)
class WeightStore:
    config: NetConfig
    tensors: dict

    def __post_init__(self):
        frozen = {}
        for name, arr in self.tensors.items():
            a = np.array(arr, dtype=np.float32)
            a.flags.writeable = False
            frozen[name] = a
        object.__setattr__(self, "tensors", frozen)
        self.validate()

    def validate(self):
        expected = {name: shape for name, shape, _ in param_shapes(self.config)}
        missing = sorted(set(expected) - set(self.tensors))
        extra = sorted(set(self.tensors) - set(expected))
        if missing or extra:
            raise ValueError(f"weights do not match config: missing {missing[:5]}, unexpected {extra[:5]}")
        for name, shape in expected.items():
            if self.tensors[name].shape != shape:
                raise ValueError(f"{name}: shape {self.tensors[name].shape}, expected {shape}")
            if not np.all(np.isfinite(self.tensors[name])):
                raise ValueError(f"{name} holds non-finite values")
            if name == "wb.gamma" or name.endswith(".alpha"):
                t = self.tensors[name]
                if np.any(t < 0) or np.any(t > 1):
                    raise ValueError(f"{name} must lie in [0, 1], got {t}")

    @property
    def parameter_count(self):
        return int(sum(t.size for t in self.tensors.values()))

    def replace(self, **updates):
        tensors = dict(self.tensors)
        tensors.update(updates)
        return WeightStore(self.config, tensors)

    def to_bytes(self):
        blob = self.config.to_blob().encode("utf-8")
        parts = [MAGIC, struct.pack("<II", VERSION, len(blob)), blob, struct.pack("<I", len(self.tensors))]
        for name, t in self.tensors.items():
            raw = name.encode("utf-8")
            parts.append(struct.pack("<H", len(raw)))
            parts.append(raw)
            parts.append(struct.pack("<B", t.ndim))
            parts.append(struct.pack(f"<{t.ndim}I", *t.shape))
            parts.append(np.ascontiguousarray(t, dtype="<f4").tobytes())
        return b"".join(parts)

    @classmethod
    def from_bytes(cls, data):
        reader = _Reader(data)
        if reader.take(4) != MAGIC:
            raise FormatError("bad magic: not a WWEW weight file")
        version, blob_len = reader.unpack("<II")
        if version != VERSION:
            raise FormatError(f"unsupported weight format version {version}")
        try:
            config = NetConfig.from_blob(reader.take(blob_len).decode("utf-8"))
        except (UnicodeDecodeError, ValueError, TypeError) as exc:
            raise FormatError(f"bad config blob: {exc}") from exc
        (count,) = reader.unpack("<I")
        tensors = {}
        for _ in range(count):
            (name_len,) = reader.unpack("<H")
            name = reader.take(name_len).decode("utf-8")
            (ndim,) = reader.unpack("<B")
            dims = reader.unpack(f"<{ndim}I")
            size = int(np.prod(dims, dtype=np.int64))
            payload = reader.take(4 * size)
            if name in tensors:
                raise FormatError(f"duplicate tensor {name!r}")
            tensors[name] = np.frombuffer(payload, dtype="<f4").reshape(dims)
        if reader.remaining:
            raise FormatError(f"{reader.remaining} trailing bytes after {count} tensors")
        try:
            return cls(config, tensors)
        except ValueError as exc:
            raise FormatError(str(exc)) from exc


class _Reader:
    def __init__(self, data):
        self.data = memoryview(data)
        self.pos = 0

    @property
    def remaining(self):
        return len(self.data) - self.pos

    def take(self, n):
        if n > self.remaining:
            raise FormatError(f"truncated payload: wanted {n} bytes at offset {self.pos}, {self.remaining} left")
        out = bytes(self.data[self.pos:self.pos + n])
        self.pos += n
        return out

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))


def fan_in(shape, kind):
    if kind == "dense":
        return shape[1] * shape[2] * shape[3]
    if kind == "depthwise":
        return shape[1] * shape[2]
    if kind == "pointwise":
        return shape[1]
    raise ValueError(f"{kind} tensors have no fan-in")


def init_bound(shape, kind):
    return float(np.sqrt(6.0 / fan_in(shape, kind)))


def init_random(config=None, seed=None):
    """Seeded initialization: kernels ~ U(-sqrt(6/fan_in), +sqrt(6/fan_in)),
    zero biases, identity norm affine, gamma and alpha at 0.5."""
    config = config or NetConfig()
    if seed is not None:
        config = replace(config, seed=int(seed))
    rng = np.random.default_rng(config.seed)
    tensors = {}
    for name, shape, kind in param_shapes(config):
        if kind in ("dense", "depthwise", "pointwise"):
            bound = init_bound(shape, kind)
            t = rng.uniform(-bound, bound, size=shape)
        elif kind in ("bias", "norm_shift"):
            t = np.zeros(shape)
        elif kind == "norm_scale":
            t = np.ones(shape)
        else:
            t = np.full(shape, 0.5)
        tensors[name] = t
    return WeightStore(config, tensors)


def zero_weights(config=None):
    """A store with every tensor zero (gamma and alpha included)."""
    config = config or NetConfig()
    return WeightStore(config, {name: np.zeros(shape) for name, shape, _ in param_shapes(config)})


def save_weights(store, path):
    with open(path, "wb") as fh:
        fh.write(store.to_bytes())


def load_weights(path):
    with open(path, "rb") as fh:
        return WeightStore.from_bytes(fh.read())
