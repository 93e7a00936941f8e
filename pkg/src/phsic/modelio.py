"""Binary model files shared by the three PHSIC estimators.

Layout (all integers little-endian)::

    b"PHSC"                 magic
    u16  format version
    u8   estimator kind      0 feature, 1 icd, 2 naive
    u8   flags               bit 0: sentence vectors length-normalized before the kernel
    str  kernel x            u32 byte length + UTF-8, textual kernel form
    str  kernel y
    u64  n_train
    u32  array count
    per array: str name, u8 ndim, u64 * ndim shape
    payload: every array in header order, row-major '<f8'
    u32  CRC-32 of the payload

Files carry no platform-dependent fields, so they are portable and a refit on
identical inputs produces identical bytes.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import CorruptModelError, PhsicError
from .feature import FeatureModel, feature_map_kind
from .icd import IcdFactor, IcdModel
from .kernels import GramMeans, format_kernel, parse_kernel
from .naive import NaiveModel

MAGIC = b"PHSC"
VERSION = 1
KINDS = {"feature": 0, "icd": 1, "naive": 2}
_KIND_NAMES = {v: k for k, v in KINDS.items()}
FLAG_NORMALIZE = 1


def estimator_kind(model) -> str:
    if isinstance(model, FeatureModel):
        return "feature"
    if isinstance(model, IcdModel):
        return "icd"
    if isinstance(model, NaiveModel):
        return "naive"
    raise TypeError(f"not a PHSIC model: {type(model).__name__}")


def _str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("<I", len(b)) + b


def _factor_arrays(prefix, f: IcdFactor):
    return [
        (f"{prefix}.pivots", f.pivots.astype(np.float64)),
        (f"{prefix}.pivot_points", f.pivot_points),
        (f"{prefix}.pivot_rows", f.pivot_rows),
        (f"{prefix}.pivot_diag", f.pivot_diag),
        (f"{prefix}.residual_trace", np.array([f.residual_trace])),
    ]


def _model_parts(model):
    kind = estimator_kind(model)
    if kind == "feature":
        kx = "linear" if model.map_kind_x == "identity" else "cos"
        ky = "linear" if model.map_kind_y == "identity" else "cos"
        arrays = [("mean_x", model.mean_x), ("mean_y", model.mean_y), ("cov_xy", model.cov_xy)]
    elif kind == "icd":
        kx, ky = format_kernel(model.factor_x.spec), format_kernel(model.factor_y.spec)
        arrays = (
            _factor_arrays("x", model.factor_x)
            + _factor_arrays("y", model.factor_y)
            + [("mean_a", model.mean_a), ("mean_b", model.mean_b), ("c_icd", model.c_icd)]
        )
    else:
        kx, ky = format_kernel(model.spec_x), format_kernel(model.spec_y)
        arrays = [
            ("x_train", model.x_train),
            ("y_train", model.y_train),
            ("x.col_means", model.means_x.col_means),
            ("x.grand_mean", np.array([model.means_x.grand_mean])),
            ("y.col_means", model.means_y.col_means),
            ("y.grand_mean", np.array([model.means_y.grand_mean])),
        ]
    return kind, kx, ky, arrays


@dataclass(frozen=True, eq=False)
class ModelFile:
    model: object
    normalize: bool = False

    @property
    def kind(self) -> str:
        return estimator_kind(self.model)


def dumps(model, normalize: bool = False) -> bytes:
    kind, kx, ky, arrays = _model_parts(model)
    head = [
        MAGIC,
        struct.pack("<HBB", VERSION, KINDS[kind], FLAG_NORMALIZE if normalize else 0),
        _str(kx),
        _str(ky),
        struct.pack("<QI", model.n_train, len(arrays)),
    ]
    payload = []
    for name, arr in arrays:
        arr = np.ascontiguousarray(arr, dtype="<f8")
        head.append(_str(name) + struct.pack("<B", arr.ndim))
        head.append(struct.pack(f"<{arr.ndim}Q", *arr.shape))
        payload.append(arr.tobytes(order="C"))
    body = b"".join(payload)
    return b"".join(head) + body + struct.pack("<I", zlib.crc32(body))


def save_model(model, path, normalize: bool = False) -> None:
    Path(path).write_bytes(dumps(model, normalize))


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def take(self, size):
        end = self.pos + size
        if end > len(self.data):
            raise CorruptModelError("model file is truncated")
        chunk = self.data[self.pos:end]
        self.pos = end
        return chunk

    def unpack(self, fmt):
        return struct.unpack(fmt, self.take(struct.calcsize(fmt)))

    def string(self):
        (size,) = self.unpack("<I")
        try:
            return self.take(size).decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptModelError("model header is not valid UTF-8") from None


def _readonly(arr):
    arr.setflags(write=False)
    return arr


def loads(data: bytes) -> ModelFile:
    r = _Reader(data)
    if r.take(4) != MAGIC:
        raise CorruptModelError("not a PHSIC model file (bad magic)")
    version, kind_code, flags = r.unpack("<HBB")
    if version != VERSION:
        raise CorruptModelError(f"unsupported model format version {version}")
    if kind_code not in _KIND_NAMES:
        raise CorruptModelError(f"unknown estimator kind {kind_code}")
    kind = _KIND_NAMES[kind_code]
    kx, ky = r.string(), r.string()
    n_train, count = r.unpack("<QI")
    shapes = []
    for _ in range(count):
        name = r.string()
        (ndim,) = r.unpack("<B")
        shapes.append((name, r.unpack(f"<{ndim}Q") if ndim else ()))
    start = r.pos
    arrays = {}
    for name, shape in shapes:
        size = int(np.prod(shape, dtype=np.int64)) * 8
        arrays[name] = _readonly(np.frombuffer(r.take(size), dtype="<f8").reshape(shape).astype(np.float64))
    body = data[start:r.pos]
    (crc,) = r.unpack("<I")
    if r.pos != len(data):
        raise CorruptModelError("trailing bytes after model payload")
    if zlib.crc32(body) != crc:
        raise CorruptModelError("model checksum mismatch")
    try:
        spec_x, spec_y = parse_kernel(kx), parse_kernel(ky)
        model = _build(kind, spec_x, spec_y, int(n_train), arrays)
    except KeyError as exc:
        raise CorruptModelError(f"model file lacks array {exc}") from None
    except PhsicError as exc:
        raise CorruptModelError(f"invalid model header: {exc}") from None
    return ModelFile(model, bool(flags & FLAG_NORMALIZE))


def _factor(prefix, spec, arrays):
    piv = arrays[f"{prefix}.pivots"].astype(np.intp)
    piv.setflags(write=False)
    return IcdFactor(
        a_matrix=None,
        pivots=piv,
        pivot_points=arrays[f"{prefix}.pivot_points"],
        pivot_rows=arrays[f"{prefix}.pivot_rows"],
        pivot_diag=arrays[f"{prefix}.pivot_diag"],
        spec=spec,
        residual_trace=float(arrays[f"{prefix}.residual_trace"][0]),
    )


def _build(kind, spec_x, spec_y, n_train, arrays):
    if kind == "feature":
        return FeatureModel(
            arrays["mean_x"], arrays["mean_y"], arrays["cov_xy"],
            feature_map_kind(spec_x), feature_map_kind(spec_y), n_train,
        )
    if kind == "icd":
        return IcdModel(
            _factor("x", spec_x, arrays), _factor("y", spec_y, arrays),
            arrays["mean_a"], arrays["mean_b"], arrays["c_icd"], n_train,
        )
    return NaiveModel(
        arrays["x_train"], arrays["y_train"], spec_x, spec_y,
        GramMeans(arrays["x.col_means"], float(arrays["x.grand_mean"][0])),
        GramMeans(arrays["y.col_means"], float(arrays["y.grand_mean"][0])),
    )


def read_model_file(path) -> ModelFile:
    try:
        data = Path(path).read_bytes()
    except OSError as exc:
        raise CorruptModelError(f"cannot read model file: {exc}") from None
    return loads(data)


def load_model(path):
    return read_model_file(path).model
