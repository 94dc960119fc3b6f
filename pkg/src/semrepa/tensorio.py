"""Raw tensor and checkpoint file formats.

Tensor files are little-endian with a fixed 16-byte header:

    bytes 0..3   magic "SRPA"
    byte  4      rank (u8)
    byte  5      dtype tag (u8): 0 = float32, 1 = int32
    bytes 6..15  zero padding

followed by `rank` u32 dims and the raw row-major payload.

A checkpoint is a single binary file: magic "SRPACKPT", a u32-length JSON text
index of parameter names/shapes/dtypes, then one SRPA tensor record per
parameter in index order. Config/metadata is serialized alongside in
`<path>.json`.
"""

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgumentError

TENSOR_MAGIC = b"SRPA"
CKPT_MAGIC = b"SRPACKPT"
FORMAT_VERSION = 1

_DTYPE_TO_TAG = {np.dtype(np.float32): 0, np.dtype(np.int32): 1}
_TAG_TO_DTYPE = {0: np.dtype(np.float32), 1: np.dtype(np.int32)}


def tensor_bytes(arr: np.ndarray) -> bytes:
    """Serialize an array to the SRPA record format."""
    arr = np.ascontiguousarray(arr)
    if arr.dtype not in _DTYPE_TO_TAG:
        raise InvalidArgumentError(f"unsupported dtype {arr.dtype}; use float32 or int32")
    if arr.ndim > 255:
        raise InvalidArgumentError("rank exceeds u8")
    header = TENSOR_MAGIC + struct.pack("<BB", arr.ndim, _DTYPE_TO_TAG[arr.dtype])
    header = header.ljust(16, b"\x00")
    dims = struct.pack(f"<{arr.ndim}I", *arr.shape)
    if arr.dtype.byteorder == ">":  # normalize to little-endian payload
        arr = arr.astype(arr.dtype.newbyteorder("<"))
    return header + dims + arr.tobytes()


def write_tensor(path, arr: np.ndarray) -> None:
    Path(path).write_bytes(tensor_bytes(arr))


def _read_record(buf: bytes, offset: int, where: str):
    """Parse one SRPA record starting at `offset`; returns (array, next_offset)."""
    if len(buf) < offset + 16:
        raise FormatError(where, "truncated header")
    header = buf[offset : offset + 16]
    if header[:4] != TENSOR_MAGIC:
        raise FormatError(where, f"bad magic {header[:4]!r}, expected {TENSOR_MAGIC!r}")
    rank, tag = struct.unpack_from("<BB", header, 4)
    if tag not in _TAG_TO_DTYPE:
        raise FormatError(where, f"unknown dtype tag {tag}")
    dims_off = offset + 16
    if len(buf) < dims_off + 4 * rank:
        raise FormatError(where, "truncated dims")
    shape = struct.unpack_from(f"<{rank}I", buf, dims_off)
    dtype = _TAG_TO_DTYPE[tag]
    n = int(np.prod(shape, dtype=np.int64)) if rank else 1
    data_off = dims_off + 4 * rank
    nbytes = n * dtype.itemsize
    if len(buf) < data_off + nbytes:
        raise FormatError(where, f"truncated payload (need {nbytes} bytes)")
    arr = np.frombuffer(buf, dtype=dtype, count=n, offset=data_off).reshape(shape).copy()
    return arr, data_off + nbytes


def read_tensor(path) -> np.ndarray:
    buf = Path(path).read_bytes()
    arr, end = _read_record(buf, 0, str(path))
    if end != len(buf):
        raise FormatError(str(path), f"{len(buf) - end} trailing bytes after payload")
    return arr


def save_checkpoint(path, params: dict, config: dict | None = None) -> None:
    """Write named tensors to one binary file, config to `<path>.json` alongside."""
    path = Path(path)
    index = {
        "format_version": FORMAT_VERSION,
        "params": [
            {"name": k, "shape": list(v.shape), "dtype": str(np.asarray(v).dtype)}
            for k, v in params.items()
        ],
    }
    index_text = json.dumps(index).encode()
    with open(path, "wb") as f:
        f.write(CKPT_MAGIC)
        f.write(struct.pack("<I", len(index_text)))
        f.write(index_text)
        for v in params.values():
            f.write(tensor_bytes(np.asarray(v)))
    with open(path.with_suffix(path.suffix + ".json"), "w") as f:
        json.dump({"format_version": FORMAT_VERSION, "config": config or {}}, f, indent=2, sort_keys=True)


def load_checkpoint(path):
    """Returns (params: dict[str, ndarray], config: dict)."""
    path = Path(path)
    buf = path.read_bytes()
    if buf[:8] != CKPT_MAGIC:
        raise FormatError(str(path), f"bad checkpoint magic {buf[:8]!r}")
    (index_len,) = struct.unpack_from("<I", buf, 8)
    try:
        index = json.loads(buf[12 : 12 + index_len])
    except ValueError as e:
        raise FormatError(str(path), f"unparseable index: {e}") from e
    if index.get("format_version") != FORMAT_VERSION:
        raise FormatError("format_version", f"expected {FORMAT_VERSION}, got {index.get('format_version')}")
    params = {}
    offset = 12 + index_len
    for entry in index["params"]:
        arr, offset = _read_record(buf, offset, f"{path}:{entry['name']}")
        if list(arr.shape) != entry["shape"]:
            raise FormatError(entry["name"], f"shape {list(arr.shape)} != index {entry['shape']}")
        params[entry["name"]] = arr
    sidecar = path.with_suffix(path.suffix + ".json")
    config = {}
    if sidecar.exists():
        config = json.loads(sidecar.read_text()).get("config", {})
    return params, config


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
