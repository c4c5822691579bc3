"""File formats: binary PNM images, measurement files and view manifests.

Measurement file layout (all little-endian)::

    header  '<4sHIIIBBQQIIBBdQdd'
        magic b"LCS1", format version, grid width, grid height,
        transform order, mode (0 Hadamard, 1 dense), flags (bit 0: identity
        permutation), permutation seed, dense seed, measurement count M,
        sensor id, channel count, noise kind (0 none, 1 Gaussian),
        noise sigma, noise seed, sensor x, sensor y
    M x uint32        selected row indices
    M x C x float64   readings, row-major by (row, channel)
"""

import re
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidArgumentError
from .scene import MeasurementSet, NoiseModel, SensorConfig
from .sensing import SensingMode, SensingSpec

MAGIC = b"LCS1"
FORMAT_VERSION = 1
_HEADER = struct.Struct("<4sHIIIBBQQIIBBdQdd")
_MODES = {SensingMode.PERMUTED_HADAMARD: 0, SensingMode.DENSE_RANDOM01: 1}
_U64 = 0xFFFFFFFFFFFFFFFF


def encode_measurements(ms):
    spec = ms.spec
    values = np.asarray(ms.values, dtype="<f8")
    if values.ndim != 2 or values.shape[0] != spec.num_measurements:
        raise InvalidArgumentError("values must be (M, C) with M matching the spec")
    identity = spec.permutation_seed is None
    header = _HEADER.pack(
        MAGIC, FORMAT_VERSION, spec.grid_width, spec.grid_height, spec.transform_order,
        _MODES[spec.mode], int(identity), 0 if identity else spec.permutation_seed & _U64,
        spec.dense_seed & _U64, spec.num_measurements, ms.sensor.id, values.shape[1],
        0 if ms.noise.sigma == 0 else 1, ms.noise.sigma, ms.noise.seed & _U64,
        ms.sensor.position[0], ms.sensor.position[1],
    )
    return header + spec.row_indices.astype("<u4").tobytes() + values.tobytes()


def decode_measurements(data):
    if len(data) < _HEADER.size or data[:4] != MAGIC:
        raise FormatError("not a lenscs measurement file (bad magic)")
    (magic, version, width, height, order, mode, flags, perm_seed, dense_seed, m, sensor_id,
     channels, _noise_kind, sigma, noise_seed, px, py) = _HEADER.unpack_from(data)
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported measurement file version {version}")
    expected = _HEADER.size + 4 * m + 8 * m * channels
    if len(data) != expected:
        raise FormatError(f"payload size {len(data)} does not match header (expected {expected})")
    off = _HEADER.size
    rows = np.frombuffer(data, dtype="<u4", count=m, offset=off).astype(np.int64)
    values = np.frombuffer(data, dtype="<f8", count=m * channels, offset=off + 4 * m)
    mode = {v: k for k, v in _MODES.items()}.get(mode)
    if mode is None:
        raise FormatError("unknown sensing mode in header")
    spec = SensingSpec(width, height, mode, rows,
                       permutation_seed=None if flags & 1 else perm_seed,
                       dense_seed=dense_seed, transform_order=order)
    return MeasurementSet(spec, values.reshape(m, channels).astype(np.float64),
                          SensorConfig((px, py), sensor_id), NoiseModel(sigma, noise_seed))


def write_measurements(path, ms):
    Path(path).write_bytes(encode_measurements(ms))


def read_measurements(path):
    return decode_measurements(Path(path).read_bytes())


_PNM_HEADER = re.compile(rb"(P[56])(?:\s+|#[^\n]*\n)+(\d+)(?:\s+|#[^\n]*\n)+(\d+)"
                         rb"(?:\s+|#[^\n]*\n)+(\d+)\s")


def read_pnm(path):
    """Read a binary 8-bit P5 or P6 file into a float array.

    Returns ``(H, W)`` for P5 and ``(H, W, 3)`` for P6, with the raw
    0-255 sample values.
    """
    data = Path(path).read_bytes()
    match = _PNM_HEADER.match(data)
    if not match:
        raise FormatError(f"{path}: not a binary P5/P6 image")
    kind, width, height, maxval = match.groups()
    width, height, maxval = int(width), int(height), int(maxval)
    if not 0 < maxval < 256:
        raise FormatError(f"{path}: only 8-bit images are supported (maxval {maxval})")
    channels = 3 if kind == b"P6" else 1
    count = width * height * channels
    pixels = np.frombuffer(data, dtype=np.uint8, count=count, offset=match.end())
    shape = (height, width, 3) if channels == 3 else (height, width)
    return pixels.reshape(shape).astype(np.float64)


def to_uint8(image, scale=1.0):
    """Linear map ``value * scale`` rounded half-to-even and clamped to [0, 255]."""
    return np.clip(np.rint(np.asarray(image, dtype=np.float64) * scale), 0, 255).astype(np.uint8)


def write_pnm(path, image, scale=1.0):
    """Write ``(H, W)`` as P5 or ``(H, W, 3)`` as P6 after :func:`to_uint8`."""
    img = to_uint8(image, scale)
    if img.ndim == 3 and img.shape[2] == 1:
        img = img[:, :, 0]
    if img.ndim == 2:
        kind = b"P5"
    elif img.ndim == 3 and img.shape[2] == 3:
        kind = b"P6"
    else:
        raise InvalidArgumentError(f"cannot write image of shape {img.shape} as PNM")
    header = b"%s\n%d %d\n255\n" % (kind, img.shape[1], img.shape[0])
    Path(path).write_bytes(header + img.tobytes())


MANIFEST_NAME = "views.tsv"
_MANIFEST_COLUMNS = ["view", "sensor_id", "pos_x", "pos_y", "reg_dx", "reg_dy", "file"]


def write_manifest(path, entries):
    """Write a view manifest; ``entries`` are dicts keyed by the column names."""
    lines = ["# lenscs viewset 1", "\t".join(_MANIFEST_COLUMNS)]
    for i, e in enumerate(entries):
        lines.append("\t".join([str(i), str(e["sensor_id"]), repr(float(e["pos_x"])),
                                repr(float(e["pos_y"])), repr(float(e["reg_dx"])),
                                repr(float(e["reg_dy"])), str(e["file"])]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_manifest(path):
    lines = [ln for ln in Path(path).read_text().splitlines() if ln and not ln.startswith("#")]
    if not lines or lines[0].split("\t") != _MANIFEST_COLUMNS:
        raise FormatError(f"{path}: not a lenscs view manifest")
    entries = []
    for ln in lines[1:]:
        parts = ln.split("\t")
        if len(parts) != len(_MANIFEST_COLUMNS):
            raise FormatError(f"{path}: malformed manifest line {ln!r}")
        e = dict(zip(_MANIFEST_COLUMNS, parts))
        for key in ("view", "sensor_id"):
            e[key] = int(e[key])
        for key in ("pos_x", "pos_y", "reg_dx", "reg_dy"):
            e[key] = float(e[key])
        entries.append(e)
    return entries
