"""Physical model of an aperture assembly in front of point sensors.

Geometry: the sensor plane is ``z = 0``, the aperture plane ``z = d`` and
the planar scene ``z = D`` with ``D > d > 0``. Lateral coordinates are
centred on the optical axis; ``x`` grows to the right (columns) and ``y``
grows downwards (rows). Each aperture element and a sensor define a cone
of rays; the pixel value for that element is the mean scene intensity over
the cone's footprint on the scene plane, estimated from ``k x k`` bilinear
samples. Scene samples outside the source image are black.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgumentError
from .sensing import (
    SensingMode,
    dense_forward_apply,
    patterns_for_rows,
    plane_to_scan,
)

_PATTERN_BLOCK = 256


@dataclass(frozen=True)
class SceneDescription:
    """Planar source image plus acquisition geometry.

    ``source`` is a ``(height, width, 3)`` array of nonnegative intensities.
    Distances and pitches share one length unit.
    """

    source: np.ndarray
    scene_distance: float
    aperture_distance: float
    element_pitch: float
    scene_pixel_pitch: float = 1.0

    def __post_init__(self):
        src = np.asarray(self.source, dtype=np.float64)
        if src.ndim == 2:
            src = src[:, :, None]
        if src.ndim != 3:
            raise InvalidArgumentError(f"source must be (H, W, C), got shape {src.shape}")
        if np.any(src < 0) or not np.all(np.isfinite(src)):
            raise InvalidArgumentError("source intensities must be finite and nonnegative")
        object.__setattr__(self, "source", src)
        if not (self.scene_distance > self.aperture_distance > 0):
            raise InvalidArgumentError(
                "geometry requires scene_distance > aperture_distance > 0, got "
                f"D={self.scene_distance}, d={self.aperture_distance}"
            )
        if self.element_pitch <= 0 or self.scene_pixel_pitch <= 0:
            raise InvalidArgumentError("pitches must be positive")

    @property
    def magnification(self):
        """Scene-plane length covered by one unit on the aperture plane."""
        return self.scene_distance / self.aperture_distance

    @classmethod
    def fitted(cls, source, grid_width, scene_distance=100.0, aperture_distance=1.0,
               scene_pixel_pitch=1.0):
        """Geometry whose aperture grid, seen from the axis, spans the source width."""
        src = np.asarray(source)
        pitch = src.shape[1] * scene_pixel_pitch * aperture_distance / (scene_distance * grid_width)
        return cls(src, scene_distance, aperture_distance, pitch, scene_pixel_pitch)


@dataclass(frozen=True)
class SensorConfig:
    position: tuple = (0.0, 0.0)
    id: int = 0

    def __post_init__(self):
        pos = tuple(float(p) for p in self.position)
        if len(pos) != 2 or not all(np.isfinite(pos)):
            raise InvalidArgumentError(f"sensor position must be two finite numbers, got {self.position}")
        object.__setattr__(self, "position", pos)


@dataclass(frozen=True)
class NoiseModel:
    """Additive i.i.d. Gaussian read noise on each sensor reading."""

    sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not self.sigma >= 0:
            raise InvalidArgumentError(f"sigma must be >= 0, got {self.sigma}")

    @property
    def kind(self):
        return "none" if self.sigma == 0 else "gaussian"

    def draw(self, sensor_id, shape):
        """Noise for one sensor; element ``(k, c)`` is fixed by (seed, sensor, k, c)."""
        if self.sigma == 0:
            return np.zeros(shape)
        # Philox is counter based: reading position k*C + c of the keyed stream
        # gives the same value regardless of how the rows are scheduled.
        bitgen = np.random.Philox(key=[int(self.seed) & 0xFFFFFFFFFFFFFFFF, int(sensor_id)])
        return self.sigma * np.random.Generator(bitgen).standard_normal(shape)


NO_NOISE = NoiseModel()


@dataclass
class MeasurementSet:
    """Sensor readings for one sensor: ``values[k, c]`` for row k and channel c.

    In Hadamard mode the values are physical readings through 0/1 patterns
    (the binary domain); use :func:`lenscs.sensing.binary_to_signed` before
    reconstruction.
    """

    spec: object
    values: np.ndarray
    sensor: SensorConfig = field(default_factory=SensorConfig)
    noise: NoiseModel = NO_NOISE

    @property
    def num_channels(self):
        return self.values.shape[1]


def element_centers(grid_width, grid_height, pitch):
    """Lateral ``(x, y)`` centres of the aperture elements as ``(H, W)`` arrays."""
    xs = (np.arange(grid_width) - (grid_width - 1) / 2.0) * pitch
    ys = (np.arange(grid_height) - (grid_height - 1) / 2.0) * pitch
    return np.meshgrid(xs, ys)


def _bilinear(source, px, py):
    """Sample ``source`` at fractional pixel coordinates with a black surround."""
    h, w, _ = source.shape
    x0 = np.floor(px).astype(np.int64)
    y0 = np.floor(py).astype(np.int64)
    fx = px - x0
    fy = py - y0
    out = np.zeros(px.shape + (source.shape[2],))
    for dy, wy in ((0, 1.0 - fy), (1, fy)):
        for dx, wx in ((0, 1.0 - fx), (1, fx)):
            xi = x0 + dx
            yi = y0 + dy
            inside = (xi >= 0) & (xi < w) & (yi >= 0) & (yi < h)
            vals = source[np.clip(yi, 0, h - 1), np.clip(xi, 0, w - 1)]
            out += np.where(inside, wx * wy, 0.0)[..., None] * vals
    return out


def pixelize(scene, sensor, grid_width, grid_height, supersample=2):
    """Pixel image that ``sensor`` sees through each aperture cone.

    Returns a ``(grid_height, grid_width, C)`` array. Each element is split
    into ``supersample x supersample`` sub-points; every sub-point is
    projected from the sensor onto the scene plane along
    ``p + (e - p) * D / d`` and sampled bilinearly.
    """
    k = int(supersample)
    if k < 1:
        raise InvalidArgumentError(f"supersample must be >= 1, got {supersample}")
    if grid_width < 1 or grid_height < 1:
        raise InvalidArgumentError("grid dimensions must be >= 1")
    pitch = scene.element_pitch
    cx, cy = element_centers(grid_width, grid_height, pitch)
    offsets = ((np.arange(k) + 0.5) / k - 0.5) * pitch
    px, py = sensor.position
    mag = scene.magnification
    src = scene.source
    hs, ws, _ = src.shape
    spp = scene.scene_pixel_pitch
    acc = np.zeros((grid_height, grid_width, src.shape[2]))
    for oy in offsets:
        for ox in offsets:
            sx = px + (cx + ox - px) * mag
            sy = py + (cy + oy - py) * mag
            # scene coordinates -> fractional source pixel indices
            acc += _bilinear(src, sx / spp + (ws - 1) / 2.0, sy / spp + (hs - 1) / 2.0)
    return acc / (k * k)


def sampling_offset(scene, sensor, reference):
    """Sub-pixel registration ``(dx, dy)`` of ``sensor`` relative to ``reference``.

    For a planar scene, pixel ``(r, c)`` of ``sensor``'s image sees what
    pixel ``(r + dy, c + dx)`` of the reference image sees. Moving a sensor
    by ``delta`` moves its image content by ``delta * (D - d) / (D * pitch)``
    elements, so the offset is the negative of that.
    """
    factor = (scene.scene_distance - scene.aperture_distance) / (
        scene.scene_distance * scene.element_pitch
    )
    return tuple(-(a - b) * factor for a, b in zip(sensor.position, reference.position))


def sensor_position_for_offset(scene, offset, reference=(0.0, 0.0)):
    """Sensor position that realizes a desired :func:`sampling_offset`."""
    factor = (scene.scene_distance - scene.aperture_distance) / (
        scene.scene_distance * scene.element_pitch
    )
    return tuple(r - o / factor for r, o in zip(reference, offset))


def _binary_readings(spec, x):
    m = spec.num_measurements
    out = np.empty((m, x.shape[1]))
    for start in range(0, m, _PATTERN_BLOCK):
        ks = np.arange(start, min(m, start + _PATTERN_BLOCK))
        out[start:start + ks.size] = patterns_for_rows(spec, ks) @ x
    return out


def acquire(pixel_image, spec, noise=NO_NOISE, sensor=None):
    """Simulate sensor readings for every selected row of ``spec``.

    ``pixel_image`` is ``(grid_height, grid_width, C)``. Each reading is the
    transmittance-weighted sum of pixel intensities plus independent noise
    per (row, channel); all channels share the same pattern. Hadamard
    patterns are evaluated entry by entry, not through the fast transform.
    """
    sensor = sensor or SensorConfig()
    img = np.asarray(pixel_image, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.shape[:2] != (spec.grid_height, spec.grid_width):
        raise InvalidArgumentError(
            f"pixel image is {img.shape[1]}x{img.shape[0]}, spec grid is "
            f"{spec.grid_width}x{spec.grid_height}"
        )
    x = plane_to_scan(img)
    if spec.mode is SensingMode.PERMUTED_HADAMARD:
        values = _binary_readings(spec, x)
    else:
        values = dense_forward_apply(spec, x)
    return add_noise(MeasurementSet(spec, values, sensor), noise)


def add_noise(ms, noise):
    """Copy of ``ms`` with read noise from ``noise`` added to every reading."""
    values = ms.values + noise.draw(ms.sensor.id, ms.values.shape)
    return MeasurementSet(ms.spec, values, ms.sensor, noise)


def acquire_multi(scene, sensors, spec, noise=NO_NOISE, supersample=2):
    """Pixelize and acquire for each sensor with the same patterns.

    ``spec`` may also be a list with one spec per sensor (e.g. from
    :func:`lenscs.sensing.split_rows`), in which case every sensor reads
    only its own rows.
    """
    sensors = list(sensors)
    if not sensors:
        raise InvalidArgumentError("at least one sensor is required")
    specs = list(spec) if isinstance(spec, (list, tuple)) else [spec] * len(sensors)
    if len(specs) != len(sensors):
        raise InvalidArgumentError(f"{len(specs)} specs given for {len(sensors)} sensors")
    return [
        acquire(pixelize(scene, s, sp.grid_width, sp.grid_height, supersample), sp, noise, s)
        for s, sp in zip(sensors, specs)
    ]
