import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lenscs.errors import InvalidArgumentError
from lenscs.phantoms import smooth_source
from lenscs.scene import (
    NoiseModel,
    SceneDescription,
    SensorConfig,
    acquire,
    acquire_multi,
    pixelize,
    sampling_offset,
    sensor_position_for_offset,
)
from lenscs.sensing import (
    SensingMode,
    binary_to_signed,
    forward_apply,
    make_sensing_spec,
    plane_to_scan,
)


def blob_source(size=401, sigma=3.0):
    yy, xx = np.mgrid[:size, :size] - (size - 1) / 2.0
    blob = np.exp(-(xx**2 + yy**2) / (2 * sigma**2))
    return np.repeat(blob[:, :, None], 3, axis=2)


def centroid(img):
    plane = img[..., 0]
    yy, xx = np.mgrid[: plane.shape[0], : plane.shape[1]]
    return (plane * xx).sum() / plane.sum(), (plane * yy).sum() / plane.sum()


class TestGeometry:
    def test_bad_geometry(self):
        src = np.ones((4, 4, 3))
        with pytest.raises(InvalidArgumentError):
            SceneDescription(src, 1.0, 1.0, 0.1)
        with pytest.raises(InvalidArgumentError):
            SceneDescription(src, 10.0, 0.0, 0.1)
        with pytest.raises(InvalidArgumentError):
            SceneDescription(-src, 10.0, 1.0, 0.1)

    def test_uniform_source(self):
        scene = SceneDescription(np.full((200, 200, 3), 7.5), 50.0, 1.0, 0.05)
        img = pixelize(scene, SensorConfig(), 20, 20, supersample=3)
        # the grid covers 20 * 0.05 * 50 = 50 scene pixels, well inside the source
        np.testing.assert_allclose(img, 7.5, rtol=1e-12)

    def test_black_surround(self):
        scene = SceneDescription(np.ones((10, 10, 3)), 100.0, 1.0, 1.0)
        img = pixelize(scene, SensorConfig(), 4, 4)
        assert np.all(img == 0)

    @pytest.mark.parametrize("distance", [100.0, 1000.0, 10000.0])
    def test_shift_formula_matches_centroids(self, distance):
        d = 1.0
        pitch = 10.0 * d / distance  # 10 source pixels per element
        scene = SceneDescription(blob_source(), distance, d, pitch)
        shift = 3.0
        delta = shift * distance * pitch / (2 * (distance - d))
        a = SensorConfig((-delta, 0.0), 0)
        b = SensorConfig((delta, 0.0), 1)
        ca = centroid(pixelize(scene, a, 31, 31, supersample=4))
        cb = centroid(pixelize(scene, b, 31, 31, supersample=4))
        # moving the sensor right by 2*delta moves the image right by 2*delta*(D-d)/(D*pitch)
        assert cb[0] - ca[0] == pytest.approx(shift, abs=1e-3)
        assert ca[1] == pytest.approx(cb[1], abs=1e-9)
        assert sampling_offset(scene, b, a) == pytest.approx((-shift, 0.0))
        # in scene units the chief-ray displacement is 2*delta*(D-d)/d
        assert 2 * delta * (distance - d) / d == pytest.approx(shift * pitch * distance / d)

    def test_shifted_copies(self):
        src = smooth_source(300, 300, seed=4)
        scene = SceneDescription(src, 100.0, 1.0, 0.04)
        a = SensorConfig((0.0, 0.0), 0)
        b = SensorConfig(sensor_position_for_offset(scene, (-2.0, 1.0)), 1)
        assert sampling_offset(scene, b, a) == pytest.approx((-2.0, 1.0))
        ia = pixelize(scene, a, 40, 40)
        ib = pixelize(scene, b, 40, 40)
        # ib[r, c] == ia[r + 1, c - 2]
        np.testing.assert_allclose(ib[:-1, 2:], ia[1:, :-2], atol=1e-9)

    def test_supersampling_within_local_variation(self):
        src = smooth_source(300, 300, seed=1)
        scene = SceneDescription(src, 100.0, 1.0, 0.05)
        coarse = pixelize(scene, SensorConfig(), 40, 40, supersample=1)
        fine = pixelize(scene, SensorConfig(), 40, 40, supersample=4)
        footprint = scene.element_pitch * scene.magnification  # in source pixels
        gy, gx = np.gradient(src, axis=(0, 1))
        bound = np.sqrt(gx**2 + gy**2).max() * footprint * np.sqrt(2)
        assert np.abs(coarse - fine).max() <= bound

    def test_bad_supersample(self):
        scene = SceneDescription(np.ones((4, 4, 3)), 10.0, 1.0, 0.1)
        with pytest.raises(InvalidArgumentError):
            pixelize(scene, SensorConfig(), 2, 2, supersample=0)


class TestAcquire:
    spec = make_sensing_spec(12, 10, 40, permutation_seed=3)

    def image(self, seed=0):
        return np.random.default_rng(seed).random((10, 12, 3))

    def test_dark(self):
        ms = acquire(np.zeros((10, 12, 3)), self.spec)
        assert np.all(ms.values == 0)

    def test_open_row_is_total_light(self):
        img = self.image()
        ms = acquire(img, self.spec)
        np.testing.assert_allclose(ms.values[0], img.sum(axis=(0, 1)), rtol=1e-13)

    def test_signed_matches_fast_operator(self):
        img = self.image(1)
        ms = acquire(img, self.spec)
        fast = forward_apply(self.spec, plane_to_scan(img))
        np.testing.assert_allclose(binary_to_signed(ms.values, self.spec), fast, atol=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            acquire(np.zeros((12, 10, 3)), self.spec)

    @settings(max_examples=20, deadline=None)
    @given(st.floats(-3, 3), st.floats(-3, 3), st.integers(0, 1000))
    def test_linear_in_scene(self, a, b, seed):
        x, z = self.image(seed), self.image(seed + 1)
        lhs = acquire(a * x + b * z, self.spec).values
        rhs = a * acquire(x, self.spec).values + b * acquire(z, self.spec).values
        assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-12 * 120 * 6)

    @settings(max_examples=20, deadline=None)
    @given(st.integers(0, 119), st.floats(0.0, 10.0), st.integers(0, 1000))
    def test_monotone(self, pixel, amount, seed):
        x = self.image(seed)
        brighter = x.copy()
        brighter[pixel % 10, pixel // 10] += amount
        assert np.all(acquire(brighter, self.spec).values >= acquire(x, self.spec).values - 1e-12)

    def test_noise_deterministic_and_independent(self):
        img = self.image()
        noise = NoiseModel(0.5, seed=9)
        a = acquire(img, self.spec, noise, SensorConfig((0, 0), 1)).values
        b = acquire(img, self.spec, noise, SensorConfig((0, 0), 1)).values
        c = acquire(img, self.spec, noise, SensorConfig((0, 0), 2)).values
        np.testing.assert_array_equal(a, b)
        assert not np.allclose(a, c)
        eps = a - acquire(img, self.spec).values
        # channels share a pattern but draw independent noise
        assert not np.allclose(eps[:, 0], eps[:, 1])
        assert abs(eps.std() - 0.5) < 0.15

    def test_noise_rejects_negative_sigma(self):
        with pytest.raises(InvalidArgumentError):
            NoiseModel(-1.0)

    def test_dense_mode(self):
        spec = make_sensing_spec(4, 3, 5, 1, mode=SensingMode.DENSE_RANDOM01)
        img = self.image()[:3, :4]
        from lenscs.sensing import dense_matrix

        ms = acquire(img, spec)
        np.testing.assert_allclose(ms.values, dense_matrix(spec) @ plane_to_scan(img))


class TestAcquireMulti:
    scene = SceneDescription(smooth_source(120, 120, seed=2), 100.0, 1.0, 0.1)
    spec = make_sensing_spec(12, 12, 30, 5)

    def test_single_sensor_is_composition(self):
        s = SensorConfig((0.01, 0.0), 0)
        [ms] = acquire_multi(self.scene, [s], self.spec)
        direct = acquire(pixelize(self.scene, s, 12, 12), self.spec, sensor=s)
        np.testing.assert_array_equal(ms.values, direct.values)

    def test_co_located_identical(self):
        sensors = [SensorConfig((0.0, 0.0), 0), SensorConfig((0.0, 0.0), 1)]
        a, b = acquire_multi(self.scene, sensors, self.spec)
        np.testing.assert_array_equal(a.values, b.values)

    def test_offset_sensors_differ(self):
        sensors = [SensorConfig((-0.05, 0.0), 0), SensorConfig((0.05, 0.0), 1)]
        a, b = acquire_multi(self.scene, sensors, self.spec)
        assert not np.allclose(a.values, b.values)
        assert [a.sensor.id, b.sensor.id] == [0, 1]

    def test_requires_sensor(self):
        with pytest.raises(InvalidArgumentError):
            acquire_multi(self.scene, [], self.spec)
