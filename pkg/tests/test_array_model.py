import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimobeam import (
    AngleGrid,
    ArrayGeometry,
    Waveform,
    beampattern,
    beampattern_profile,
    cross_correlation,
    steering_vector,
)
from mimobeam.oracle import explicit_A, explicit_A_pair, quadratic

from conftest import random_waveform


class TestSteeringVector:
    def test_broadside_is_all_ones(self):
        np.testing.assert_allclose(steering_vector(ArrayGeometry(10), 0.0), np.ones(10))

    def test_endfire_alternates(self):
        np.testing.assert_allclose(steering_vector(ArrayGeometry(2), 90.0), [1, -1], atol=1e-15)

    def test_thirty_degrees(self):
        expected = np.exp(-1j * np.pi * np.arange(4) / 2)
        np.testing.assert_allclose(steering_vector(ArrayGeometry(4), 30.0), expected, atol=1e-15)

    @given(st.floats(-90, 90), st.integers(1, 40), st.floats(0.1, 4.0))
    def test_unit_modulus(self, theta, M, spacing):
        a = steering_vector(ArrayGeometry(M, spacing), theta)
        np.testing.assert_allclose(np.abs(a), 1.0, rtol=1e-14)
        assert np.vdot(a, a).real == pytest.approx(M, rel=1e-13)

    @pytest.mark.parametrize("M,spacing", [(0, 1.0), (3, 0.0), (3, -1.0)])
    def test_invalid_geometry(self, M, spacing):
        with pytest.raises(ValueError):
            ArrayGeometry(M, spacing)


class TestWaveform:
    def test_sample_major_layout(self):
        # entry l = n*M + m holds x_m(n)
        x = Waveform(np.arange(6), 3)
        assert x.num_samples == 2
        np.testing.assert_array_equal(x.matrix, [[0, 3], [1, 4], [2, 5]])
        np.testing.assert_array_equal(Waveform.from_matrix(x.matrix).entries, x.entries)

    def test_length_must_be_multiple(self):
        with pytest.raises(ValueError):
            Waveform(np.ones(7), 3)


class TestAngleGrid:
    def test_baseline_grid(self):
        g = AngleGrid.uniform()
        assert len(g) == 181
        assert g.angles[0] == -90 and g.angles[-1] == 90

    @pytest.mark.parametrize("angles,weights", [
        ([0, 0, 1], None),
        ([-91, 0], None),
        ([0, 1], [-1, 1]),
        ([0, 1], [0, 0]),
    ])
    def test_rejects(self, angles, weights):
        with pytest.raises(ValueError):
            AngleGrid(angles, weights)


class TestBeampattern:
    def test_uniform_waveform_broadside(self):
        M, N = 10, 32
        x = Waveform(np.ones(M * N) / np.sqrt(M * N), M)
        assert beampattern(x, ArrayGeometry(M), 0.0) == pytest.approx(M, rel=1e-12)

    def test_matches_explicit_quadratic_form(self, rng):
        geo = ArrayGeometry(3)
        x = random_waveform(rng, 3, 2)
        expected = quadratic(x, explicit_A(geo, 2, 17.0)).real
        assert beampattern(x, geo, 17.0) == pytest.approx(expected, rel=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_kronecker_equivalence(self, seed):
        rng = np.random.default_rng(seed)
        M, N = int(rng.integers(1, 5)), int(rng.integers(1, 4))
        geo = ArrayGeometry(M, float(rng.uniform(0.5, 2)))
        x = random_waveform(rng, M, N)
        theta = float(rng.uniform(-90, 90))
        assert beampattern(x, geo, theta) == pytest.approx(
            quadratic(x, explicit_A(geo, N, theta)).real, rel=1e-10)

    def test_dimension_mismatch(self, rng):
        with pytest.raises(ValueError):
            beampattern(random_waveform(rng, 3, 2), ArrayGeometry(4), 0.0)

    @settings(max_examples=50)
    @given(st.floats(0, 2 * np.pi), st.floats(-90, 90), st.integers(0, 2**32 - 1))
    def test_global_phase_invariance(self, phi, theta, seed):
        rng = np.random.default_rng(seed)
        geo = ArrayGeometry(4)
        x = random_waveform(rng, 4, 3)
        p0 = beampattern(x, geo, theta)
        assert beampattern(x * np.exp(1j * phi), geo, theta) == pytest.approx(p0, rel=1e-12, abs=1e-14)

    @settings(max_examples=50)
    @given(st.floats(-90, 90), st.integers(0, 2**32 - 1))
    def test_cauchy_schwarz_bound(self, theta, seed):
        rng = np.random.default_rng(seed)
        geo = ArrayGeometry(6)
        x = random_waveform(rng, 6, 5)
        assert beampattern(x, geo, theta) <= 6 * np.vdot(x.entries, x.entries).real * (1 + 1e-12)

    def test_energy_consistency(self, rng):
        # over a fine uniform grid in sin(theta) the mean power is ||x||^2
        M = 8
        geo = ArrayGeometry(M)
        x = random_waveform(rng, M, 4)
        u = np.linspace(-1, 1, 4001)[:-1]
        P = beampattern_profile(x, geo, np.rad2deg(np.arcsin(u)))
        assert np.mean(P) == pytest.approx(np.vdot(x.entries, x.entries).real, rel=1e-3)


class TestCrossCorrelation:
    def test_diagonal_is_beampattern(self, rng):
        geo = ArrayGeometry(5)
        x = random_waveform(rng, 5, 4)
        c = cross_correlation(x, geo, 40.0, 40.0)
        assert c.imag == pytest.approx(0.0, abs=1e-12)
        assert c.real == pytest.approx(beampattern(x, geo, 40.0), rel=1e-12)

    def test_hermitian_symmetry_random(self):
        rng = np.random.default_rng(7)
        geo = ArrayGeometry(4)
        for _ in range(100):
            x = random_waveform(rng, 4, 3)
            ti, tj = rng.uniform(-90, 90, 2)
            assert cross_correlation(x, geo, tj, ti) == pytest.approx(
                np.conj(cross_correlation(x, geo, ti, tj)), rel=1e-12, abs=1e-13)

    def test_matches_explicit_pair_matrix(self, rng):
        geo = ArrayGeometry(3)
        x = random_waveform(rng, 3, 2)
        expected = quadratic(x, explicit_A_pair(geo, 2, -40.0, 0.0))
        assert cross_correlation(x, geo, -40.0, 0.0) == pytest.approx(expected, rel=1e-10)


class TestProfile:
    def test_matches_per_angle_loop(self, rng):
        geo = ArrayGeometry(3)
        x = random_waveform(rng, 3, 2)
        grid = AngleGrid(np.linspace(-80, 80, 9))
        loop = [beampattern(x, geo, t) for t in grid.angles]
        np.testing.assert_allclose(beampattern_profile(x, geo, grid), loop, rtol=1e-12)

    def test_zero_waveform(self):
        prof = beampattern_profile(Waveform(np.zeros(20), 10), ArrayGeometry(10), AngleGrid.uniform())
        assert prof.shape == (181,) and not prof.any()

    def test_constant_modulus_profile_nonnegative(self, rng):
        geo = ArrayGeometry(10)
        x = Waveform(np.exp(2j * np.pi * rng.random(320)) / np.sqrt(320), 10)
        prof = beampattern_profile(x, geo, AngleGrid.uniform())
        assert prof.shape == (181,) and np.all(prof >= 0)
        assert prof.sum() == pytest.approx(sum(beampattern(x, geo, t) for t in range(-90, 91)), rel=1e-12)
