import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mimobeam import (
    ArrayGeometry,
    ConstModulus,
    Energy,
    EnergyPar,
    ModulusSimilarity,
    Waveform,
    beampattern,
    cross_correlation,
    project_feasibility_check,
)
from mimobeam import oracle


def brute_pattern(x, geo, theta):
    # literal sum over samples and antenna pairs
    M = geo.num_antennas
    N = len(x) // M
    total = 0.0
    for n in range(N):
        s = 0j
        for m in range(M):
            s += np.exp(-1j * np.pi * geo.spacing * m * np.sin(np.deg2rad(theta))) * x[n * M + m]
        total += abs(s) ** 2
    return total


class TestDense:
    @given(st.integers(1, 3), st.integers(1, 3), st.floats(-89, 89), st.integers(0, 2**32 - 1))
    @settings(max_examples=40, deadline=None)
    def test_A_is_beampattern(self, M, N, theta, seed):
        rng = np.random.default_rng(seed)
        geo = ArrayGeometry(M, 0.5 + rng.random())
        x = rng.standard_normal(M * N) + 1j * rng.standard_normal(M * N)
        A = oracle.explicit_A(geo, N, theta)
        assert oracle.quadratic(x, A).real == pytest.approx(brute_pattern(x, geo, theta), rel=1e-12)
        assert oracle.quadratic(x, A).real == pytest.approx(beampattern(Waveform(x, M), geo, theta), rel=1e-12)

    def test_A_pair_is_cross_correlation(self, rng):
        geo = ArrayGeometry(3)
        x = Waveform(rng.standard_normal(6) + 1j * rng.standard_normal(6), 3)
        A = oracle.explicit_A_pair(geo, 2, -20.0, 35.0)
        assert oracle.quadratic(x, A) == pytest.approx(cross_correlation(x, geo, -20.0, 35.0), rel=1e-12)

    def test_quartic_of_rank_one(self, rng):
        # H = vec(A) vec(A)^H gives |x^H A x|^2
        A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        v = oracle.vec(A)
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        assert oracle.quartic(x, np.outer(v, v.conj())) == pytest.approx(abs(x.conj() @ A @ x) ** 2, rel=1e-12)

    def test_hessians_hermitian_psd(self, rng):
        geo, spec, N = oracle.tiny_problem(rng, M=2, N=2, n_angles=5, K=3)
        for H in (oracle.explicit_HJ(spec, geo, N), oracle.explicit_HE(spec, geo, N)):
            np.testing.assert_allclose(H, H.conj().T, atol=1e-12)
            assert np.linalg.eigvalsh(H)[0] >= -1e-10 * max(1.0, oracle.lmax(H))

    def test_size_guard(self):
        with pytest.raises(ValueError, match="MN <= 12"):
            oracle.explicit_A(ArrayGeometry(4), 4, 0.0)


class TestRandomFeasible:
    @pytest.mark.parametrize("constraint", [
        Energy(1.3),
        ConstModulus(0.2),
        EnergyPar.from_par(1.0, 2.0, 20),
        EnergyPar.from_par(1.0, 1.0, 20),
        ModulusSimilarity(0.2, 0.2 * np.exp(1j * np.arange(20)), 0.1),
    ], ids=lambda c: type(c).__name__)
    def test_points_feasible(self, constraint):
        assert oracle.feasibility_audit(constraint, 20, draws=500, seed=1)

    def test_shape(self):
        assert oracle.random_feasible(Energy(1.0), 7, seed=0).shape == (7,)
        assert oracle.random_feasible(Energy(1.0), 7, seed=0, size=3).shape == (3, 7)

    def test_par_points_reach_cap(self):
        c = EnergyPar(1.0, 0.4)
        pts = oracle.random_feasible(c, 20, seed=3, size=50)
        assert np.all(np.abs(pts).max(axis=1) <= 0.4 + 1e-12)
        assert np.any(np.abs(pts).max(axis=1) > 0.4 - 1e-9)

    def test_unknown_constraint(self):
        with pytest.raises(TypeError):
            oracle.random_feasible(object(), 4)


class TestSelfcheck:
    def test_all_pass(self):
        results = oracle.selfcheck(num_instances=20, seed=4)
        assert {name for name, *_ in results} == {"J", "E", "M_J", "M_E", "y", "psi_E1", "psi_J1"}
        assert all(ok for _, ok, _ in results), results

    def test_tiny_problem_bounds(self, rng):
        for _ in range(30):
            geo, spec, N = oracle.tiny_problem(rng)
            assert geo.num_antennas <= 3 and N <= 2
            assert len(spec.grid) <= 7 and spec.num_targets <= 3
            assert spec.desired.max() == 1.0
