"""Brute-force reference implementations for tiny problems.

Everything here builds the ``MN x MN`` and ``(MN)^2 x (MN)^2`` matrices
literally and is meant for cross-checking the structured code paths in
tests and in ``mimobeam selfcheck``.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .array_model import ArrayGeometry, AngleGrid, Waveform, beampattern, steering_vector
from .constraints import (
    ConstModulus,
    Energy,
    EnergyPar,
    ModulusSimilarity,
    project_feasibility_check,
)
from .objective import PatternSpec

MAX_MN = 12


def _guard(mn):
    if mn > MAX_MN:
        raise ValueError(f"oracle limited to MN <= {MAX_MN}, got {mn}")


def vec(X):
    return np.asarray(X).ravel(order="F")


def explicit_A(geometry: ArrayGeometry, num_samples: int, theta_deg: float) -> np.ndarray:
    """``I_N (x) a*(theta) a^T(theta)``."""
    return explicit_A_pair(geometry, num_samples, theta_deg, theta_deg)


def explicit_A_pair(geometry: ArrayGeometry, num_samples: int,
                    theta_i_deg: float, theta_j_deg: float) -> np.ndarray:
    """``I_N (x) a*(theta_i) a^T(theta_j)``."""
    _guard(geometry.num_antennas * num_samples)
    ai = steering_vector(geometry, theta_i_deg)
    aj = steering_vector(geometry, theta_j_deg)
    return np.kron(np.eye(num_samples), np.outer(ai.conj(), aj))


def quadratic(x, A) -> complex:
    x = np.asarray(getattr(x, "entries", x))
    return complex(x.conj() @ A @ x)


def quartic(x, H) -> float:
    """``vec(xx^H)^H H vec(xx^H)``."""
    x = np.asarray(getattr(x, "entries", x))
    v = vec(np.outer(x, x.conj()))
    return float((v.conj() @ H @ v).real)


def explicit_HJ(spec: PatternSpec, geometry: ArrayGeometry, num_samples: int) -> np.ndarray:
    """Quartic-form matrix of the concentrated matching error."""
    mn = geometry.num_antennas * num_samples
    _guard(mn)
    H = np.zeros((mn * mn, mn * mn), dtype=complex)
    acc = np.zeros(mn * mn, dtype=complex)
    for th, w, p in zip(spec.grid.angles, spec.weights, spec.desired):
        v = vec(explicit_A(geometry, num_samples, th))
        H += w * np.outer(v, v.conj())
        acc += w * p * v
    s = spec.desired_energy
    if s > 0:
        H -= np.outer(acc, acc.conj()) / s
    return H


def explicit_HE(spec: PatternSpec, geometry: ArrayGeometry, num_samples: int) -> np.ndarray:
    """Quartic-form matrix of the cross-correlation sidelobe energy."""
    mn = geometry.num_antennas * num_samples
    _guard(mn)
    H = np.zeros((mn * mn, mn * mn), dtype=complex)
    t = spec.target_angles_deg
    for i in range(t.size):
        for j in range(t.size):
            if i != j:
                v = vec(explicit_A_pair(geometry, num_samples, t[i], t[j]))
                H += np.outer(v, v.conj())
    return H


def explicit_MJ(x_t: Waveform, spec: PatternSpec, geometry: ArrayGeometry) -> np.ndarray:
    N = x_t.num_samples
    A = [explicit_A(geometry, N, th) for th in spec.grid.angles]
    P = np.array([quadratic(x_t, a).real for a in A])
    s = spec.desired_energy
    alpha = np.sum(spec.weights * spec.desired * P) / s if s > 0 else 0.0
    return sum(w * (Pk - p * alpha) * a for w, Pk, p, a in zip(spec.weights, P, spec.desired, A))


def explicit_ME(x_t: Waveform, spec: PatternSpec, geometry: ArrayGeometry) -> np.ndarray:
    N = x_t.num_samples
    mn = x_t.entries.size
    out = np.zeros((mn, mn), dtype=complex)
    t = spec.target_angles_deg
    for i in range(t.size):
        for j in range(t.size):
            if i != j:
                pcc_ji = quadratic(x_t, explicit_A_pair(geometry, N, t[j], t[i]))
                out += pcc_ji * explicit_A_pair(geometry, N, t[i], t[j])
    return out


def explicit_y(x_t: Waveform, spec: PatternSpec, geometry: ArrayGeometry, psi, omega_cc, c_e):
    """``y`` from dense matrices; ``psi = (psi_J1, psi_J2, psi_E1, psi_E2)``."""
    pJ1, pJ2, pE1, pE2 = psi
    mn = x_t.entries.size
    MJ = explicit_MJ(x_t, spec, geometry)
    ME = explicit_ME(x_t, spec, geometry)
    Z = MJ + omega_cc * ME - c_e**2 * (pJ1 + omega_cc * pE1) * np.eye(mn) - (pJ2 + omega_cc * pE2) * np.eye(mn)
    return -4.0 * Z @ x_t.entries


def lmax(H) -> float:
    H = np.asarray(H)
    return float(np.linalg.eigvalsh(0.5 * (H + H.conj().T))[-1])


def random_feasible(constraint, mn: int, seed=None, size=None) -> np.ndarray:
    """Random points of the constraint set; shape ``(size, mn)`` or ``(mn,)``."""
    rng = np.random.default_rng(seed)
    n = 1 if size is None else int(size)
    if isinstance(constraint, Energy):
        g = rng.standard_normal((n, mn)) + 1j * rng.standard_normal((n, mn))
        out = constraint.c_e * g / np.linalg.norm(g, axis=1, keepdims=True)
    elif isinstance(constraint, ConstModulus):
        out = constraint.c_d * np.exp(2j * np.pi * rng.random((n, mn)))
    elif isinstance(constraint, EnergyPar):
        out = np.empty((n, mn), dtype=complex)
        c_e, c_p = constraint.c_e, constraint.c_p
        for r in range(n):
            w = np.abs(rng.standard_normal(mn)) + 1e-12
            phase = np.exp(2j * np.pi * rng.random(mn))
            if c_p * c_p * mn <= c_e * c_e * (1 + 1e-12):
                out[r] = c_p * phase
                continue

            def excess(beta):
                return np.sum(np.minimum(c_p, beta * w) ** 2) - c_e**2

            beta = brentq(excess, 0.0, c_p / w.min(), xtol=1e-15, rtol=1e-15)
            m = np.minimum(c_p, beta * w)
            m *= c_e / np.linalg.norm(m)
            out[r] = m * phase
    elif isinstance(constraint, ModulusSimilarity):
        delta = constraint.half_width
        ph = np.angle(constraint.x_ref) + rng.uniform(-delta, delta, (n, mn))
        out = constraint.c_d * np.exp(1j * ph)
    else:
        raise TypeError(f"unsupported constraint {constraint!r}")
    return out[0] if size is None else out


def tiny_problem(rng, M=None, N=None, n_angles=None, K=None):
    """Random small instance: returns ``(geometry, spec, N)``."""
    M = M or int(rng.integers(1, 4))
    N = N or int(rng.integers(1, 3))
    n_angles = n_angles or int(rng.integers(2, 8))
    K = int(rng.integers(0, 4)) if K is None else K
    angles = np.sort(rng.choice(np.arange(-89, 90), n_angles, replace=False)).astype(float)
    grid = AngleGrid(angles, rng.uniform(0.2, 2.0, n_angles))
    desired = (rng.random(n_angles) < 0.5).astype(float)
    desired[rng.integers(n_angles)] = 1.0
    targets = rng.uniform(-80, 80, K)
    spec = PatternSpec(grid, desired, targets, float(rng.uniform(0.1, 2.0)))
    return ArrayGeometry(M, float(rng.uniform(0.5, 1.5))), spec, N


def selfcheck(num_instances: int = 50, seed: int = 0, rtol: float = 1e-10):
    """Compare the structured library paths to dense oracles on tiny problems.

    Returns a list of ``(name, passed, worst_relative_error)``.
    """
    from . import majorizer as mj
    from .objective import sidelobe_energy, total_objective

    rng = np.random.default_rng(seed)
    worst = {k: 0.0 for k in ("J", "E", "M_J", "M_E", "y", "psi_E1", "psi_J1")}

    def rel(a, b, scale=0.0):
        a, b = np.asarray(a), np.asarray(b)
        return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), scale, 1e-300))

    for _ in range(num_instances):
        geometry, spec, N = tiny_problem(rng)
        mn = geometry.num_antennas * N
        x = Waveform(rng.standard_normal(mn) + 1j * rng.standard_normal(mn), geometry.num_antennas)
        x = x * (1.0 / np.linalg.norm(x.entries))
        HJ = explicit_HJ(spec, geometry, N)
        HE = explicit_HE(spec, geometry, N)
        f, alpha = total_objective(x, spec, geometry)
        E = sidelobe_energy(x, spec, geometry)
        # J is a difference of two terms of size sum(w P^2); measure against that
        P = beampattern(x, geometry, spec.grid.angles)
        J_scale = float(np.sum(spec.weights * P**2))
        worst["J"] = max(worst["J"], rel(f - spec.sidelobe_weight * E, quartic(x, HJ), J_scale))
        worst["E"] = max(worst["E"], rel(E, quartic(x, HE)))
        parts = mj.build_parts(x, spec, geometry)
        I = np.eye(N)
        worst["M_J"] = max(worst["M_J"], rel(np.kron(I, parts.B_J), explicit_MJ(x, spec, geometry)))
        worst["M_E"] = max(worst["M_E"], rel(np.kron(I, parts.B_E), explicit_ME(x, spec, geometry)))
        y = mj.assemble_y(x, parts, spec.sidelobe_weight, 1.0)
        psi = (parts.psi_J1, parts.psi_J2, parts.psi_E1, parts.psi_E2)
        worst["y"] = max(worst["y"], rel(y, explicit_y(x, spec, geometry, psi, spec.sidelobe_weight, 1.0)))
        worst["psi_E1"] = max(worst["psi_E1"], rel(mj.psi_E1(spec, geometry, N), lmax(HE)))
        # global bound must dominate; record shortfall only
        short = lmax(HJ) - mj.psi_J1(spec, geometry, N)
        worst["psi_J1"] = max(worst["psi_J1"], max(0.0, short) / max(1.0, lmax(HJ)))
    tol = {"psi_E1": 1e-8}
    return [(k, v <= tol.get(k, rtol), v) for k, v in worst.items()]


def feasibility_audit(constraint, mn: int, draws: int = 10_000, seed=None) -> bool:
    pts = random_feasible(constraint, mn, seed=seed, size=draws)
    return all(project_feasibility_check(p, constraint).feasible for p in pts)
