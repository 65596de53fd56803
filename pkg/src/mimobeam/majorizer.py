"""Two-stage surrogate construction for the MM iteration.

At iterate ``x_t`` the quartic objective is first majorized by a quadratic
with curvature ``psi_1`` (``J1``/``E1``) and then by a linear function with
curvature ``psi_2`` (``J2``/``E2``).  Everything lives at ``M x M`` size:
``M_J = I_N (x) B_J`` and ``M_E = I_N (x) B_E`` are never formed.

Two choices of the first-stage constant are available:

``sphere=False``
    ``lambda_max`` of the angle Gram matrix scaled by ``N``.  This bounds the
    largest eigenvalue of the full quartic-form matrix and so is valid on
    all of ``C^{MN}``.
``sphere=True``
    The same bound divided by ``N``.  The beampattern depends on ``x`` only
    through ``R = sum_n x(n) x(n)^H`` and the map ``xx^H -> R`` is a
    contraction on differences of equal-norm rank-one matrices, so the
    tighter constant still majorizes on the energy sphere, which every
    supported constraint set lies on.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import toeplitz

from .array_model import (
    ArrayGeometry,
    Waveform,
    _check,
    correlation_from_matrix,
    pattern_from_matrix,
    steering_matrix,
)
from .objective import PatternSpec, _alpha, _matching, _sidelobe


class OffSphereError(ValueError):
    """Raised when a point leaves the energy sphere the surrogates assume."""


@dataclass(eq=False)
class MajorizerParts:
    """Surrogate ingredients at one iterate.

    ``J_t``, ``E_t`` and ``alpha_t`` are the true term values at the iterate;
    ``lmax_BJ`` is the exact top eigenvalue of ``B_J`` kept for diagnostics
    next to its FFT bound ``psi_J2``.
    """

    B_J: np.ndarray
    B_E: np.ndarray
    psi_J1: float
    psi_J2: float
    psi_E1: float
    psi_E2: float
    alpha_t: float = 0.0
    J_t: float = 0.0
    E_t: float = 0.0
    lmax_BJ: float = float("nan")
    y: np.ndarray = field(default=None)


def _toeplitz_core(coeffs, steer):
    # b_d = sum_theta c(theta) exp(+j pi d sin theta); first column of B
    b = steer.conj().T @ coeffs
    b[0] = b[0].real
    return toeplitz(b, b.conj())


def _pair_core(S, steer_t):
    K = steer_t.shape[0]
    M = steer_t.shape[1]
    if K < 2:
        return np.zeros((M, M), dtype=complex)
    C = correlation_from_matrix(S, steer_t)
    W = C.T.copy()
    np.fill_diagonal(W, 0.0)
    B = steer_t.conj().T @ W @ steer_t
    return 0.5 * (B + B.conj().T)


def build_BJ(x_t: Waveform, spec: PatternSpec, geometry: ArrayGeometry, alpha_t: float) -> np.ndarray:
    """Hermitian Toeplitz core ``B = sum w (P(theta, x_t) - p alpha_t) a* a^T``."""
    _check(x_t, geometry)
    steer = steering_matrix(geometry, spec.grid.angles)
    P = pattern_from_matrix(x_t.matrix, steer)
    return _toeplitz_core(spec.weights * (P - spec.desired * alpha_t), steer)


def build_BE(x_t: Waveform, spec: PatternSpec, geometry: ArrayGeometry) -> np.ndarray:
    """Core ``B_E = sum_{i != j} P_cc(theta_j, theta_i, x_t) a*(theta_i) a^T(theta_j)``."""
    _check(x_t, geometry)
    return _pair_core(x_t.matrix, steering_matrix(geometry, spec.target_angles_deg))


def toeplitz_lmax_bound(B, atol: float = 1e-9) -> float:
    """Upper bound on ``lambda_max`` of a Hermitian Toeplitz matrix.

    The first column ``b`` is embedded in the length-``2M`` vector
    ``[b_0, ..., b_{M-1}, 0, conj(b_{M-1}), ..., conj(b_1)]``; with ``mu`` its
    unnormalized DFT the bound is the mean of the largest even-indexed and
    the largest odd-indexed entry of ``mu``.
    """
    B = np.atleast_2d(np.asarray(B, dtype=complex))
    M = B.shape[0]
    if B.shape != (M, M):
        raise ValueError("expected a square matrix")
    scale = max(1.0, float(np.abs(B).max()))
    if not np.allclose(B, B.conj().T, rtol=0, atol=atol * scale):
        raise ValueError("matrix is not Hermitian")
    b = B[:, 0]
    if not np.allclose(B, toeplitz(b, b.conj()), rtol=0, atol=atol * scale):
        raise ValueError("matrix is not Toeplitz")
    emb = np.concatenate([b, [0.0], b[:0:-1].conj()])
    mu = np.fft.fft(emb)
    if np.abs(mu.imag).max() > atol * max(1.0, float(np.abs(mu).max())):
        raise ValueError("DFT of the embedding is not real; input is not Hermitian Toeplitz")
    mu = mu.real
    return 0.5 * (mu[0::2].max() + mu[1::2].max())


def psi_J1(spec: PatternSpec, geometry: ArrayGeometry, num_samples: int,
           sphere: bool = False) -> float:
    """First-stage curvature for the matching term.

    Largest eigenvalue of ``G_ab = sqrt(w_a w_b) |a^H(theta_a) a(theta_b)|^2``
    times ``num_samples``; the factor is dropped when ``sphere`` is set.
    """
    keep = spec.weights > 0
    steer = steering_matrix(geometry, spec.grid.angles[keep])
    sw = np.sqrt(spec.weights[keep])
    G = np.abs(steer.conj() @ steer.T) ** 2 * np.outer(sw, sw)
    lam = float(np.linalg.eigvalsh(G)[-1])
    return lam if sphere else num_samples * lam


def psi_E1(spec: PatternSpec, geometry: ArrayGeometry, num_samples: int,
           sphere: bool = False) -> float:
    """First-stage curvature for the sidelobe term (0 with fewer than two targets).

    This is the exact top eigenvalue of the quartic-form matrix of ``E``,
    computed from the Gram matrix of the ordered target pairs.
    """
    K = spec.num_targets
    if K < 2:
        return 0.0
    steer = steering_matrix(geometry, spec.target_angles_deg)
    Gt = steer.conj() @ steer.T  # Gt[k, i] = a_k^H a_i
    pairs = [(i, j) for i in range(K) for j in range(K) if i != j]
    I = np.array([p[0] for p in pairs])
    J = np.array([p[1] for p in pairs])
    G = Gt[np.ix_(I, I)].T * Gt[np.ix_(J, J)]
    lam = float(np.linalg.eigvalsh(0.5 * (G + G.conj().T))[-1])
    return lam if sphere else num_samples * lam


def psi_J2(B_J) -> float:
    """Second-stage curvature for the matching term: the Toeplitz FFT bound."""
    return toeplitz_lmax_bound(B_J)


def psi_E2(B_E) -> float:
    """Second-stage curvature for the sidelobe term: exact ``lambda_max(B_E)``."""
    return float(np.linalg.eigvalsh(np.asarray(B_E))[-1])


class SurrogateWorkspace:
    """Per-problem cache of steering matrices and iterate-free curvatures.

    Read-only after construction; safe to share between threads.
    """

    def __init__(self, spec: PatternSpec, geometry: ArrayGeometry, num_samples: int,
                 sphere: bool = True, include_sidelobe: bool = True):
        self.spec = spec
        self.geometry = geometry
        self.num_samples = num_samples
        self.include_sidelobe = include_sidelobe and spec.num_targets >= 2
        self.steer = steering_matrix(geometry, spec.grid.angles)
        self.steer_t = steering_matrix(geometry, spec.target_angles_deg)
        self.psi_J1 = psi_J1(spec, geometry, num_samples, sphere=sphere)
        self.psi_E1 = psi_E1(spec, geometry, num_samples, sphere=sphere) if self.include_sidelobe else 0.0

    def evaluate(self, S):
        """Return ``(J, E, alpha, P)`` for the sample matrix ``S``."""
        P = pattern_from_matrix(S, self.steer)
        alpha = _alpha(P, self.spec)
        J = _matching(alpha, P, self.spec)
        E = 0.0
        if self.spec.num_targets >= 2:
            E = _sidelobe(correlation_from_matrix(S, self.steer_t))
        return J, E, alpha, P

    def parts(self, S) -> MajorizerParts:
        J, E, alpha, P = self.evaluate(S)
        spec = self.spec
        B_J = _toeplitz_core(spec.weights * (P - spec.desired * alpha), self.steer)
        M = self.geometry.num_antennas
        if self.include_sidelobe:
            B_E = _pair_core(S, self.steer_t)
            pE2 = psi_E2(B_E)
        else:
            B_E = np.zeros((M, M), dtype=complex)
            pE2 = 0.0
        return MajorizerParts(
            B_J=B_J, B_E=B_E,
            psi_J1=self.psi_J1, psi_J2=psi_J2(B_J),
            psi_E1=self.psi_E1, psi_E2=pE2,
            alpha_t=alpha, J_t=J, E_t=E,
            lmax_BJ=float(np.linalg.eigvalsh(B_J)[-1]),
        )


def build_parts(x_t: Waveform, spec: PatternSpec, geometry: ArrayGeometry,
                sphere: bool = True) -> MajorizerParts:
    """All surrogate ingredients at ``x_t`` (sidelobe parts built whenever K >= 2)."""
    _check(x_t, geometry)
    ws = SurrogateWorkspace(spec, geometry, x_t.num_samples, sphere=sphere)
    return ws.parts(x_t.matrix)


def assemble_y(x_t: Waveform, parts: MajorizerParts, omega_cc: float, c_e: float,
               rtol: float = 1e-8) -> np.ndarray:
    """Linear coefficient ``y`` of the final surrogate ``-Re(x^H y)``.

    ``y = -4 (B_J + w_cc B_E) x_t(n) + 4 sigma x_t(n)`` column by column with
    ``sigma = c_e^2 (psi_J1 + w_cc psi_E1) + psi_J2 + w_cc psi_E2``.
    """
    S = x_t.matrix
    energy = float(np.vdot(x_t.entries, x_t.entries).real)
    if abs(energy - c_e**2) > rtol * c_e**2:
        raise OffSphereError(f"iterate energy {energy!r} drifted from c_e^2 = {c_e**2!r}")
    B = parts.B_J + omega_cc * parts.B_E if omega_cc else parts.B_J
    sigma = c_e**2 * (parts.psi_J1 + omega_cc * parts.psi_E1) + parts.psi_J2 + omega_cc * parts.psi_E2
    Y = -4.0 * (B @ S) + 4.0 * sigma * S
    return Y.T.reshape(-1)


def _sphere_norms(x: Waveform, x_t: Waveform, rtol=1e-8):
    nx = float(np.vdot(x.entries, x.entries).real)
    nt = float(np.vdot(x_t.entries, x_t.entries).real)
    if abs(nx - nt) > rtol * max(nt, 1e-300):
        raise OffSphereError("surrogate values are only valid for ||x|| = ||x_t||")
    return nx, nt


def _quad(S, B):
    return float(np.sum(S.conj() * (B @ S)).real)


def _stage1(x, x_t, B, psi1, true_t):
    nx, nt = _sphere_norms(x, x_t)
    overlap = abs(np.vdot(x_t.entries, x.entries)) ** 2
    return psi1 * nx**2 + 2.0 * (_quad(x.matrix, B) - psi1 * overlap) + psi1 * nt**2 - true_t


def _stage2(x, x_t, B, psi1, psi2, true_t):
    nx, nt = _sphere_norms(x, x_t)
    St = x_t.matrix
    Qxt = B @ St - (psi1 * nt + psi2) * St
    lin = float(np.sum(x.matrix.conj() * Qxt).real)
    qt = _quad(St, B) - psi1 * nt**2
    return (psi1 * nx**2 + 2.0 * psi2 * nx + 4.0 * lin
            + 2.0 * (psi2 * nt - qt) + psi1 * nt**2 - true_t)


def majorizer_value_J1(x: Waveform, x_t: Waveform, parts: MajorizerParts, spec=None) -> float:
    """First-stage surrogate of ``J`` at ``x`` with all constants kept."""
    return _stage1(x, x_t, parts.B_J, parts.psi_J1, parts.J_t)


def majorizer_value_J2(x: Waveform, x_t: Waveform, parts: MajorizerParts, spec=None) -> float:
    """Second-stage (linear on the sphere) surrogate of ``J`` at ``x``."""
    return _stage2(x, x_t, parts.B_J, parts.psi_J1, parts.psi_J2, parts.J_t)


def majorizer_value_E1(x: Waveform, x_t: Waveform, parts: MajorizerParts, spec=None) -> float:
    return _stage1(x, x_t, parts.B_E, parts.psi_E1, parts.E_t)


def majorizer_value_E2(x: Waveform, x_t: Waveform, parts: MajorizerParts, spec=None) -> float:
    return _stage2(x, x_t, parts.B_E, parts.psi_E1, parts.psi_E2, parts.E_t)
