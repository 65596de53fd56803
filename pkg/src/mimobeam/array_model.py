"""Uniform linear array model: steering vectors, beampattern and
cross-correlation evaluation.

Waveforms are stored sample-major: entry ``l = n*M + m`` (zero based) holds
the sample ``x_m(n)``.  Internally every evaluation reshapes the waveform to
an ``M x N`` matrix ``S`` whose columns are the snapshots ``x(n)``, so that
``P(theta) = sum_n |a^T(theta) x(n)|^2`` becomes a single matrix product and
no ``MN x MN`` matrix is ever formed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class ArrayGeometry:
    """ULA with ``num_antennas`` elements spaced ``spacing`` half-wavelengths apart."""

    num_antennas: int
    spacing: float = 1.0

    def __post_init__(self):
        if int(self.num_antennas) != self.num_antennas or self.num_antennas < 1:
            raise ValueError(f"num_antennas must be a positive integer, got {self.num_antennas}")
        if not self.spacing > 0:
            raise ValueError(f"spacing must be positive, got {self.spacing}")


@dataclass(frozen=True, eq=False)
class Waveform:
    """Complex MIMO waveform ``x = [x(1); ...; x(N)]`` of length ``M*N``."""

    entries: np.ndarray
    num_antennas: int

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex).reshape(-1)
        if self.num_antennas < 1:
            raise ValueError("num_antennas must be >= 1")
        if entries.size == 0 or entries.size % self.num_antennas:
            raise ValueError(
                f"waveform length {entries.size} is not a positive multiple of M={self.num_antennas}"
            )
        object.__setattr__(self, "entries", entries)

    @classmethod
    def from_matrix(cls, S):
        """Build from an ``M x N`` matrix whose columns are the snapshots."""
        S = np.asarray(S, dtype=complex)
        return cls(S.T.reshape(-1), S.shape[0])

    @property
    def num_samples(self) -> int:
        return self.entries.size // self.num_antennas

    @property
    def matrix(self) -> np.ndarray:
        """``M x N`` view with column ``n`` equal to ``x(n)``."""
        return self.entries.reshape(self.num_samples, self.num_antennas).T

    def __len__(self):
        return self.entries.size

    def __mul__(self, c):
        return Waveform(self.entries * c, self.num_antennas)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class AngleGrid:
    """Angle set in degrees together with the matching weights ``omega(theta)``."""

    angles: np.ndarray
    weights: np.ndarray = field(default=None)

    def __post_init__(self):
        angles = np.asarray(self.angles, dtype=float).reshape(-1)
        if self.weights is None:
            weights = np.ones_like(angles)
        else:
            weights = np.broadcast_to(np.asarray(self.weights, dtype=float), angles.shape).copy()
        if angles.size == 0:
            raise ValueError("angle grid is empty")
        if np.any(np.diff(angles) <= 0):
            raise ValueError("grid angles must be strictly increasing")
        if angles[0] < -90 or angles[-1] > 90:
            raise ValueError("grid angles must lie in [-90, 90] degrees")
        if np.any(weights < 0) or not np.any(weights > 0):
            raise ValueError("weights must be nonnegative with at least one positive entry")
        object.__setattr__(self, "angles", angles)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, min_deg=-90.0, max_deg=90.0, step_deg=1.0, weights=None):
        n = int(round((max_deg - min_deg) / step_deg)) + 1
        return cls(min_deg + step_deg * np.arange(n), weights)

    def __len__(self):
        return self.angles.size


def steering_matrix(geometry: ArrayGeometry, angles_deg) -> np.ndarray:
    """Rows are ``a^T(theta)`` for each angle; shape ``(len(angles), M)``."""
    s = np.sin(np.deg2rad(np.atleast_1d(np.asarray(angles_deg, dtype=float))))
    m = np.arange(geometry.num_antennas)
    return np.exp(-1j * np.pi * geometry.spacing * np.outer(s, m))


def steering_vector(geometry: ArrayGeometry, theta_deg: float) -> np.ndarray:
    """Transmit steering vector ``a(theta)`` with entries ``exp(-j pi d (m-1) sin theta)``."""
    return steering_matrix(geometry, theta_deg)[0]


def _check(waveform: Waveform, geometry: ArrayGeometry):
    if waveform.num_antennas != geometry.num_antennas:
        raise ValueError(
            f"waveform has M={waveform.num_antennas} but the array has M={geometry.num_antennas}"
        )


def pattern_from_matrix(S: np.ndarray, steer: np.ndarray) -> np.ndarray:
    """``P(theta_k)`` for every row of ``steer`` given the sample matrix ``S``."""
    Y = steer @ S
    return np.einsum("kn,kn->k", Y.real, Y.real) + np.einsum("kn,kn->k", Y.imag, Y.imag)


def correlation_from_matrix(S: np.ndarray, steer: np.ndarray) -> np.ndarray:
    """Matrix ``C[i, j] = P_cc(theta_i, theta_j)`` over the rows of ``steer``."""
    Y = steer @ S
    return Y.conj() @ Y.T


def beampattern(waveform: Waveform, geometry: ArrayGeometry, theta_deg: float) -> float:
    """Transmit power ``P(theta, x) = sum_n |a^T(theta) x(n)|^2``."""
    _check(waveform, geometry)
    return float(pattern_from_matrix(waveform.matrix, steering_matrix(geometry, theta_deg))[0])


def cross_correlation(waveform: Waveform, geometry: ArrayGeometry,
                      theta_i_deg: float, theta_j_deg: float) -> complex:
    """Spatial cross-correlation ``sum_n conj(a^T(theta_i) x(n)) a^T(theta_j) x(n)``."""
    _check(waveform, geometry)
    steer = steering_matrix(geometry, [theta_i_deg, theta_j_deg])
    Y = steer @ waveform.matrix
    return complex(np.vdot(Y[0], Y[1]))


def beampattern_profile(waveform: Waveform, geometry: ArrayGeometry, grid) -> np.ndarray:
    """Beampattern over every angle of ``grid`` (an :class:`AngleGrid` or array of degrees)."""
    _check(waveform, geometry)
    angles = grid.angles if isinstance(grid, AngleGrid) else grid
    return pattern_from_matrix(waveform.matrix, steering_matrix(geometry, angles))
