"""Beampattern matching error, cross-correlation sidelobe energy and the
combined objective ``f = J(alpha(x), x) + w_cc * E(x)``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .array_model import (
    AngleGrid,
    ArrayGeometry,
    Waveform,
    _check,
    correlation_from_matrix,
    pattern_from_matrix,
    steering_matrix,
)


@dataclass(frozen=True, eq=False)
class PatternSpec:
    """Desired pattern ``p`` on ``grid``, target directions and sidelobe weight.

    Target angles are evaluated with their own steering vectors; they need
    not sit on the grid.
    """

    grid: AngleGrid
    desired: np.ndarray
    target_angles_deg: np.ndarray = ()
    sidelobe_weight: float = 0.0

    def __post_init__(self):
        desired = np.asarray(self.desired, dtype=float).reshape(-1)
        if desired.shape != self.grid.angles.shape:
            raise ValueError("desired pattern must have one value per grid angle")
        if np.any(desired < 0):
            raise ValueError("desired pattern must be nonnegative")
        targets = np.asarray(self.target_angles_deg, dtype=float).reshape(-1)
        if np.any(np.abs(targets) > 90):
            raise ValueError("target angles must lie in [-90, 90] degrees")
        if self.sidelobe_weight < 0:
            raise ValueError("sidelobe_weight must be nonnegative")
        object.__setattr__(self, "desired", desired)
        object.__setattr__(self, "target_angles_deg", targets)

    @property
    def weights(self) -> np.ndarray:
        return self.grid.weights

    @property
    def num_targets(self) -> int:
        return self.target_angles_deg.size

    @property
    def desired_energy(self) -> float:
        """``sum_theta w(theta) p(theta)^2``; zero marks a degenerate pattern."""
        return float(np.sum(self.weights * self.desired**2))

    @property
    def degenerate(self) -> bool:
        return self.desired_energy == 0.0


def _alpha(P, spec: PatternSpec) -> float:
    s = spec.desired_energy
    if s == 0.0:
        return 0.0
    return float(np.sum(spec.weights * spec.desired * P) / s)


def _matching(alpha, P, spec: PatternSpec) -> float:
    return float(np.sum(spec.weights * (alpha * spec.desired - P) ** 2))


def _sidelobe(C) -> float:
    # ordered pairs i != j
    mag2 = np.abs(C) ** 2
    return float(mag2.sum() - np.trace(mag2))


def optimal_alpha(waveform: Waveform, spec: PatternSpec, geometry: ArrayGeometry) -> float:
    """Closed-form minimizer of ``J(alpha, x)`` over the scale ``alpha``.

    Returns 0 when the desired pattern carries no weighted energy; check
    ``spec.degenerate`` to detect that case.
    """
    _check(waveform, geometry)
    P = pattern_from_matrix(waveform.matrix, steering_matrix(geometry, spec.grid.angles))
    return _alpha(P, spec)


def matching_error(alpha: float, waveform: Waveform, spec: PatternSpec,
                   geometry: ArrayGeometry) -> float:
    """Weighted squared error ``sum w |alpha p - P(theta, x)|^2`` over the grid."""
    _check(waveform, geometry)
    P = pattern_from_matrix(waveform.matrix, steering_matrix(geometry, spec.grid.angles))
    return _matching(alpha, P, spec)


def sidelobe_energy(waveform: Waveform, spec: PatternSpec, geometry: ArrayGeometry) -> float:
    """Sum of ``|P_cc(theta_i, theta_j, x)|^2`` over ordered target pairs ``i != j``."""
    _check(waveform, geometry)
    if spec.num_targets < 2:
        return 0.0
    C = correlation_from_matrix(waveform.matrix, steering_matrix(geometry, spec.target_angles_deg))
    return _sidelobe(C)


def total_objective(waveform: Waveform, spec: PatternSpec, geometry: ArrayGeometry):
    """Return ``(f, alpha)`` with ``alpha`` the optimal scale for ``waveform``."""
    _check(waveform, geometry)
    S = waveform.matrix
    P = pattern_from_matrix(S, steering_matrix(geometry, spec.grid.angles))
    alpha = _alpha(P, spec)
    f = _matching(alpha, P, spec)
    if spec.sidelobe_weight > 0 and spec.num_targets >= 2:
        C = correlation_from_matrix(S, steering_matrix(geometry, spec.target_angles_deg))
        f += spec.sidelobe_weight * _sidelobe(C)
    return f, alpha


def mse_metric(runs, spec: PatternSpec, geometry: ArrayGeometry) -> float:
    """Sample mean of the matching error over ``(waveform, alpha)`` pairs."""
    runs = list(runs)
    if not runs:
        raise ValueError("mse_metric needs at least one run")
    return float(np.mean([matching_error(a, x, spec, geometry) for x, a in runs]))
