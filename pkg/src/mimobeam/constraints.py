"""Waveform constraint sets and closed-form maximizers of ``Re(x^H y)``.

Every supported set keeps the total energy fixed at ``c_e^2``, which the
surrogate construction relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np

FEAS_ATOL = 1e-8


@dataclass(frozen=True)
class Energy:
    """``||x||_2^2 = c_e^2``."""

    c_e: float

    def __post_init__(self):
        if not self.c_e > 0:
            raise ValueError("c_e must be positive")

    def energy(self, mn: int) -> float:
        return self.c_e


@dataclass(frozen=True)
class ConstModulus:
    """``|x_l| = c_d`` for every entry, hence ``c_e = c_d sqrt(MN)``."""

    c_d: float

    def __post_init__(self):
        if not self.c_d > 0:
            raise ValueError("c_d must be positive")

    @classmethod
    def from_energy(cls, c_e: float, mn: int):
        return cls(c_e / np.sqrt(mn))

    def energy(self, mn: int) -> float:
        return self.c_d * np.sqrt(mn)


@dataclass(frozen=True)
class EnergyPar:
    """Fixed energy ``c_e^2`` with peak amplitude ``|x_l| <= c_p``."""

    c_e: float
    c_p: float

    def __post_init__(self):
        if not (self.c_e > 0 and self.c_p > 0):
            raise ValueError("c_e and c_p must be positive")
        if self.c_p > self.c_e * (1 + 1e-12):
            raise ValueError("c_p must not exceed c_e")

    @classmethod
    def from_par(cls, c_e: float, par: float, mn: int):
        """Cap the peak-to-average power ratio at ``par`` (1 <= par <= MN)."""
        return cls(c_e, c_e * np.sqrt(par / mn))

    def validate(self, mn: int):
        if self.c_p * np.sqrt(mn) < self.c_e * (1 - 1e-12):
            raise ValueError(
                f"infeasible PAR constraint: c_p*sqrt(MN) = {self.c_p * np.sqrt(mn)} < c_e = {self.c_e}"
            )

    def energy(self, mn: int) -> float:
        return self.c_e


@dataclass(frozen=True, eq=False)
class ModulusSimilarity:
    """Constant modulus ``c_d`` with ``|x_l - x_ref,l| <= c_eps`` elementwise."""

    c_d: float
    x_ref: np.ndarray
    c_eps: float

    def __post_init__(self):
        x_ref = np.asarray(self.x_ref, dtype=complex).reshape(-1)
        object.__setattr__(self, "x_ref", x_ref)
        if not self.c_d > 0:
            raise ValueError("c_d must be positive")
        if not np.allclose(np.abs(x_ref), self.c_d, rtol=0, atol=FEAS_ATOL):
            raise ValueError("x_ref must have constant modulus c_d")
        if not 0 <= self.c_eps <= 2 * self.c_d * (1 + 1e-12):
            raise ValueError("c_eps must lie in [0, 2 c_d]")

    @property
    def half_width(self) -> float:
        """Half-width of the feasible phase arc around ``arg(x_ref)``."""
        return float(np.arccos(np.clip(1 - self.c_eps**2 / (2 * self.c_d**2), -1.0, 1.0)))

    def energy(self, mn: int) -> float:
        return self.c_d * np.sqrt(mn)


ConstraintSpec = Union[Energy, ConstModulus, EnergyPar, ModulusSimilarity]


def _as_array(x):
    return np.asarray(getattr(x, "entries", x), dtype=complex).reshape(-1)


def solve_energy(y, c_e: float, prev=None) -> np.ndarray:
    """``c_e y / ||y||``; returns ``prev`` unchanged when ``y`` vanishes."""
    y = _as_array(y)
    ny = np.linalg.norm(y)
    if ny == 0:
        if prev is None:
            raise ValueError("y = 0 and no previous iterate to fall back on")
        return _as_array(prev).copy()
    return c_e * y / ny


def _phase(y, prev):
    ph = np.angle(y)
    zero = y == 0
    if np.any(zero):
        if prev is None:
            ph = np.where(zero, 0.0, ph)
        else:
            ph = np.where(zero, np.angle(_as_array(prev)), ph)
    return ph


def solve_modulus(y, c_d: float, prev=None) -> np.ndarray:
    """``c_d exp(j arg y)`` elementwise; zero entries keep the phase of ``prev``."""
    y = _as_array(y)
    return c_d * np.exp(1j * _phase(y, prev))


def par_magnitudes(w, c_e: float, c_p: float) -> np.ndarray:
    """Maximize ``sum m_l w_l`` subject to ``sum m_l^2 = c_e^2`` and ``0 <= m_l <= c_p``.

    Entries whose proportional share ``beta w_l`` would exceed the cap are
    fixed at ``c_p`` and the remaining energy is redistributed in proportion
    to ``w`` until nothing new clips.  Energy that cannot go anywhere useful
    (all remaining ``w_l`` zero) is spread evenly over those entries.
    """
    w = np.asarray(w, dtype=float)
    n = w.size
    if c_p * c_p * n <= c_e * c_e * (1 + 1e-12):
        return np.full(n, c_p)
    m = np.zeros(n)
    clipped = np.zeros(n, dtype=bool)
    for _ in range(n + 1):
        free = ~clipped
        rest = c_e**2 - c_p**2 * clipped.sum()
        wf = w[free]
        nw = np.linalg.norm(wf)
        if nw == 0:
            m[free] = np.sqrt(max(rest, 0.0) / free.sum())
            m[clipped] = c_p
            return m
        share = np.sqrt(max(rest, 0.0)) * wf / nw
        over = share > c_p
        if not over.any():
            m[free] = share
            m[clipped] = c_p
            return m
        idx = np.flatnonzero(free)[over]
        clipped[idx] = True
    raise RuntimeError("PAR clipping did not terminate")


def solve_energy_par(y, c_e: float, c_p: float, prev=None) -> np.ndarray:
    """Maximizer over ``||x|| = c_e``, ``|x_l| <= c_p``: phases of ``y``, clipped magnitudes."""
    y = _as_array(y)
    if c_p * np.sqrt(y.size) < c_e * (1 - 1e-12):
        raise ValueError("infeasible PAR constraint")
    return par_magnitudes(np.abs(y), c_e, c_p) * np.exp(1j * _phase(y, prev))


def _wrap(phi):
    return np.angle(np.exp(1j * phi))


def solve_modulus_similarity(y, c_d: float, x_ref, c_eps: float) -> np.ndarray:
    """Per-entry phase of ``y`` clamped to the arc ``|phi - arg x_ref| <= delta``.

    ``delta = arccos(1 - c_eps^2 / (2 c_d^2))`` is where the circle of radius
    ``c_d`` meets the ball of radius ``c_eps`` around ``x_ref``.  Zero
    entries of ``y`` fall back to ``x_ref``.
    """
    y = _as_array(y)
    x_ref = _as_array(x_ref)
    if c_eps <= 0:
        return x_ref.copy()
    delta = np.arccos(np.clip(1 - c_eps**2 / (2 * c_d**2), -1.0, 1.0))
    ref_ph = np.angle(x_ref)
    d = _wrap(np.angle(y) - ref_ph)
    d = np.clip(d, -delta, delta)
    out = c_d * np.exp(1j * (ref_ph + d))
    zero = y == 0
    if np.any(zero):
        out[zero] = x_ref[zero]
    return out


def solve_subproblem(y, constraint: ConstraintSpec, prev=None) -> np.ndarray:
    """Dispatch to the closed-form maximizer of ``Re(x^H y)`` for ``constraint``."""
    if isinstance(constraint, Energy):
        return solve_energy(y, constraint.c_e, prev)
    if isinstance(constraint, ConstModulus):
        return solve_modulus(y, constraint.c_d, prev)
    if isinstance(constraint, EnergyPar):
        return solve_energy_par(y, constraint.c_e, constraint.c_p, prev)
    if isinstance(constraint, ModulusSimilarity):
        return solve_modulus_similarity(y, constraint.c_d, constraint.x_ref, constraint.c_eps)
    raise TypeError(f"unsupported constraint {constraint!r}")


def par(x) -> float:
    """Peak-to-average power ratio ``max |x_l|^2 / (||x||^2 / MN)``."""
    x = _as_array(x)
    return float(np.max(np.abs(x) ** 2) / (np.vdot(x, x).real / x.size))


@dataclass
class FeasibilityReport:
    feasible: bool
    energy: float
    par: float
    max_violation: float
    detail: str = ""

    def __bool__(self):
        return self.feasible


def project_feasibility_check(x, constraint: ConstraintSpec, atol: float = FEAS_ATOL) -> FeasibilityReport:
    """Check ``x`` against ``constraint`` to absolute tolerance ``atol``."""
    x = _as_array(x)
    mn = x.size
    energy = float(np.vdot(x, x).real)
    mag = np.abs(x)
    checks = {"energy": abs(np.sqrt(energy) - constraint.energy(mn))}
    if isinstance(constraint, ConstModulus):
        checks["modulus"] = float(np.max(np.abs(mag - constraint.c_d)))
    elif isinstance(constraint, EnergyPar):
        checks["peak"] = max(0.0, float(mag.max() - constraint.c_p))
    elif isinstance(constraint, ModulusSimilarity):
        if constraint.x_ref.size != mn:
            return FeasibilityReport(False, energy, par(x), np.inf, "x_ref length mismatch")
        checks["modulus"] = float(np.max(np.abs(mag - constraint.c_d)))
        dist = np.abs(x - constraint.x_ref)
        checks["similarity"] = max(0.0, float(dist.max() - constraint.c_eps))
    worst = max(checks, key=checks.get)
    violation = checks[worst]
    ok = bool(violation <= atol)
    return FeasibilityReport(ok, energy, par(x) if energy > 0 else float("nan"), violation,
                             "" if ok else f"{worst} violated by {violation:.3e}")
