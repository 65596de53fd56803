"""Outer majorization-minimization loop."""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .array_model import ArrayGeometry, Waveform
from .constraints import (
    ConstModulus,
    ConstraintSpec,
    Energy,
    EnergyPar,
    ModulusSimilarity,
    par,
    solve_subproblem,
)
from .majorizer import MajorizerParts, SurrogateWorkspace, assemble_y
from .objective import PatternSpec

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    RUNNING = "Running"
    CONVERGED = "Converged"
    MAX_ITERS = "MaxIters"
    DEGENERATE = "Degenerate"


class MonotonicityError(RuntimeError):
    """The objective increased beyond round-off; the surrogate bounds are wrong."""

    def __init__(self, message, diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass
class SolverOptions:
    max_iters: int = 1000
    rel_tol: float = 1e-8
    seed: int = 0
    record_trace: bool = True
    # "sphere" or "global" first-stage curvature; see majorizer module
    psi_bound: str = "sphere"
    monotone_slack: float = 1e-9

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.rel_tol < 0:
            raise ValueError("rel_tol must be >= 0")
        if self.psi_bound not in ("sphere", "global"):
            raise ValueError("psi_bound must be 'sphere' or 'global'")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")


@dataclass(eq=False)
class Problem:
    geometry: ArrayGeometry
    spec: PatternSpec
    constraint: ConstraintSpec
    num_samples: int

    def __post_init__(self):
        mn = self.mn
        if isinstance(self.constraint, EnergyPar):
            self.constraint.validate(mn)
        if isinstance(self.constraint, ModulusSimilarity) and self.constraint.x_ref.size != mn:
            raise ValueError(f"x_ref has length {self.constraint.x_ref.size}, expected MN = {mn}")

    @property
    def mn(self) -> int:
        return self.geometry.num_antennas * self.num_samples

    @property
    def c_e(self) -> float:
        return float(self.constraint.energy(self.mn))


@dataclass(eq=False)
class SolverState:
    iterate: Waveform
    alpha: float
    iteration: int = 0
    objective_trace: list = field(default_factory=list)
    psi_trace: list = field(default_factory=list)
    status: Status = Status.RUNNING
    objective: float = float("nan")


@dataclass(eq=False)
class RunReport:
    waveform: Waveform
    alpha: float
    objective: float
    matching_error: float
    sidelobe_energy: float
    profile: np.ndarray
    objective_trace: np.ndarray
    psi_trace: list
    par: float
    iterations: int
    status: Status
    wall_time: float
    seed: int


def initialize(constraint: ConstraintSpec, mn: int, seed: int = 0) -> np.ndarray:
    """Seeded random-phase constant-modulus start (``x_ref`` for the similarity set)."""
    if isinstance(constraint, ModulusSimilarity):
        return constraint.x_ref.copy()
    rng = np.random.default_rng(int(seed))
    phases = rng.uniform(0.0, 2 * np.pi, mn)
    if isinstance(constraint, ConstModulus):
        c = constraint.c_d
    elif isinstance(constraint, (Energy, EnergyPar)):
        c = constraint.c_e / np.sqrt(mn)
    else:
        raise TypeError(f"unsupported constraint {constraint!r}")
    return c * np.exp(1j * phases)


class MMSolver:
    """Runs the MM iteration for one :class:`Problem`.

    The workspace (steering matrices, first-stage curvatures) is built once
    and shared by every run, so seed sweeps only pay for it once.
    """

    def __init__(self, problem: Problem, options: Optional[SolverOptions] = None):
        self.problem = problem
        self.options = options or SolverOptions()
        spec = problem.spec
        self.workspace = SurrogateWorkspace(
            spec, problem.geometry, problem.num_samples,
            sphere=self.options.psi_bound == "sphere",
            include_sidelobe=spec.sidelobe_weight > 0,
        )

    def _objective(self, S):
        J, E, alpha, _ = self.workspace.evaluate(S)
        return J + self.problem.spec.sidelobe_weight * E, alpha

    def start(self, x0=None, seed=None) -> SolverState:
        p = self.problem
        if x0 is None:
            x0 = initialize(p.constraint, p.mn, self.options.seed if seed is None else seed)
        x = x0 if isinstance(x0, Waveform) else Waveform(x0, p.geometry.num_antennas)
        f, alpha = self._objective(x.matrix)
        state = SolverState(iterate=x, alpha=alpha, objective=f, objective_trace=[f])
        if p.spec.degenerate:
            state.status = Status.DEGENERATE
        return state

    def surrogate(self, state: SolverState) -> MajorizerParts:
        parts = self.workspace.parts(state.iterate.matrix)
        parts.y = assemble_y(state.iterate, parts, self.problem.spec.sidelobe_weight, self.problem.c_e)
        return parts

    def step(self, state: SolverState) -> SolverState:
        """One MM update; mutates and returns ``state``."""
        p = self.problem
        parts = self.surrogate(state)
        x_new = solve_subproblem(parts.y, p.constraint, prev=state.iterate.entries)
        new = Waveform(x_new, p.geometry.num_antennas)
        f_new, alpha_new = self._objective(new.matrix)
        f_old = state.objective
        if f_new > f_old + self.options.monotone_slack * (1 + abs(f_old)):
            raise MonotonicityError(
                f"objective increased from {f_old!r} to {f_new!r} at iteration {state.iteration}",
                {
                    "iteration": state.iteration,
                    "iterate": state.iterate.entries.copy(),
                    "candidate": x_new,
                    "parts": parts,
                    "f_old": f_old,
                    "f_new": f_new,
                },
            )
        state.iterate = new
        state.alpha = alpha_new
        state.objective = f_new
        state.iteration += 1
        if self.options.record_trace:
            state.objective_trace.append(f_new)
            state.psi_trace.append(
                {"psi_J2": parts.psi_J2, "lmax_BJ": parts.lmax_BJ, "psi_E2": parts.psi_E2}
            )
        if abs(f_old - f_new) / max(1.0, abs(f_old)) < self.options.rel_tol:
            state.status = Status.CONVERGED
        elif state.iteration >= self.options.max_iters:
            state.status = Status.MAX_ITERS
        return state

    def run(self, x0=None, callback: Optional[Callable[[SolverState], None]] = None, seed=None):
        """Iterate to convergence; returns ``(state, report)``.

        ``seed`` overrides ``options.seed`` for the random start so that one
        solver can serve a whole seed sweep.
        """
        seed = self.options.seed if seed is None else int(seed)
        t0 = time.perf_counter()
        state = self.start(x0, seed)
        if callback is not None:
            callback(state)
        while state.status is Status.RUNNING:
            self.step(state)
            if callback is not None:
                callback(state)
        elapsed = time.perf_counter() - t0
        log.info("run seed=%d status=%s iterations=%d f=%.6g time=%.3fs",
                 seed, state.status.value, state.iteration, state.objective, elapsed)
        return state, self.report(state, elapsed, seed)

    def report(self, state: SolverState, wall_time: float = float("nan"), seed=None) -> RunReport:
        p = self.problem
        J, E, alpha, P = self.workspace.evaluate(state.iterate.matrix)
        return RunReport(
            waveform=state.iterate,
            alpha=alpha,
            objective=state.objective,
            matching_error=J,
            sidelobe_energy=E,
            profile=P,
            objective_trace=np.asarray(state.objective_trace),
            psi_trace=state.psi_trace,
            par=par(state.iterate.entries),
            iterations=state.iteration,
            status=state.status,
            wall_time=wall_time,
            seed=int(self.options.seed if seed is None else seed),
        )


def run(geometry: ArrayGeometry, spec: PatternSpec, constraint: ConstraintSpec,
        num_samples: int, options: Optional[SolverOptions] = None, x0=None, callback=None):
    """Convenience wrapper: build the problem and solve it once."""
    problem = Problem(geometry, spec, constraint, num_samples)
    return MMSolver(problem, options).run(x0, callback)

