"""Phase labels, response diagnostics and transition detection.

Phases are the four open quadrants of ``(sign omega_b, sign Omega)`` at
``w > 0``. At ``Omega = 0`` the quadrants are separated by lines whose type
depends on ``w`` relative to ``|omega_b|``:

=========  ===========  ====================  ================================
omega_b    w            label                 ground state at Omega = 0
=========  ===========  ====================  ================================
> 0        < omega_b    L0                    beta = 0 (normal)
> 0        > omega_b    L12                   beta**2 = (1 - omega_b/w)/2
> 0        = omega_b    A                     critical point
< 0        < |omega_b|  L0prime               |beta| = 1 (fully inverted)
< 0        > |omega_b|  L34                   beta**2 = (1 + |omega_b|/w)/2
< 0        = |omega_b|  D                     critical point
=========  ===========  ====================  ================================
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidEpsilon, PathError
from .meanfield import (
    DEFAULT_OPTIONS,
    MeanFieldProblem,
    MeanFieldSolution,
    SolverOptions,
    energy_gradient_wrt_Omega,
    solve_ground_state,
)

#: Relative width of the Omega = 0 lines and the A/D points.
BOUNDARY_TOL = 1e-9
#: Finite-difference step for the response diagnostics, relative to scale.
DIAGNOSTIC_STEP = 1e-5


class PhaseLabel(str, enum.Enum):
    P1 = "P1"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    L0 = "L0"
    L12 = "L12"
    L0prime = "L0prime"
    L34 = "L34"
    A = "A"
    D = "D"
    Unclassified = "Unclassified"

    def __str__(self) -> str:
        return self.value

    @property
    def is_interior(self) -> bool:
        return self in INTERIOR_PHASES


INTERIOR_PHASES = frozenset({PhaseLabel.P1, PhaseLabel.P2, PhaseLabel.P3, PhaseLabel.P4})

#: Expected signs of (dE/dOmega, dM/dw, dM/dOmega) per interior phase.
RESPONSE_SIGNS = {
    PhaseLabel.P1: (-1, +1, +1),
    PhaseLabel.P2: (+1, +1, -1),
    PhaseLabel.P3: (-1, -1, -1),
    PhaseLabel.P4: (+1, -1, +1),
}

_S = math.sqrt(0.5)
#: Open beta interval occupied by each interior phase.
BETA_RANGES = {
    PhaseLabel.P1: (0.0, _S),
    PhaseLabel.P2: (-_S, 0.0),
    PhaseLabel.P3: (_S, 1.0),
    PhaseLabel.P4: (-1.0, -_S),
}
#: Open magnetization interval occupied by each interior phase.
M_RANGES = {
    PhaseLabel.P1: (-0.5, 0.0),
    PhaseLabel.P2: (-0.5, 0.0),
    PhaseLabel.P3: (0.0, 0.5),
    PhaseLabel.P4: (0.0, 0.5),
}


def classify(p: MeanFieldProblem, sol: MeanFieldSolution | None = None,
             tol: float = BOUNDARY_TOL) -> PhaseLabel:
    """Phase label of the point ``p``.

    ``tol`` is relative to the point's scale. The label depends only on the
    parameters; ``sol`` is accepted so callers can pass the solved state
    through, but is not needed.
    """
    scale = max(p.scale, 1e-300)
    eps = tol * scale
    if not p.w > eps or abs(p.omega_b) <= eps:
        return PhaseLabel.Unclassified
    positive = p.omega_b > 0
    if abs(p.Omega) <= eps:
        gap = p.w - abs(p.omega_b)
        if abs(gap) <= eps:
            return PhaseLabel.A if positive else PhaseLabel.D
        if gap < 0:
            return PhaseLabel.L0 if positive else PhaseLabel.L0prime
        return PhaseLabel.L12 if positive else PhaseLabel.L34
    if positive:
        return PhaseLabel.P1 if p.Omega > 0 else PhaseLabel.P2
    return PhaseLabel.P3 if p.Omega > 0 else PhaseLabel.P4


@dataclass(frozen=True)
class PhasePoint:
    problem: MeanFieldProblem
    solution: MeanFieldSolution
    label: PhaseLabel
    dM_dOmega: float
    dM_dw: float
    dE_dOmega: float

    def response_signs(self) -> tuple[int, int, int]:
        return tuple(int(np.sign(v)) for v in (self.dE_dOmega, self.dM_dw, self.dM_dOmega))


def _solve(omega_b, Omega, w, opts) -> MeanFieldSolution:
    return solve_ground_state(MeanFieldProblem(omega_b, Omega, w), opts)


def _derivative(f, x: float, h: float, forbidden: float | None = None) -> float:
    """Central difference of ``f`` at ``x``; one-sided second order if the
    stencil would straddle ``forbidden`` (a non-analytic point)."""
    if forbidden is not None and (x - h - forbidden) * (x + h - forbidden) <= 0.0:
        if x >= forbidden:
            return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h)
        return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h)
    return (f(x + h) - f(x - h)) / (2.0 * h)


def diagnose(p: MeanFieldProblem, opts: SolverOptions = DEFAULT_OPTIONS,
             step: float = DIAGNOSTIC_STEP, tol: float = BOUNDARY_TOL) -> PhasePoint:
    """Solve, classify and attach finite-difference response diagnostics."""
    sol = solve_ground_state(p, opts)
    h = step * max(p.scale, 1e-12)
    ob, Om, w = p.omega_b, p.Omega, p.w

    def mag_Omega(x):
        return _solve(ob, x, w, opts).magnetization

    def mag_w(x):
        return _solve(ob, Om, x, opts).magnetization

    def en_Omega(x):
        return _solve(ob, x, w, opts).energy

    return PhasePoint(
        problem=p,
        solution=sol,
        label=classify(p, sol, tol),
        dM_dOmega=_derivative(mag_Omega, Om, h, forbidden=0.0),
        dM_dw=_derivative(mag_w, w, h, forbidden=abs(ob)),
        dE_dOmega=_derivative(en_Omega, Om, h, forbidden=0.0),
    )


@dataclass(frozen=True)
class JumpReport:
    beta_plus: float
    beta_minus: float
    delta_beta: float
    delta_dE_dOmega: float
    energy_gap: float
    first_order: bool


def detect_jump(omega_b: float, w: float, epsilon: float | None = None, *,
                jump_threshold: float = 1e-4, continuity_threshold: float = 1e-8,
                slope_threshold: float = 1e-4,
                opts: SolverOptions = DEFAULT_OPTIONS) -> JumpReport:
    """Compare the ground states at ``Omega = +-epsilon``.

    The transition is first order when ``beta`` jumps and the energy stays
    continuous while its Omega-slope does not. ``delta_dE_dOmega`` is the
    drop of dE/dOmega from the negative to the positive side.

    The slope condition separates a genuine transition from the sign flip of
    ``beta`` at ``|beta| -> 1`` (the L0prime line), where both branches
    describe the same fully inverted state and dE/dOmega vanishes on both
    sides. ``continuity_threshold`` and ``slope_threshold`` are scaled by
    ``max(1, |omega_b|, |w|)``; ``jump_threshold`` is absolute.
    """
    scale = max(abs(omega_b), abs(w))
    if epsilon is None:
        epsilon = 1e-6 * scale
    if not epsilon > 0:
        raise InvalidEpsilon(f"epsilon must be positive, got {epsilon!r}")
    plus = _solve(omega_b, epsilon, w, opts)
    minus = _solve(omega_b, -epsilon, w, opts)
    delta_beta = plus.beta - minus.beta
    # E is concave in Omega, so the slope can only drop across Omega = 0
    delta_slope = energy_gradient_wrt_Omega(minus) - energy_gradient_wrt_Omega(plus)
    gap = abs(plus.energy - minus.energy)
    scale = max(scale, 1e-300)
    first_order = (abs(delta_beta) > jump_threshold
                   and gap <= continuity_threshold * max(1.0, scale)
                   and abs(delta_slope) > slope_threshold * max(1.0, scale))
    return JumpReport(plus.beta, minus.beta, delta_beta, delta_slope, gap, first_order)


PATH_COORDS = ("omega_b", "Omega", "w")


@dataclass(frozen=True)
class ParameterPath:
    """Straight path varying one coordinate, the other two held fixed."""

    coord: str
    start: float
    stop: float
    omega_b: float = 0.0
    Omega: float = 0.0
    w: float = 0.0

    def __post_init__(self):
        if self.coord not in PATH_COORDS:
            raise PathError(f"path must vary one of {PATH_COORDS}, got {self.coord!r}")
        if not (math.isfinite(self.start) and math.isfinite(self.stop)) or self.start == self.stop:
            raise PathError("path endpoints must be finite and distinct")

    def problems(self, n_points: int) -> tuple[np.ndarray, list[MeanFieldProblem]]:
        values = np.linspace(self.start, self.stop, n_points)
        base = {"omega_b": self.omega_b, "Omega": self.Omega, "w": self.w}
        probs = []
        for v in values:
            base[self.coord] = float(v)
            probs.append(MeanFieldProblem(**base))
        return values, probs


@dataclass(frozen=True)
class CriticalPoint:
    order: int
    location: float
    index: int
    magnitude: float


@dataclass
class TransitionScan:
    parameter: np.ndarray
    beta: np.ndarray
    energy: np.ndarray
    d2E: np.ndarray
    critical_points: list[CriticalPoint]

    def rows(self):
        return list(zip(self.parameter, self.beta, self.energy, self.d2E))


def _outlier_steps(steps: np.ndarray, threshold: float, factor: float = 10.0) -> np.ndarray:
    """Indices of steps that are both above ``threshold`` and far above the
    typical step size nearby."""
    n = len(steps)
    flagged = []
    for i in range(n):
        if steps[i] <= threshold:
            continue
        lo, hi = max(0, i - 4), min(n, i + 5)
        neighbours = np.concatenate([steps[lo:i], steps[i + 1:hi]])
        typical = np.median(neighbours) if len(neighbours) else 0.0
        if steps[i] > factor * typical:
            flagged.append(i)
    return np.asarray(flagged, dtype=int)


def _clusters(indices: np.ndarray, gap: int = 2) -> list[np.ndarray]:
    if len(indices) == 0:
        return []
    groups = [[indices[0]]]
    for i in indices[1:]:
        if i - groups[-1][-1] <= gap:
            groups[-1].append(i)
        else:
            groups.append([i])
    return [np.asarray(g) for g in groups]


def scan_transition(path: ParameterPath, n_points: int, *,
                    jump_threshold: float = 1e-2,
                    curvature_threshold: float = 0.05,
                    opts: SolverOptions = DEFAULT_OPTIONS) -> TransitionScan:
    """Solve along ``path`` and locate transitions.

    A first-order point is an isolated jump of ``beta`` between neighbouring
    samples. A second-order point is a step in the second finite difference
    of the energy (``curvature_threshold``, in units of 1/scale) with
    ``beta`` continuous. Locations are reported as the midpoint of the grid
    interval where the change happens, so they are accurate to one spacing.
    """
    if n_points < 16:
        raise PathError("n_points must be at least 16")
    s, probs = path.problems(n_points)
    sols = [solve_ground_state(p, opts) for p in probs]
    beta = np.array([x.beta for x in sols])
    E = np.array([x.energy for x in sols])
    h = s[1] - s[0]

    d2E = np.full(n_points, np.nan)
    d2E[1:-1] = (E[2:] - 2.0 * E[1:-1] + E[:-2]) / (h * h)

    scale = max(max(p.scale for p in probs), 1e-300)
    critical: list[CriticalPoint] = []

    beta_steps = np.abs(np.diff(beta))
    jumps = _outlier_steps(beta_steps, jump_threshold)
    jump_zone = set()
    for group in _clusters(jumps):
        i = int(group[np.argmax(beta_steps[group])])
        critical.append(CriticalPoint(1, 0.5 * (s[i] + s[i + 1]), i, float(beta_steps[i])))
        jump_zone.update(range(i - 2, i + 4))

    curv = d2E[1:-1]
    curv_steps = np.abs(np.diff(curv))
    kinks = [k for k in _outlier_steps(curv_steps, curvature_threshold / scale)
             if not jump_zone.intersection(range(k, k + 4))]
    for group in _clusters(np.asarray(kinks, dtype=int)):
        # curvature index k compares d2E[k+1] and d2E[k+2]
        lo, hi = int(group[0]), int(group[-1])
        left = curv[max(lo - 1, 0)]
        right = curv[min(hi + 2, len(curv) - 1)]
        mid = 0.5 * (lo + hi) + 1.5
        location = s[0] + mid * h
        critical.append(CriticalPoint(2, float(location), int(round(mid)), float(abs(right - left))))

    critical.sort(key=lambda c: c.location)
    return TransitionScan(s, beta, E, d2E, critical)
