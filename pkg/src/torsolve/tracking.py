"""Straight-line and parameter homotopy tracking with Newton correction.

H(t) = t*F + (1-t)*gamma*G for t running 0 -> 1, with an explicit Euler
predictor on the Davidenko system and at most three Newton corrector steps
per accepted t. gamma is a random unit-modulus twist of the start system;
it leaves V(G) unchanged while steering the path bundle away from the
discriminant for generic data.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import NoConvergenceError, SingularJacobianError
from .supports import SparseSystem, Support, SupportSystem
from .torus import TORUS_THRESHOLD, CompiledSystem, compile_system, stack_exponents

_DIVERGENCE_NORM = 1e8
_TRACK_TORUS_GUARD = 1e-12
_ENDGAME_T = 1.0 - 1e-6
_CORRECTOR_ITERS = 3
_STEP_GROWTH = 1.5
_GROW_AFTER = 4
_COND_LIMIT = 1e12
_STEP_TOL = 1e-8  # relative Newton-step size that counts as converged
_DEDUP_TOL = 1e-6


@dataclass(frozen=True)
class TrackerSettings:
    initial_step: float = 1e-2
    min_step: float = 1e-10
    max_step: float = 1e-1
    newton_tolerance: float = 1e-8
    max_newton_iters: int = 12
    max_steps: int = 4000
    success_residual: float = 1e-8

    def __post_init__(self):
        if not (0 < self.min_step <= self.initial_step <= self.max_step < 1):
            raise ValueError("need 0 < min_step <= initial_step <= max_step < 1")
        if self.newton_tolerance <= 0 or self.success_residual <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_newton_iters < 1 or self.max_steps < 1:
            raise ValueError("iteration limits must be positive")


@dataclass(frozen=True)
class PathFailure:
    reason: str  # step-underflow | divergence | left-torus | max-steps | no-convergence
    t: float
    point: np.ndarray | None = None


@dataclass
class SolutionSet:
    points: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    provenance: list = field(default_factory=list)

    def __len__(self):
        return len(self.points)

    def append(self, point, residual, origin=""):
        self.points.append(np.asarray(point, dtype=complex))
        self.residuals.append(float(residual))
        self.provenance.append(origin)

    def sort(self):
        order = sorted(range(len(self.points)), key=lambda i: sort_key(self.points[i]))
        self.points = [self.points[i] for i in order]
        self.residuals = [self.residuals[i] for i in order]
        self.provenance = [self.provenance[i] for i in order]


def sort_key(point) -> tuple:
    return tuple(v for z in point for v in (round(z.real, 9), round(z.imag, 9)))


def relative_distance(x, y) -> float:
    x = np.asarray(x)
    y = np.asarray(y)
    scale = max(1.0, float(np.max(np.abs(x))), float(np.max(np.abs(y))))
    return float(np.max(np.abs(x - y))) / scale


class Homotopy:
    """Convex combination of two coefficient vectors on one shared support.

    Start and target are aligned point-for-point on the union of their
    supports (absent monomials get zero coefficients), so a vertex-supported
    or total-degree start system embeds into the target's coefficient space.
    """

    def __init__(self, system: SupportSystem, start_coeffs, target_coeffs, gamma=1.0):
        self.system = system
        self.gamma = complex(gamma)
        if abs(abs(self.gamma) - 1.0) > 1e-9:
            raise ValueError("gamma must have unit modulus")
        sizes = [len(s) for s in system.supports]
        if [len(c) for c in start_coeffs] != sizes or [len(c) for c in target_coeffs] != sizes:
            raise ValueError("coefficient vectors must match the shared support")
        self.E, self.starts = stack_exponents(system.supports)
        self.cs = np.concatenate([np.asarray(c, dtype=complex) for c in start_coeffs])
        self.ct = np.concatenate([np.asarray(c, dtype=complex) for c in target_coeffs])

    @property
    def n(self) -> int:
        return self.system.n

    @classmethod
    def straight_line(cls, start: SparseSystem, target: SparseSystem, gamma=1.0) -> Homotopy:
        if start.n != target.n:
            raise ValueError("start and target must have the same shape")
        supports = []
        cs_rows = []
        ct_rows = []
        for i in range(start.n):
            s_pairs = dict(start.polynomial(i))
            t_pairs = dict(target.polynomial(i))
            union = sorted(set(s_pairs) | set(t_pairs))
            supports.append(Support(tuple(union)))
            cs_rows.append([s_pairs.get(p, 0.0 + 0.0j) for p in union])
            ct_rows.append([t_pairs.get(p, 0.0 + 0.0j) for p in union])
        return cls(SupportSystem(tuple(supports)), cs_rows, ct_rows, gamma)

    def with_gamma(self, gamma) -> Homotopy:
        h = object.__new__(Homotopy)
        h.system = self.system
        h.gamma = complex(gamma)
        h.E = self.E
        h.starts = self.starts
        h.cs = self.cs
        h.ct = self.ct
        return h

    def state(self, x: np.ndarray, t: float):
        """H(x, t), its x-Jacobian, dH/dt, and a term-magnitude scale."""
        with np.errstate(over="ignore", invalid="ignore"):
            mono = np.exp(self.E @ np.log(x))
            gcs = self.gamma * self.cs
            terms = (t * self.ct + (1.0 - t) * gcs) * mono
            values = np.add.reduceat(terms, self.starts)
            dt = np.add.reduceat((self.ct - gcs) * mono, self.starts)
            jac = np.add.reduceat(terms[:, None] * self.E, self.starts, axis=0) / x[None, :]
            scale = max(1.0, float(np.max(np.add.reduceat(np.abs(terms), self.starts))))
        return values, jac, dt, scale

    def evaluate(self, x: np.ndarray, t: float) -> np.ndarray:
        return self.state(x, t)[0]

    def target_system(self) -> CompiledSystem:
        compiled = object.__new__(CompiledSystem)
        compiled.n = self.n
        compiled.E = self.E
        compiled.starts = self.starts
        compiled.c = self.ct
        return compiled


def track_path(H: Homotopy, x0, settings: TrackerSettings | None = None):
    """Track one solution of gamma*G from t=0 to a solution of F at t=1.

    Returns the refined endpoint or a PathFailure naming what went wrong.
    Near t=1 the tracker hands off to plain Newton on the target; endgames
    for singular endpoints are out of scope.
    """
    settings = settings or TrackerSettings()
    x = np.asarray(x0, dtype=complex).copy()
    t = 0.0
    step = settings.initial_step
    streak = 0
    nsteps = 0

    while t < _ENDGAME_T:
        if nsteps >= settings.max_steps:
            return PathFailure("max-steps", t, x)
        nsteps += 1
        dt = min(step, 1.0 - t)
        try:
            values, jac, dvals, scale = H.state(x, t)
            tangent = np.linalg.solve(jac, -dvals)
            xp = x + dt * tangent
            ok, xn = _correct(H, xp, t + dt, settings)
        except (np.linalg.LinAlgError, FloatingPointError, OverflowError):
            ok = False
        if ok and np.all(np.isfinite(xn)):
            x = xn
            t = t + dt
            streak += 1
            if float(np.max(np.abs(x))) > _DIVERGENCE_NORM:
                return PathFailure("divergence", t, x)
            if float(np.min(np.abs(x))) < _TRACK_TORUS_GUARD:
                return PathFailure("left-torus", t, x)
            if streak >= _GROW_AFTER:
                step = min(step * _STEP_GROWTH, settings.max_step)
                streak = 0
        else:
            streak = 0
            step *= 0.5
            if step < settings.min_step:
                return PathFailure("step-underflow", t, x)

    try:
        refined, _ = _newton(H.target_system(), x, settings)
    except (SingularJacobianError, NoConvergenceError):
        return PathFailure("no-convergence", 1.0, x)
    if float(np.min(np.abs(refined))) <= TORUS_THRESHOLD:
        return PathFailure("left-torus", 1.0, refined)
    return refined


def _correct(H: Homotopy, x, t, settings):
    """At most three Newton steps on H(., t); success is a small residual
    relative to the term magnitudes."""
    for _ in range(_CORRECTOR_ITERS):
        values, jac, _, scale = H.state(x, t)
        if float(np.max(np.abs(values))) <= settings.newton_tolerance * scale:
            return True, x
        try:
            delta = np.linalg.solve(jac, -values)
        except np.linalg.LinAlgError:
            return False, x
        x = x + delta
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) < _TRACK_TORUS_GUARD):
            return False, x
    values, _, _, scale = H.state(x, t)
    return float(np.max(np.abs(values))) <= settings.newton_tolerance * scale, x


def _newton(compiled: CompiledSystem, x, settings: TrackerSettings):
    x = np.asarray(x, dtype=complex).copy()
    values = compiled.evaluate(x)
    res = float(np.max(np.abs(values)))
    if res <= 0.01 * settings.success_residual:
        return x, res
    step_small = False
    for it in range(settings.max_newton_iters):
        values, jac = compiled.eval_and_jacobian(x)
        res = float(np.max(np.abs(values)))
        if res <= settings.success_residual and step_small:
            return x, res
        if it == 0:
            cond = np.linalg.cond(jac)
            if not np.isfinite(cond) or cond > _COND_LIMIT:
                raise SingularJacobianError(f"Jacobian condition estimate {cond:.2e}")
        try:
            delta = np.linalg.solve(jac, -values)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobianError(str(exc)) from exc
        x = x + delta
        if not np.all(np.isfinite(x)):
            raise NoConvergenceError("Newton iterate left the finite range")
        step_small = float(np.max(np.abs(delta))) <= _STEP_TOL * (1.0 + float(np.max(np.abs(x))))
    res = compiled.residual(x)
    if res <= settings.success_residual and step_small:
        return x, res
    raise NoConvergenceError(f"residual {res:.2e} after {settings.max_newton_iters} iterations")


def newton_refine(F: SparseSystem | CompiledSystem, x, settings: TrackerSettings | None = None):
    """Refine x to a root of F; returns (point, max-norm residual).

    Raises SingularJacobianError for an ill-conditioned Jacobian and
    NoConvergenceError when quadratic convergence does not materialize.
    """
    settings = settings or TrackerSettings()
    compiled = F if isinstance(F, CompiledSystem) else compile_system(F)
    return _newton(compiled, x, settings)


def track_all(H: Homotopy, starts, settings: TrackerSettings | None = None, threads: int = 1):
    """Track every start point; deduplicate and sort the successes.

    Returns (SolutionSet, failures) where failures is a list of
    (start index, PathFailure). Duplicate endpoints are recorded as
    warnings in the failure list with reason "duplicate-endpoint".
    """
    settings = settings or TrackerSettings()
    points = starts.points if isinstance(starts, SolutionSet) else list(starts)
    if threads > 1 and len(points) >= 8:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda p: track_path(H, p, settings), points))
    else:
        outcomes = [track_path(H, p, settings) for p in points]

    target = H.target_system()
    solutions = SolutionSet()
    failures = []
    for i, out in enumerate(outcomes):
        if isinstance(out, PathFailure):
            failures.append((i, out))
            continue
        if any(relative_distance(kept, out) < _DEDUP_TOL for kept in solutions.points):
            failures.append((i, PathFailure("duplicate-endpoint", 1.0, out)))
            continue
        solutions.append(out, target.residual(out), origin=f"path {i}")
    solutions.sort()
    return solutions, failures
