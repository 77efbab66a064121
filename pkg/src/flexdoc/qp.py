"""Deterministic convex quadratic programming.

Solves ``min 0.5 z'Pz + q'z`` subject to ``Az = b`` and ``Gz <= h`` with a
primal active-set method. The layout problems this serves are small (tens
of variables) but numerically nasty: P is only positive semidefinite, with
exact zero curvature along slack directions, and the aspect-ratio term
spreads eigenvalues over many orders of magnitude. First-order projected
methods stall on such spectra; the active-set method solves each working
subproblem exactly and terminates on multiplier signs instead.

Determinism contract: identical inputs produce identical iterates. All
tie-breaks (blocking constraint, multiplier release) resolve to the lowest
constraint index, and weakly active constraints are never released, so
zero-curvature directions keep whatever value the starting point gave
them. Callers exploit that by passing a canonical feasible start.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import linprog

# Working-set drop threshold: multipliers above -RELEASE_TOL count as
# nonnegative, so weakly active constraints stay put.
RELEASE_TOL = 1e-7
STEP_TOL = 1e-10


@dataclass(frozen=True)
class QuadraticProgram:
    """Matrices for one constrained quadratic minimization."""

    P: np.ndarray
    q: np.ndarray
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self) -> None:
        n = self.q.shape[0]
        if self.P.shape != (n, n):
            raise ValueError("P must be square and match q")
        if self.A.shape[1] != n or self.G.shape[1] != n:
            raise ValueError("constraint column count must match q")
        if self.A.shape[0] != self.b.shape[0]:
            raise ValueError("A and b row counts differ")
        if self.G.shape[0] != self.h.shape[0]:
            raise ValueError("G and h row counts differ")

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def value(self, z: np.ndarray) -> float:
        return float(0.5 * z @ self.P @ z + self.q @ z)

    def residuals(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        # row counts, not .size: a fully-pinned candidate can have zero
        # variables yet constant rows that decide feasibility
        eq = self.A @ z - self.b if self.A.shape[0] else np.zeros(0)
        ineq = self.G @ z - self.h if self.G.shape[0] else np.zeros(0)
        return eq, ineq

    def is_feasible(self, z: np.ndarray, tol: float = 1e-6) -> bool:
        eq, ineq = self.residuals(z)
        ok_eq = bool(np.all(np.abs(eq) <= tol)) if eq.size else True
        ok_ineq = bool(np.all(ineq <= tol)) if ineq.size else True
        return ok_eq and ok_ineq


@dataclass(frozen=True)
class QPResult:
    z: np.ndarray
    value: float
    iterations: int
    status: str  # "optimal" | "iteration-cap"
    active: tuple[int, ...] = field(default=())


def feasible_point(program: QuadraticProgram) -> Optional[np.ndarray]:
    """Phase-1 LP: any point satisfying the constraints, or None."""
    n = program.n
    if n == 0:
        empty = np.zeros(0)
        return empty if program.is_feasible(empty) else None
    result = linprog(
        c=np.zeros(n),
        A_ub=program.G if program.G.size else None,
        b_ub=program.h if program.G.size else None,
        A_eq=program.A if program.A.size else None,
        b_eq=program.b if program.A.size else None,
        bounds=[(None, None)] * n,
        method="highs",
    )
    if not result.success:
        return None
    return np.asarray(result.x, dtype=float)


def solve_qp(program: QuadraticProgram, z0: np.ndarray, *,
             max_iterations: int = 500) -> QPResult:
    """Minimize from a feasible start; raises ValueError if z0 is not."""
    if not program.is_feasible(z0, tol=1e-6):
        raise ValueError("starting point violates constraints")
    z = np.array(z0, dtype=float)
    n = program.n
    scale = max(1.0, float(np.abs(program.P).max(initial=0.0)),
                float(np.abs(program.q).max(initial=0.0)))
    # Tiny ridge keeps the KKT system nonsingular along zero-curvature
    # directions; the reported value always uses the exact P.
    ridge = 1e-10 * scale
    P_reg = program.P + ridge * np.eye(n)

    working: list[int] = []
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        g = program.P @ z + program.q
        rows = [program.A] if program.A.size else []
        rows += [program.G[working]] if working else []
        C = np.vstack(rows) if rows else np.zeros((0, n))
        m = C.shape[0]
        kkt = np.zeros((n + m, n + m))
        kkt[:n, :n] = P_reg
        if m:
            kkt[:n, n:] = C.T
            kkt[n:, :n] = C
        rhs = np.concatenate([-g, np.zeros(m)])
        try:
            sol = np.linalg.solve(kkt, rhs)
        except np.linalg.LinAlgError:
            sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0]
        p = sol[:n]

        if float(np.abs(p).max(initial=0.0)) <= STEP_TOL * max(1.0, float(np.abs(z).max(initial=0.0))):
            if not working:
                return QPResult(z, program.value(z), iterations, "optimal",
                                tuple(working))
            lam = sol[n + program.A.shape[0]:]
            worst = int(np.argmin(lam))
            if lam[worst] >= -RELEASE_TOL * scale:
                return QPResult(z, program.value(z), iterations, "optimal",
                                tuple(working))
            working.pop(worst)
            continue

        # Step length: clip at the first blocking inactive constraint.
        alpha = 1.0
        blocking = -1
        if program.G.size:
            Gp = program.G @ p
            slack = program.h - program.G @ z
            for i in range(program.G.shape[0]):
                if i in working or Gp[i] <= STEP_TOL:
                    continue
                room = slack[i] / Gp[i]
                if room < alpha - 1e-12:
                    alpha = max(room, 0.0)
                    blocking = i
        z = z + alpha * p
        if blocking >= 0:
            working.append(blocking)
            working.sort()

    return QPResult(z, program.value(z), iterations, "iteration-cap",
                    tuple(working))
