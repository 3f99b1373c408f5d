"""Small dense convex QCQP solver for complex variables.

Problems have the form::

    minimize    z^H Q z + Re{c^H z} + const
    subject to  Re{a^H z} >= b                    (LinearConstraint)
                z^H P z <= Re{a^H z} + b          (QuadraticConstraint)
                ||z||^2 <= ball                   (optional)

with Q, P Hermitian PSD. Complex vectors are embedded as real vectors
``[Re z; Im z]`` and the problem is solved by a primal-dual interior-point
method on the smooth convex inequalities, after an optional phase-I
slack minimization to locate a strictly feasible start.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

OPTIMAL = "optimal"
MAX_ITER = "max_iter"
INFEASIBLE = "infeasible"


def to_real(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, complex)
    return np.concatenate([z.real, z.imag])


def to_complex(x: np.ndarray) -> np.ndarray:
    n = len(x) // 2
    return x[:n] + 1j * x[n:]


def real_embed(A: np.ndarray) -> np.ndarray:
    """Symmetric real form of a Hermitian matrix: z^H A z = x^T R x."""
    A = np.asarray(A, complex)
    return np.block([[A.real, -A.imag], [A.imag, A.real]])


def is_psd(A: np.ndarray, rel_floor: float = 1e-9) -> bool:
    S = (A + A.conj().T) / 2
    scale = np.linalg.norm(S, 2) if S.size <= 4096 else np.linalg.norm(S)
    if scale == 0:
        return True
    try:
        np.linalg.cholesky(S + rel_floor * scale * np.eye(len(S)))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class LinearConstraint:
    """Re{a^H z} >= b."""

    a: np.ndarray
    b: float


@dataclass(frozen=True)
class QuadraticConstraint:
    """z^H P z <= Re{a^H z} + b, with P Hermitian PSD."""

    P: np.ndarray
    a: np.ndarray
    b: float


class NotConvexError(ValueError):
    pass


@dataclass
class QcqpProblem:
    Q: np.ndarray
    c: np.ndarray
    const: float = 0.0
    constraints: list = field(default_factory=list)
    ball: float | None = None
    check_psd: bool = True

    def __post_init__(self):
        self.Q = np.asarray(self.Q, complex)
        self.c = np.asarray(self.c, complex)
        n = self.n
        if self.Q.shape != (n, n):
            raise ValueError(f"Q has shape {self.Q.shape}, expected ({n}, {n})")
        if self.check_psd:
            if not is_psd(self.Q):
                raise NotConvexError("objective quadratic form is not PSD")
            for k, con in enumerate(self.constraints):
                if isinstance(con, QuadraticConstraint) and not is_psd(con.P):
                    raise NotConvexError(f"constraint {k} quadratic form is not PSD")
        if self.ball is not None and self.ball <= 0:
            raise ValueError("ball radius must be positive")

    @property
    def n(self) -> int:
        return len(self.c)

    def objective(self, z: np.ndarray) -> float:
        return float(np.vdot(z, self.Q @ z).real + np.vdot(self.c, z).real + self.const)

    def constraint_values(self, z: np.ndarray) -> np.ndarray:
        """Values g_k(z) with the convention g_k <= 0 when satisfied (unscaled)."""
        out = []
        for con in self.constraints:
            if isinstance(con, LinearConstraint):
                out.append(con.b - np.vdot(con.a, z).real)
            else:
                out.append(np.vdot(z, con.P @ z).real - np.vdot(con.a, z).real - con.b)
        if self.ball is not None:
            out.append(np.vdot(z, z).real - self.ball)
        return np.array(out, float)

    def max_violation(self, z: np.ndarray) -> float:
        """Largest constraint value on the normalized scale (<= 0 when feasible)."""
        rp = _RealProblem.from_qcqp(self)
        f = rp.fvals(to_real(z))
        return float(f.max()) if len(f) else -np.inf


@dataclass
class SolverSettings:
    eps_kkt: float = 1e-7
    eps_gap: float = 1e-7
    max_iter: int = 100
    mu: float = 10.0
    alpha: float = 0.01
    beta: float = 0.5
    interior_margin: float = 1e-7
    try_unconstrained: bool = True


@dataclass
class SolverReport:
    solution: np.ndarray | None
    objective: float
    kkt_residual: float
    iterations: int
    status: str
    duals: np.ndarray | None = None

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


class _RealProblem:
    """f0 = x'Ax + g'x + k; f_i = x'B_i x + d_i'x + e_i <= 0, all scaled."""

    def __init__(self, A, g, k, cons):
        self.A, self.g, self.k = A, g, k
        self.cons = cons  # list of (B or None, d, e)

    @classmethod
    def from_qcqp(cls, prob: QcqpProblem) -> "_RealProblem":
        A = real_embed(prob.Q)
        g = to_real(prob.c)
        n = 2 * prob.n
        cons = []
        for con in prob.constraints:
            if isinstance(con, LinearConstraint):
                B, d, e = None, -to_real(con.a), float(con.b)
            else:
                B, d, e = real_embed(con.P), -to_real(con.a), -float(con.b)
            cons.append(cls._normalized(B, d, e))
        if prob.ball is not None:
            cons.append((np.eye(n), np.zeros(n), -float(prob.ball)))
        obj_scale = max(np.abs(A).max(initial=0.0), np.abs(g).max(initial=0.0))
        obj_scale = obj_scale if obj_scale > 0 else 1.0
        rp = cls(A / obj_scale, g / obj_scale, prob.const / obj_scale, cons)
        rp.obj_scale = obj_scale
        return rp

    @staticmethod
    def _normalized(B, d, e):
        s = max(np.abs(d).max(initial=0.0), 0.0 if B is None else np.abs(B).max(initial=0.0))
        if s == 0:
            s = max(abs(e), 1.0)
        return (None if B is None else B / s, d / s, e / s)

    @property
    def m(self) -> int:
        return len(self.cons)

    def f0(self, x):
        return x @ self.A @ x + self.g @ x + self.k

    def grad0(self, x):
        return 2 * self.A @ x + self.g

    def fvals(self, x):
        return np.array([(0.0 if B is None else x @ B @ x) + d @ x + e for B, d, e in self.cons])

    def fgrads(self, x):
        n = len(x)
        if not self.cons:
            return np.zeros((0, n))
        return np.array([(d if B is None else 2 * B @ x + d) for B, d, e in self.cons])

    def hess_lagrangian(self, lam):
        H = 2 * self.A.copy()
        for li, (B, d, e) in zip(lam, self.cons):
            if B is not None:
                H += 2 * li * B
        return H


def _solve_spd(H, rhs):
    try:
        return sla.cho_solve(sla.cho_factor(H, check_finite=False), rhs, check_finite=False)
    except (np.linalg.LinAlgError, ValueError):
        n = len(H)
        reg = 1e-12 * max(np.abs(H).max(), 1.0)
        try:
            return np.linalg.solve(H + reg * np.eye(n), rhs)
        except np.linalg.LinAlgError:
            return np.linalg.lstsq(H, rhs, rcond=None)[0]


def _primal_dual(rp: _RealProblem, x, settings: SolverSettings, stop=None):
    """Primal-dual interior point from a strictly feasible x.

    Returns (x, lam, iterations, status, kkt_residual). ``stop(x)`` may end
    the iteration early (used by phase I).
    """
    m = rp.m
    f = rp.fvals(x)
    lam = np.full(m, 1.0) / np.maximum(-f, 1e-12) / max(m, 1)
    res = np.inf
    for it in range(1, settings.max_iter + 1):
        if stop is not None and stop(x):
            return x, lam, it - 1, OPTIMAL, res
        Df = rp.fgrads(x)
        eta = -f @ lam
        t = settings.mu * m / eta
        r_dual = rp.grad0(x) + Df.T @ lam
        r_cent = -lam * f - 1.0 / t
        res = max(np.linalg.norm(r_dual), eta)
        if np.linalg.norm(r_dual) <= settings.eps_kkt and eta <= settings.eps_gap:
            return x, lam, it - 1, OPTIMAL, res
        w = lam / -f
        H = rp.hess_lagrangian(lam) + (Df.T * w) @ Df
        rhs = -r_dual - Df.T @ (r_cent / f)
        dx = _solve_spd(H, rhs)
        dlam = (r_cent - lam * (Df @ dx)) / f

        neg = dlam < 0
        s = min(1.0, float(np.min(-lam[neg] / dlam[neg]))) if np.any(neg) else 1.0
        s *= 0.99
        norm_rt = np.linalg.norm(np.concatenate([r_dual, r_cent]))
        for _ in range(60):
            xn = x + s * dx
            fn = rp.fvals(xn)
            if np.all(fn < 0):
                break
            s *= settings.beta
        for _ in range(60):
            xn = x + s * dx
            ln = lam + s * dlam
            fn = rp.fvals(xn)
            rdn = rp.grad0(xn) + rp.fgrads(xn).T @ ln
            rcn = -ln * fn - 1.0 / t
            if np.all(fn < 0) and np.linalg.norm(np.concatenate([rdn, rcn])) <= (1 - settings.alpha * s) * norm_rt:
                break
            s *= settings.beta
        else:
            # no acceptable step; report where we are
            return x, lam, it, MAX_ITER, res
        x, lam, f = xn, ln, fn
    Df = rp.fgrads(x)
    res = max(np.linalg.norm(rp.grad0(x) + Df.T @ lam), -f @ lam)
    status = OPTIMAL if res <= max(settings.eps_kkt, settings.eps_gap) else MAX_ITER
    return x, lam, settings.max_iter, status, res


def _phase_one(rp: _RealProblem, x0: np.ndarray, settings: SolverSettings):
    """Minimize the common slack s subject to f_i(x) <= s and s >= -1.

    Returns (x, iterations) with x strictly feasible, or (None, iterations).
    """
    n = len(x0)
    margin = settings.interior_margin
    f0 = rp.fvals(x0)
    s0 = max(f0.max() + 1.0, -0.5)
    reg = 1e-8
    A = np.zeros((n + 1, n + 1))
    A[:n, :n] = reg * np.eye(n)
    g = np.zeros(n + 1)
    g[:n] = -2 * reg * x0
    g[n] = 1.0
    cons = []
    for B, d, e in rp.cons:
        Bp = None
        if B is not None:
            Bp = np.zeros((n + 1, n + 1))
            Bp[:n, :n] = B
        cons.append((Bp, np.append(d, -1.0), e))
    lower = np.zeros(n + 1)
    lower[n] = -1.0
    cons.append((None, lower, -1.0))
    aug = _RealProblem(A, g, reg * x0 @ x0, cons)

    def done(y):
        return rp.fvals(y[:n]).max() < -margin

    y, _, iters, status, _ = _primal_dual(aug, np.append(x0, s0), settings, stop=done)
    if rp.fvals(y[:n]).max() < -margin:
        return y[:n], iters
    return None, iters


def feasibility_phase(problem: QcqpProblem, x0: np.ndarray | None = None,
                      settings: SolverSettings | None = None) -> np.ndarray | None:
    """Strictly feasible complex point, or None when the problem is infeasible."""
    settings = settings or SolverSettings()
    rp = _RealProblem.from_qcqp(problem)
    x = to_real(np.zeros(problem.n) if x0 is None else x0)
    if rp.m == 0 or rp.fvals(x).max() < -settings.interior_margin:
        return to_complex(x)
    x, _ = _phase_one(rp, x, settings)
    return None if x is None else to_complex(x)


def solve(problem: QcqpProblem, settings: SolverSettings | None = None,
          x0: np.ndarray | None = None) -> SolverReport:
    """Minimize ``problem``; ``x0`` is an optional (ideally feasible) start."""
    settings = settings or SolverSettings()
    rp = _RealProblem.from_qcqp(problem)
    n = 2 * problem.n

    if settings.try_unconstrained:
        try:
            cf = sla.cho_factor(2 * rp.A, check_finite=False)
            xu = sla.cho_solve(cf, -rp.g, check_finite=False)
        except (np.linalg.LinAlgError, ValueError):
            xu = None
        if xu is not None and (rp.m == 0 or rp.fvals(xu).max() <= 0):
            res = float(np.linalg.norm(rp.grad0(xu)))
            z = to_complex(xu)
            return SolverReport(z, problem.objective(z), res, 0, OPTIMAL, np.zeros(rp.m))

    x = to_real(np.zeros(problem.n) if x0 is None else x0)
    if rp.m == 0:
        x = _solve_spd(2 * rp.A, -rp.g)
        z = to_complex(x)
        return SolverReport(z, problem.objective(z), float(np.linalg.norm(rp.grad0(x))), 1, OPTIMAL,
                            np.zeros(0))
    iters0 = 0
    if rp.fvals(x).max() >= -settings.interior_margin:
        x, iters0 = _phase_one(rp, x, settings)
        if x is None:
            return SolverReport(None, np.inf, np.inf, iters0, INFEASIBLE)
    x, lam, iters, status, res = _primal_dual(rp, x, settings)
    z = to_complex(x)
    return SolverReport(z, problem.objective(z), float(res), iters0 + iters, status, lam)
