"""RIS reflection design for fixed precoders via ADMM.

The reflection vector ``theta`` is split into a relaxed copy (free modulus)
and a constrained copy ``theta_t`` (unit modulus or b-bit phases) tied by the
scaled dual ``nu``. Each iteration:

1. relaxed update: WMMSE/SCA surrogate of the secrecy rate in ``theta`` plus
   ``mu * ||theta - (theta_t + nu)||^2``, a convex QCQP;
2. constrained update: elementwise projection of ``theta - nu``;
3. dual update ``nu <- nu - theta + theta_t``.

The best feasible ``theta_t`` seen so far is what gets returned.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import qcqp
from .geometry import ChannelSet
from .precoder import (Links, aux_from_values, qos_constraint, sic_constraint, surrogate_quadratic,
                       true_feasible, true_objective)
from .secrecy import LN2, NoiseAndLimits, Precoders, RisVector


@dataclass(frozen=True)
class PhaseAlphabet:
    bits: int

    def __post_init__(self):
        if self.bits < 1:
            raise ValueError("need at least one bit")

    @property
    def levels(self) -> np.ndarray:
        L = 2 ** self.bits
        return -np.pi + 2 * np.pi * np.arange(L) / L

    def contains(self, v: np.ndarray, atol: float = 1e-12) -> bool:
        pts = np.exp(1j * self.levels)
        return bool(np.all(np.min(np.abs(v[:, None] - pts[None, :]), axis=1) <= atol))


@dataclass
class AdmmState:
    theta: np.ndarray
    theta_t: np.ndarray
    nu: np.ndarray
    mu: float = 1.0
    m: int = 0


@dataclass(frozen=True)
class CascadeCoefficients:
    """Vectors with h_u^H w = theta^T a_user etc."""

    user: np.ndarray
    user_jam: np.ndarray
    eve: np.ndarray
    eve_jam: np.ndarray


def cascade_coefficients(channels: ChannelSet, precoders: Precoders) -> CascadeCoefficients:
    Gw, Gj = channels.G @ precoders.w, channels.G @ precoders.w_jam
    hc, fc = channels.h.conj(), channels.f.conj()
    return CascadeCoefficients(hc * Gw, hc * Gj, fc * Gw, fc * Gj)


def theta_links(coef: CascadeCoefficients, limits: NoiseAndLimits, jamming: bool = True) -> Links:
    """Links over theta with noise powers normalized to one."""
    su, se = np.sqrt(limits.sigma2), np.sqrt(limits.sigma2_eve)
    if not jamming:
        return Links(coef.user.conj() / su, coef.eve.conj() / se)
    return Links(coef.user.conj() / su, coef.eve.conj() / se,
                 coef.user_jam.conj() / su, coef.eve_jam.conj() / se)


def project_unit_modulus(target: np.ndarray) -> np.ndarray:
    """Nearest unit-modulus vector to ``target = theta - nu``, elementwise.

    Entries already on the unit circle pass through unchanged; zero entries
    map to phase 0.
    """
    target = np.asarray(target, complex)
    mag = np.abs(target)
    out = np.ones_like(target)
    nz = mag > 0
    out[nz] = target[nz] / mag[nz]
    exact = mag == 1.0
    out[exact] = target[exact]
    return out


def discrete_line_search(target: np.ndarray, alphabet: PhaseAlphabet) -> np.ndarray:
    """Nearest alphabet point per element; ties go to the smaller phase."""
    pts = np.exp(1j * alphabet.levels)
    dist = np.abs(np.asarray(target, complex)[:, None] - pts[None, :]) ** 2
    # argmin returns the first (smallest-phase) minimizer on exact ties
    return pts[np.argmin(dist, axis=1)]


def dual_update(nu: np.ndarray, theta: np.ndarray, theta_t: np.ndarray) -> np.ndarray:
    # grouped so a zero residual leaves nu bit-identical
    return nu + (theta_t - theta)


def _curvature(Q: np.ndarray) -> float:
    # Q is a sum of a few PSD rank-one terms; its trace bounds the top
    # eigenvalue within a factor of the rank
    tr = float(np.trace(Q).real)
    return tr if tr > 0 else 1.0


def theta_update(state: AdmmState, links: Links, r_th: float, anchor: np.ndarray,
                 variant: str = "standard",
                 solver: qcqp.SolverSettings | None = None) -> tuple[np.ndarray, str]:
    """Relaxed update. ``mu`` is in units of the surrogate's total curvature."""
    v = links.values(anchor)
    aux = aux_from_values(v, links.noise_u, links.noise_e, variant)
    Q, c, const = surrogate_quadratic(links, aux)
    pen = state.mu * _curvature(Q)
    center = state.theta_t + state.nu
    n = len(center)
    Q = Q + pen * np.eye(n)
    c = c - 2 * pen * center
    const += pen * np.vdot(center, center).real
    cons = [qos_constraint(links, v, r_th)]
    if links.jamming:
        cons.append(sic_constraint(links, v))
    prob = qcqp.QcqpProblem(Q, c, const, cons, check_psd=False)
    rep = qcqp.solve(prob, solver, x0=anchor)
    if rep.solution is None:
        return anchor.copy(), rep.status
    return rep.solution, rep.status


@dataclass
class P3Settings:
    variant: str = "standard"
    jamming: bool = True
    eps_admm: float = 1e-4
    eps_bits: float = 1e-4
    max_iter: int = 200
    mu0: float = 0.01
    balance: float = 10.0
    max_extrapolation: float = 1024.0
    # stop when the best rate has gained less than eps_bits over this many iterations
    patience: int = 10
    # discrete mode: run the continuous ADMM first and start from its result
    warm_start: bool = True
    # discrete mode: common-phase offsets tried per projection (rate is rotation invariant)
    rotations: int = 8
    solver: qcqp.SolverSettings = field(default_factory=qcqp.SolverSettings)


def _offsets(mode, settings: P3Settings) -> np.ndarray:
    if not isinstance(mode, PhaseAlphabet) or settings.rotations <= 1:
        return np.zeros(1)
    step = 2 * np.pi / 2 ** mode.bits
    return step * np.arange(settings.rotations) / settings.rotations


def _admm(links: Links, r_th: float, project, offsets: np.ndarray, start: np.ndarray,
          relaxed: np.ndarray, settings: P3Settings) -> tuple[np.ndarray, dict]:
    best = start.copy()
    best_obj = true_objective(links, best)
    best_feasible = true_feasible(links, best, r_th)
    init_obj = best_obj
    state = AdmmState(theta=relaxed.copy(), theta_t=start.copy(), nu=np.zeros_like(start), mu=settings.mu0)
    trace = [best_obj / LN2]
    residuals, statuses = [], []
    rejected = 0
    prev_obj = best_obj
    t0 = time.perf_counter()

    def scan(base, step, nu):
        # extrapolate the relaxed move away from the anchor before projecting;
        # small relaxed moves otherwise never cross a quantization boundary.
        # Projections are cheap, so the whole geometric grid is scanned.
        out = (None, -np.inf, 0.0)
        g = 1.0
        while g <= settings.max_extrapolation:
            target = base + g * step - nu
            for c in offsets:
                rot = np.exp(1j * c)
                tt = project(rot * target)
                if true_feasible(links, tt, r_th):
                    ot = true_objective(links, tt)
                    if ot > out[1]:
                        out = (tt, ot, c)
            if not np.any(step):
                break
            g *= 2
        if out[0] is None:
            return project(base + step - nu), -np.inf, 0.0
        return out

    if np.any(relaxed != start):
        tt, ot, c = scan(relaxed, np.zeros_like(relaxed), state.nu)
        if np.isfinite(ot) and (ot > best_obj or not best_feasible):
            best, best_obj, best_feasible = tt, ot, True
            state.theta, state.theta_t = np.exp(1j * c) * relaxed, tt
            trace[0] = best_obj / LN2

    for m in range(settings.max_iter):
        theta, status = theta_update(state, links, r_th, best, settings.variant, settings.solver)
        statuses.append(status)
        if status == qcqp.INFEASIBLE:
            state.mu *= 2
            state.nu /= 2
        theta_t, obj, c = scan(best, theta - best, state.nu)
        if c:
            # keep the splitting consistent with the rotated constrained copy
            rot = np.exp(1j * c)
            theta, state.nu, state.theta_t = rot * theta, rot * state.nu, rot * state.theta_t
        nu = dual_update(state.nu, theta, theta_t)
        ok = np.isfinite(obj)
        if not ok:
            obj = true_objective(links, theta_t)
        if ok and (obj >= best_obj - 1e-9 or not best_feasible):
            best, best_obj, best_feasible = theta_t.copy(), obj, True
        else:
            rejected += 1
        primal = np.linalg.norm(theta - theta_t)
        dual = state.mu * np.linalg.norm(theta_t - state.theta_t)
        residuals.append(float(np.max(np.abs(theta - theta_t))))
        state.theta, state.theta_t, state.nu, state.m = theta, theta_t, nu, m + 1
        if primal > settings.balance * dual:
            state.mu *= 2
            state.nu = state.nu / 2
        elif dual > settings.balance * primal:
            state.mu /= 2
            state.nu = state.nu * 2
        trace.append(best_obj / LN2)
        change = abs(obj - prev_obj) / LN2
        prev_obj = obj
        if residuals[-1] < settings.eps_admm and change < settings.eps_bits:
            break
        if len(trace) > settings.patience and trace[-1] - trace[-1 - settings.patience] < settings.eps_bits:
            break
    diag = {"trace_bits": trace, "residuals": residuals, "statuses": statuses, "rejected": rejected,
            "iterations": state.m, "seconds": time.perf_counter() - t0, "final_mu": state.mu,
            "improved": best_obj > init_obj + 1e-12, "feasible": best_feasible}
    return best, diag


def solve_p3(channels: ChannelSet, precoders: Precoders, limits: NoiseAndLimits, init: RisVector,
             mode: str | PhaseAlphabet = "continuous",
             settings: P3Settings | None = None) -> tuple[RisVector, dict]:
    """ADMM over the reflection vector; returns the best feasible constrained copy.

    ``mode`` is ``"continuous"`` or a :class:`PhaseAlphabet` for b-bit phases.
    In discrete mode the continuous solution seeds the relaxed copy (when
    ``settings.warm_start``) and each projection also tries a few common
    phase offsets of its target.
    """
    settings = settings or P3Settings()
    links = theta_links(cascade_coefficients(channels, precoders), limits, settings.jamming)
    if isinstance(mode, PhaseAlphabet):
        project = lambda t: discrete_line_search(t, mode)  # noqa: E731
    elif mode == "continuous":
        project = project_unit_modulus
    else:
        raise ValueError(f"unknown phase mode {mode!r}")

    start = project(init.v)
    relaxed = start
    t0 = time.perf_counter()
    if isinstance(mode, PhaseAlphabet) and settings.warm_start:
        relaxed, _ = _admm(links, limits.r_th, project_unit_modulus, np.zeros(1),
                           project_unit_modulus(init.v), project_unit_modulus(init.v), settings)
    best, diag = _admm(links, limits.r_th, project, _offsets(mode, settings), start, relaxed, settings)
    diag["seconds"] = time.perf_counter() - t0
    return RisVector(best), diag
