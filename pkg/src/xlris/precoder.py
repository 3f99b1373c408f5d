"""Precoder design for fixed RIS phases: WMMSE surrogate + SCA constraints.

Everything below the public wrappers works on *links*: scalar received
amplitudes ``l = g^H z`` that are linear in some complex decision vector
``z``. For the precoder step ``z = [w; w_jam]``; the RIS step reuses the same
helpers with ``z = theta``. Four links matter:

    user      user <- information beam      (signal at the user)
    user_jam  user <- jamming beam          (cancelled by SIC)
    eve       eve  <- information beam      (leakage)
    eve_jam   eve  <- jamming beam          (interference at eve)

Two forms of the eavesdropper surrogate are available:

``"verbatim"``
    ``rho_e F_e - ln rho_e`` with the phase-rotated equaliser
    ``u_e = j l_eve / (|l_eve_jam|^2 + s_e)`` as commonly printed for this
    problem. It is not a majorizer of the eavesdropper rate, so progress
    relies on the true-objective guard in :func:`solve_p2`.
``"standard"``
    WMMSE on ``ln(1 + |l_eve_jam|^2 / s_e)`` plus a first-order upper bound
    of the concave ``ln(|l_eve|^2 + |l_eve_jam|^2 + s_e)``. The sum is a
    majorizer of ``-(R_u - R_e)`` (up to the constant 2), so each convex
    step cannot decrease the secrecy rate.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import qcqp
from .geometry import ChannelSet
from .secrecy import (LN2, CascadedChannels, NoiseAndLimits, Precoders, RisVector, cascade,
                      check_constraints)

RHO_MIN, RHO_MAX = 1e-6, 1e6
VARIANTS = ("standard", "verbatim")


class InfeasibleError(RuntimeError):
    """No precoder meets the QoS/SIC constraints under the power budget."""


@dataclass(frozen=True)
class WmmseAux:
    u_u: complex
    rho_u: float
    u_e: complex
    rho_e: float
    variant: str = "verbatim"
    # standard variant only: anchor value of |l_eve|^2 + |l_eve_jam|^2 + s_e
    eve_total: float | None = None
    guarded: bool = False


@dataclass(frozen=True)
class ScaAnchor:
    w: np.ndarray
    w_jam: np.ndarray


@dataclass
class Links:
    """Link vectors g (``l = g^H z``) and noise powers. Absent links are None."""

    user: np.ndarray
    eve: np.ndarray
    user_jam: np.ndarray | None = None
    eve_jam: np.ndarray | None = None
    noise_u: float = 1.0
    noise_e: float = 1.0

    @property
    def jamming(self) -> bool:
        return self.user_jam is not None

    def values(self, z: np.ndarray) -> dict:
        out = {"user": np.vdot(self.user, z), "eve": np.vdot(self.eve, z)}
        out["user_jam"] = np.vdot(self.user_jam, z) if self.jamming else 0j
        out["eve_jam"] = np.vdot(self.eve_jam, z) if self.jamming else 0j
        return out


def true_objective(links: Links, z: np.ndarray) -> float:
    """R_u - R_e in nats (unclamped)."""
    v = links.values(z)
    r_u = np.log1p(abs(v["user"]) ** 2 / links.noise_u)
    r_e = np.log1p(abs(v["eve"]) ** 2 / (abs(v["eve_jam"]) ** 2 + links.noise_e))
    return float(r_u - r_e)


def _guard_rho(rho) -> tuple[float, bool]:
    rho = complex(rho)
    # rho is real in exact arithmetic; drop roundoff imaginary part
    val = rho.real
    if not np.isfinite(val) or not np.isfinite(rho.imag):
        return RHO_MAX, True
    if val <= 0:
        return RHO_MIN, True
    return val, False


def aux_from_values(v: dict, noise_u: float, noise_e: float, variant: str = "verbatim") -> WmmseAux:
    if variant not in VARIANTS:
        raise ValueError(f"unknown WMMSE variant {variant!r}")
    lu, le, lje = v["user"], v["eve"], v["eve_jam"]
    u_u = lu / (abs(lu) ** 2 + noise_u)
    rho_u, g1 = _guard_rho(1.0 / (1.0 - np.conj(u_u) * lu))
    if variant == "verbatim":
        u_e = 1j * le / (abs(lje) ** 2 + noise_e)
        rho_e, g2 = _guard_rho(1.0 / (1.0 - np.conj(u_e) * 1j * le))
        return WmmseAux(u_u, rho_u, u_e, rho_e, variant, None, g1 or g2)
    u_e = lje / (abs(lje) ** 2 + noise_e)
    rho_e, g2 = _guard_rho(1.0 / (1.0 - np.conj(u_e) * lje))
    total = abs(le) ** 2 + abs(lje) ** 2 + noise_e
    return WmmseAux(u_u, rho_u, u_e, rho_e, variant, float(total), g1 or g2)


def surrogate_value(v: dict, aux: WmmseAux, noise_u: float, noise_e: float) -> float:
    lu, le, lje = v["user"], v["eve"], v["eve_jam"]
    F_u = abs(aux.u_u) ** 2 * (abs(lu) ** 2 + noise_u) - 2 * np.real(np.conj(aux.u_u) * lu) + 1
    g_u = aux.rho_u * F_u - np.log(aux.rho_u)
    if aux.variant == "verbatim":
        F_e = (abs(aux.u_e) ** 2 * (abs(le) ** 2 + abs(lje) ** 2 + noise_e)
               - 2 * np.real(1j * np.conj(aux.u_e) * le) + 1)
        return float(g_u + aux.rho_e * F_e - np.log(aux.rho_e))
    F_j = abs(aux.u_e) ** 2 * (abs(lje) ** 2 + noise_e) - 2 * np.real(np.conj(aux.u_e) * lje) + 1
    total = abs(le) ** 2 + abs(lje) ** 2 + noise_e
    upper = np.log(aux.eve_total) + total / aux.eve_total - 1
    return float(g_u + aux.rho_e * F_j - np.log(aux.rho_e) + upper)


def surrogate_quadratic(links: Links, aux: WmmseAux) -> tuple[np.ndarray, np.ndarray, float]:
    """(Q, c, const) with surrogate(z) = z^H Q z + Re{c^H z} + const."""
    n = len(links.user)
    Q = np.zeros((n, n), complex)
    c = np.zeros(n, complex)

    def quad(g, weight):
        nonlocal Q
        if g is not None and weight:
            Q += weight * np.outer(g, g.conj())

    # rho |u|^2 |g^H z|^2 - 2 rho Re{u^* g^H z}
    quad(links.user, aux.rho_u * abs(aux.u_u) ** 2)
    c += -2 * aux.rho_u * aux.u_u * links.user
    const = aux.rho_u * (abs(aux.u_u) ** 2 * links.noise_u + 1) - np.log(aux.rho_u)
    if aux.variant == "verbatim":
        we = aux.rho_e * abs(aux.u_e) ** 2
        quad(links.eve, we)
        quad(links.eve_jam, we)
        c += 2j * aux.rho_e * aux.u_e * links.eve
        const += aux.rho_e * (abs(aux.u_e) ** 2 * links.noise_e + 1) - np.log(aux.rho_e)
    else:
        if links.jamming:
            quad(links.eve_jam, aux.rho_e * abs(aux.u_e) ** 2)
            c += -2 * aux.rho_e * aux.u_e * links.eve_jam
        const += aux.rho_e * (abs(aux.u_e) ** 2 * links.noise_e + 1) - np.log(aux.rho_e)
        quad(links.eve, 1.0 / aux.eve_total)
        quad(links.eve_jam, 1.0 / aux.eve_total)
        const += np.log(aux.eve_total) + links.noise_e / aux.eve_total - 1
    return (Q + Q.conj().T) / 2, c, float(const)


def qos_constraint(links: Links, anchor_values: dict, r_th: float) -> qcqp.LinearConstraint:
    """2 Re{l_hat^* l} - |l_hat|^2 >= r_th * noise_u, affine in z."""
    lh = anchor_values["user"]
    return qcqp.LinearConstraint(2 * lh * links.user, r_th * links.noise_u + abs(lh) ** 2)


def sic_constraint(links: Links, anchor_values: dict) -> qcqp.QuadraticConstraint:
    """|l_user|^2 <= 2 Re{l_hat_jam^* l_user_jam} - |l_hat_jam|^2."""
    lh = anchor_values["user_jam"]
    P = np.outer(links.user, links.user.conj())
    return qcqp.QuadraticConstraint(P, 2 * lh * links.user_jam, -abs(lh) ** 2)


def qos_lhs(links: Links, anchor_values: dict, z: np.ndarray) -> float:
    lh = anchor_values["user"]
    return float(2 * np.real(np.conj(lh) * np.vdot(links.user, z)) - abs(lh) ** 2)


def sic_margin(links: Links, anchor_values: dict, z: np.ndarray) -> float:
    """Linearized SIC left side minus |l_user|^2 (>= 0 when satisfied)."""
    lh = anchor_values["user_jam"]
    lhs = 2 * np.real(np.conj(lh) * np.vdot(links.user_jam, z)) - abs(lh) ** 2
    return float(lhs - abs(np.vdot(links.user, z)) ** 2)


def true_feasible(links: Links, z: np.ndarray, r_th: float, tol: float = 1e-9) -> bool:
    v = links.values(z)
    su = abs(v["user"]) ** 2
    if su < r_th * links.noise_u * (1 - tol):
        return False
    if links.jamming and abs(v["user_jam"]) ** 2 < su * (1 - tol):
        return False
    return True


# ---------------------------------------------------------------------------
# precoder-space wrappers (physical units)

def precoder_links(cascaded: CascadedChannels, limits: NoiseAndLimits, jamming: bool = True,
                   normalized: bool = False) -> Links:
    """Links over ``z = [w; w_jam]`` (or ``z = w`` without jamming).

    With ``normalized=True`` the variable is ``z / sqrt(P_max)`` and both noise
    powers are scaled to one, which is what the solver works with.
    """
    hu, he = cascaded.h_u, cascaded.h_e
    nu, ne = limits.sigma2, limits.sigma2_eve
    if normalized:
        s = np.sqrt(limits.p_max)
        hu, he = hu * s / np.sqrt(nu), he * s / np.sqrt(ne)
        nu = ne = 1.0
    if not jamming:
        return Links(hu.copy(), he.copy(), noise_u=nu, noise_e=ne)
    zero = np.zeros_like(hu)
    return Links(np.concatenate([hu, zero]), np.concatenate([he, zero]),
                 np.concatenate([zero, hu]), np.concatenate([zero, he]), nu, ne)


def surrogate_objective(precoders: Precoders, aux: WmmseAux, cascaded: CascadedChannels,
                        limits: NoiseAndLimits) -> float:
    links = precoder_links(cascaded, limits)
    return surrogate_value(links.values(precoders.stacked()), aux, limits.sigma2, limits.sigma2_eve)


def update_aux(precoders: Precoders, cascaded: CascadedChannels, limits: NoiseAndLimits,
               variant: str = "verbatim") -> WmmseAux:
    links = precoder_links(cascaded, limits)
    return aux_from_values(links.values(precoders.stacked()), limits.sigma2, limits.sigma2_eve, variant)


def linearize_qos(anchor: ScaAnchor, cascaded: CascadedChannels,
                  limits: NoiseAndLimits) -> qcqp.LinearConstraint:
    links = precoder_links(cascaded, limits)
    z_hat = np.concatenate([anchor.w, anchor.w_jam])
    return qos_constraint(links, links.values(z_hat), limits.r_th)


def linearize_sic(anchor: ScaAnchor, cascaded: CascadedChannels,
                  limits: NoiseAndLimits | None = None) -> qcqp.QuadraticConstraint:
    links = precoder_links(cascaded, limits or NoiseAndLimits())
    z_hat = np.concatenate([anchor.w, anchor.w_jam])
    return sic_constraint(links, links.values(z_hat))


# ---------------------------------------------------------------------------
# initialization

def _unit(x):
    n = np.linalg.norm(x)
    return x / n if n > 0 else x


def initial_precoders(cascaded: CascadedChannels, limits: NoiseAndLimits, jamming: bool = True,
                      margin: float = 1e-3) -> Precoders:
    """MRT information beam; jamming along h_u projected away from h_e.

    Powers are split so that QoS and SIC hold with a small relative margin.
    If the projected jamming direction cannot satisfy SIC it is blended toward
    MRT. Raises :class:`InfeasibleError` when no split works.
    """
    hu, he = cascaded.h_u, cascaded.h_e
    P, nu = limits.p_max, limits.sigma2
    gain = np.vdot(hu, hu).real
    mrt = _unit(hu)
    p_min = limits.r_th * nu * (1 + margin) / gain if gain > 0 else np.inf
    if not jamming:
        if p_min > P:
            raise InfeasibleError("QoS unreachable at full power")
        return Precoders(np.sqrt(P) * mrt, np.zeros_like(hu))
    e = _unit(he)
    perp = hu - e * np.vdot(e, hu)
    if np.linalg.norm(perp) < 1e-9 * np.linalg.norm(hu):
        perp = hu
    # equal split first; it meets SIC only when the projection barely shrinks h_u
    even = Precoders(np.sqrt(P / 2) * mrt, np.sqrt(P / 2) * _unit(perp))
    if (P / 2 * gain >= limits.r_th * nu
            and abs(np.vdot(hu, even.w_jam)) ** 2 >= abs(np.vdot(hu, even.w)) ** 2 * (1 + margin)):
        return even
    for t in (0.0, 0.25, 0.5, 0.75, 1.0):
        d = _unit((1 - t) * _unit(perp) + t * mrt)
        alpha = abs(np.vdot(hu, d)) ** 2 / gain
        p_w = alpha * P / (alpha + 1 + margin)
        if p_w >= p_min:
            return Precoders(np.sqrt(p_w) * mrt, np.sqrt(P - p_w) * d)
    raise InfeasibleError("QoS and SIC cannot both hold under the power budget")


def feasible(cascaded: CascadedChannels, limits: NoiseAndLimits, jamming: bool = True) -> bool:
    """Exact feasibility of the precoder constraints for these cascaded channels.

    Without jamming QoS needs ``P |h_u|^2 >= r sigma^2``; SIC additionally needs
    at least as much jamming power as signal power along h_u, doubling it.
    """
    need = limits.r_th * limits.sigma2 * (2 if jamming else 1)
    return limits.p_max * np.vdot(cascaded.h_u, cascaded.h_u).real >= need


# ---------------------------------------------------------------------------

@dataclass
class P2Settings:
    variant: str = "standard"
    jamming: bool = True
    eps_bits: float = 1e-4
    max_outer: int = 50
    max_halvings: int = 10
    max_extrapolation: float = 1024.0
    solver: qcqp.SolverSettings = field(default_factory=qcqp.SolverSettings)


def _step(links: Links, z: np.ndarray, r_th: float, variant: str, settings: P2Settings,
          ball: float | None) -> tuple[np.ndarray | None, str]:
    v = links.values(z)
    aux = aux_from_values(v, links.noise_u, links.noise_e, variant)
    Q, c, const = surrogate_quadratic(links, aux)
    cons = [qos_constraint(links, v, r_th)]
    if links.jamming:
        cons.append(sic_constraint(links, v))
    prob = qcqp.QcqpProblem(Q, c, const, cons, ball=ball, check_psd=False)
    rep = qcqp.solve(prob, settings.solver, x0=z)
    return rep.solution, rep.status


def solve_p2(channels: ChannelSet, ris: RisVector, limits: NoiseAndLimits, init: Precoders | None = None,
             settings: P2Settings | None = None) -> tuple[Precoders, dict]:
    """Precoders maximizing the secrecy rate for a fixed RIS vector.

    Alternates closed-form WMMSE auxiliaries with a convex solve of the
    surrogate under the power ball and the linearized QoS/SIC constraints.
    Every accepted iterate has a true secrecy rate no lower than the previous
    one; rejected steps are damped toward the previous iterate.
    """
    settings = settings or P2Settings()
    cascaded = cascade(channels, ris)
    jam = settings.jamming
    if not feasible(cascaded, limits, jam):
        raise InfeasibleError("QoS/SIC unreachable for this channel draw")
    links = precoder_links(cascaded, limits, jamming=jam, normalized=True)
    scale = np.sqrt(limits.p_max)

    def pack(p: Precoders):
        return (p.stacked() if jam else p.w) / scale

    def unpack(z):
        z = z * scale
        return Precoders.from_stacked(z) if jam else Precoders(z, np.zeros_like(z))

    def usable(z):
        return (z is not None and np.vdot(z, z).real <= 1 + 1e-9
                and true_feasible(links, z, limits.r_th, tol=0))

    z = pack(init) if init is not None else None
    if z is None or not usable(z):
        z = pack(initial_precoders(cascaded, limits, jam))
    obj = true_objective(links, z)
    trace = [obj / LN2]
    statuses, rejected, restarts = [], 0, 0
    gamma = 1.0
    t0 = time.perf_counter()
    for _ in range(settings.max_outer):
        cand, status = _step(links, z, limits.r_th, settings.variant, settings, ball=1.0)
        statuses.append(status)
        if cand is None:
            if restarts:
                break
            restarts += 1
            z = pack(initial_precoders(cascaded, limits, jam))
            obj = true_objective(links, z)
            continue
        # plain surrogate step, then extrapolation along it (retracted onto
        # the power ball) when that does better; damped steps toward z if
        # the plain step is not an improvement
        d = cand - z

        def trial(g):
            zt = z + g * d
            nrm = np.vdot(zt, zt).real
            if nrm > 1:
                zt = zt / np.sqrt(nrm)
            return zt, (true_objective(links, zt) if usable(zt) else -np.inf)

        z1, o1 = trial(1.0)
        best_z, best_o = z1, o1
        g = min(2 * gamma, settings.max_extrapolation)
        gamma = 1.0
        while g > 1:
            zt, ot = trial(g)
            if ot > best_o:
                best_z, best_o, gamma = zt, ot, g
                break
            rejected += 1
            g /= 2
        g = 0.5
        while best_o < obj - 1e-12 and g >= 2.0 ** -settings.max_halvings:
            rejected += 1
            best_z, best_o = trial(g)
            g /= 2
        if best_o < obj - 1e-12:
            break
        gain = (best_o - obj) / LN2
        z, obj = best_z, best_o
        trace.append(obj / LN2)
        if gain < settings.eps_bits and gamma == 1.0:
            break
    prec = unpack(z)
    diag = {"trace_bits": trace, "statuses": statuses, "rejected": rejected, "restarts": restarts,
            "iterations": len(trace) - 1, "seconds": time.perf_counter() - t0,
            "feasibility": check_constraints(cascaded, prec, limits, tol=1e-6, jamming=jam)}
    return prec, diag
