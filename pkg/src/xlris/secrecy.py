"""Cascaded links, rates, and constraint checks.

Rates are computed in nats internally and reported in bits.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .geometry import ChannelSet

LN2 = np.log(2.0)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class Precoders:
    w: np.ndarray
    w_jam: np.ndarray

    @property
    def power(self) -> float:
        return float(np.vdot(self.w, self.w).real + np.vdot(self.w_jam, self.w_jam).real)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.w, self.w_jam])

    @classmethod
    def from_stacked(cls, z: np.ndarray) -> "Precoders":
        M = len(z) // 2
        return cls(np.array(z[:M]), np.array(z[M:]))


@dataclass(frozen=True)
class RisVector:
    """Diagonal of the reflection matrix, entries exp(j*theta_n)."""

    v: np.ndarray

    @classmethod
    def from_phases(cls, phases) -> "RisVector":
        return cls(np.exp(1j * np.asarray(phases, float)))

    @classmethod
    def ones(cls, N: int) -> "RisVector":
        return cls(np.ones(N, complex))

    @property
    def phases(self) -> np.ndarray:
        return np.angle(self.v)

    def modulus_error(self) -> float:
        return float(np.max(np.abs(np.abs(self.v) - 1.0)))


@dataclass(frozen=True)
class NoiseAndLimits:
    sigma2: float = dbm_to_watt(-80.0)
    sigma2_eve: float = dbm_to_watt(-80.0)
    p_max: float = dbm_to_watt(10.0)
    r_th: float = 1.0

    def __post_init__(self):
        for name in ("sigma2", "sigma2_eve", "p_max", "r_th"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class CascadedChannels:
    """Effective M-vectors; the received signal is ``h_u.conj() @ x``."""

    h_u: np.ndarray
    h_e: np.ndarray


@dataclass(frozen=True)
class Rates:
    user: float
    eve: float

    @property
    def secrecy(self) -> float:
        return max(0.0, self.user - self.eve)

    @property
    def difference(self) -> float:
        return self.user - self.eve


@dataclass(frozen=True)
class FeasibilityReport:
    power: bool
    qos: bool
    sic: bool
    unit_modulus: bool
    power_violation: float
    qos_violation: float
    sic_violation: float
    modulus_violation: float

    @property
    def ok(self) -> bool:
        return self.power and self.qos and self.sic and self.unit_modulus


def cascade(channels: ChannelSet, ris: RisVector) -> CascadedChannels:
    if ris.v.shape != (channels.N,):
        raise ValueError(f"RIS vector has shape {ris.v.shape}, expected ({channels.N},)")
    # h^H diag(v) G, returned conjugated so that h_u^H x is h_u.conj() @ x
    hu_row = (channels.h.conj() * ris.v) @ channels.G
    he_row = (channels.f.conj() * ris.v) @ channels.G
    return CascadedChannels(hu_row.conj(), he_row.conj())


def link_powers(cascaded: CascadedChannels, precoders: Precoders) -> dict:
    hu, he = cascaded.h_u.conj(), cascaded.h_e.conj()
    return {
        "user_signal": abs(hu @ precoders.w) ** 2,
        "user_jam": abs(hu @ precoders.w_jam) ** 2,
        "eve_signal": abs(he @ precoders.w) ** 2,
        "eve_jam": abs(he @ precoders.w_jam) ** 2,
    }


def sinr_user(cascaded: CascadedChannels, precoders: Precoders, limits: NoiseAndLimits) -> float:
    # jamming is removed by SIC at the legitimate user
    return float(abs(cascaded.h_u.conj() @ precoders.w) ** 2 / limits.sigma2)


def rates_nats(cascaded: CascadedChannels, precoders: Precoders, limits: NoiseAndLimits) -> Rates:
    p = link_powers(cascaded, precoders)
    r_u = np.log1p(p["user_signal"] / limits.sigma2)
    r_e = np.log1p(p["eve_signal"] / (p["eve_jam"] + limits.sigma2_eve))
    return Rates(float(r_u), float(r_e))


def rates_and_secrecy(cascaded: CascadedChannels, precoders: Precoders,
                      limits: NoiseAndLimits) -> tuple[float, float, float]:
    """(R_u, R_e, R) in bits/s/Hz, with R clamped at zero."""
    r = rates_nats(cascaded, precoders, limits)
    r_u, r_e = float(r.user / LN2), float(r.eve / LN2)
    return r_u, r_e, max(0.0, r_u - r_e)


def check_constraints(cascaded: CascadedChannels, precoders: Precoders, limits: NoiseAndLimits,
                      ris: RisVector | None = None, tol: float = 1e-6,
                      jamming: bool = True) -> FeasibilityReport:
    """Relative violations per constraint; positive means violated.

    ``jamming=False`` drops the SIC constraint (no-jamming scheme).
    """
    p = link_powers(cascaded, precoders)
    power_v = (precoders.power - limits.p_max) / limits.p_max
    qos_target = limits.r_th * limits.sigma2
    qos_v = (qos_target - p["user_signal"]) / qos_target
    if jamming:
        sic_scale = max(p["user_signal"], p["user_jam"], np.finfo(float).tiny)
        sic_v = (p["user_signal"] - p["user_jam"]) / sic_scale
    else:
        sic_v = -1.0
    mod_v = ris.modulus_error() if ris is not None else 0.0
    return FeasibilityReport(power_v <= tol, qos_v <= tol, sic_v <= tol, mod_v <= tol,
                             float(power_v), float(qos_v), float(sic_v), float(mod_v))
