"""Array responses and channel synthesis for the BS -> RIS -> receiver links.

The RIS lies in the yz-plane. Element ``(n1, n2)`` sits at
``ris_center + (0, y[n1], z[n2])`` where ``n1`` runs along y (horizontal) and
``n2`` along z (vertical); vectors are flattened row-major over ``(n1, n2)``,
which matches the Kronecker ordering ``horizontal (x) vertical``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


class DegenerateGeometryError(ValueError):
    """A receiver coincides with an RIS element."""


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ArrayConfig:
    """BS antenna count and RIS shape/spacing."""

    M: int = 8
    N1: int = 64
    N2: int = 8
    wavelength: float = 0.03
    element_spacing: float | None = None

    def __post_init__(self):
        if self.M < 1 or self.N1 < 1 or self.N2 < 1:
            raise ValueError(f"array sizes must be >= 1, got M={self.M} N1={self.N1} N2={self.N2}")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2)
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be positive")

    @classmethod
    def from_frequency(cls, carrier_frequency: float, **kwargs) -> "ArrayConfig":
        return cls(wavelength=SPEED_OF_LIGHT / carrier_frequency, **kwargs)

    @property
    def N(self) -> int:
        return self.N1 * self.N2

    @property
    def aperture(self) -> float:
        """Array diagonal, used as the aperture D in the Rayleigh distance."""
        return float(np.hypot(self.N1 * self.element_spacing, self.N2 * self.element_spacing))


@dataclass(frozen=True)
class SceneGeometry:
    """Positions in meters. Receivers are given in polar form on the x-y plane
    around the RIS center, with azimuth measured from the RIS normal (+x)."""

    bs_position: tuple = (100.0, -100.0, 0.0)
    ris_center: tuple = (0.0, 0.0, 0.0)
    user_polar: tuple = (15.0, np.pi / 4)
    eve_polar: tuple = (10.0, np.pi / 4)
    # Rotation of the BS ULA axis away from perpendicular-to-the-BS->RIS-line, radians.
    bs_axis_offset: float = 0.0

    def __post_init__(self):
        for name in ("user_polar", "eve_polar"):
            r, az = getattr(self, name)
            if r <= 0:
                raise ValueError(f"{name} radius must be positive, got {r}")
            if not -np.pi <= az < np.pi:
                raise ValueError(f"{name} azimuth must lie in [-pi, pi), got {az}")

    def polar_to_position(self, polar) -> np.ndarray:
        r, az = polar
        return np.asarray(self.ris_center, float) + r * np.array([np.cos(az), np.sin(az), 0.0])

    @property
    def user_position(self) -> np.ndarray:
        return self.polar_to_position(self.user_polar)

    @property
    def eve_position(self) -> np.ndarray:
        return self.polar_to_position(self.eve_polar)

    @property
    def bs_ris_distance(self) -> float:
        return float(np.linalg.norm(np.subtract(self.bs_position, self.ris_center)))

    def angles_from_ris(self, position) -> tuple[float, float]:
        """(azimuth, elevation) of ``position`` seen from the RIS center."""
        u = np.asarray(position, float) - np.asarray(self.ris_center, float)
        r = np.linalg.norm(u)
        if r == 0:
            raise DegenerateGeometryError("point coincides with the RIS center")
        return float(np.arctan2(u[1], u[0])), float(np.arcsin(u[2] / r))

    def bs_departure_angle(self) -> float:
        """Angle of the RIS as seen by the BS ULA (0 = broadside)."""
        return float(self.bs_axis_offset)


@dataclass(frozen=True)
class FarFieldPathSet:
    gains: np.ndarray
    bs_azimuths: np.ndarray
    ris_azimuths: np.ndarray
    ris_elevations: np.ndarray

    def __post_init__(self):
        if len(self.gains) < 1:
            raise ValueError("need at least one path")
        if not np.all(np.isfinite(self.gains)):
            raise ValueError("path gains must be finite")

    @property
    def L1(self) -> int:
        return len(self.gains)

    @classmethod
    def line_of_sight(cls, geometry: SceneGeometry) -> "FarFieldPathSet":
        phi, eta = geometry.angles_from_ris(geometry.bs_position)
        return cls(np.array([1.0 + 0j]), np.array([geometry.bs_departure_angle()]),
                   np.array([phi]), np.array([eta]))


@dataclass(frozen=True)
class FadingParams:
    beta0: float = db_to_linear(-30.0)
    alpha_br: float = 2.2
    kappa_br: float = db_to_linear(3.0)
    zeta_mean: float = 1.0
    zeta_std: float = 0.1

    def __post_init__(self):
        if self.beta0 <= 0:
            raise ValueError("beta0 must be positive")
        if self.kappa_br < 0 or self.zeta_std < 0:
            raise ValueError("kappa_br and zeta_std must be non-negative")


@dataclass(frozen=True)
class ChannelSet:
    """G: BS->RIS (N x M); h: RIS->user (N,); f: RIS->eavesdropper (N,)."""

    G: np.ndarray
    h: np.ndarray
    f: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        N, M = self.G.shape
        if self.h.shape != (N,) or self.f.shape != (N,):
            raise ValueError(f"h/f must have shape ({N},), got {self.h.shape} and {self.f.shape}")
        for name in ("G", "h", "f"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def N(self) -> int:
        return self.G.shape[0]

    @property
    def M(self) -> int:
        return self.G.shape[1]


def ula_response(azimuth: float, M: int, spacing: float, wavelength: float) -> np.ndarray:
    m = np.arange(M)
    return np.exp(1j * 2 * np.pi * spacing / wavelength * m * np.sin(azimuth)) / np.sqrt(M)


def upa_response(azimuth: float, elevation: float, N1: int, N2: int,
                 spacing: float, wavelength: float) -> np.ndarray:
    k = 2 * np.pi * spacing / wavelength
    horizontal = np.exp(1j * k * np.arange(N1) * np.sin(azimuth) * np.cos(elevation))
    vertical = np.exp(1j * k * np.arange(N2) * np.sin(elevation))
    return np.kron(horizontal, vertical) / np.sqrt(N1 * N2)


def element_positions(array: ArrayConfig, geometry: SceneGeometry) -> np.ndarray:
    """(N, 3) element coordinates, row-major over (n1, n2)."""
    d = array.element_spacing
    y = (np.arange(array.N1) - (array.N1 - 1) / 2) * d
    z = (np.arange(array.N2) - (array.N2 - 1) / 2) * d
    yy, zz = np.meshgrid(y, z, indexing="ij")
    pos = np.stack([np.zeros(array.N), yy.ravel(), zz.ravel()], axis=1)
    return pos + np.asarray(geometry.ris_center, float)


def nearfield_steering(receiver_position, array: ArrayConfig, geometry: SceneGeometry) -> np.ndarray:
    dist = np.linalg.norm(element_positions(array, geometry) - np.asarray(receiver_position, float), axis=1)
    if np.any(dist <= 1e-12):
        raise DegenerateGeometryError(f"receiver at {receiver_position} coincides with an RIS element")
    return np.exp(-1j * 2 * np.pi / array.wavelength * dist) / np.sqrt(array.N)


def rayleigh_distance(aperture: float, wavelength: float) -> float:
    if aperture <= 0:
        raise ValueError("aperture must be positive")
    return 2.0 * aperture ** 2 / wavelength


def synthesize_far_channel(params: FadingParams, paths: FarFieldPathSet, array: ArrayConfig,
                           bs_ris_distance: float, rng: np.random.Generator) -> np.ndarray:
    """Rician BS->RIS channel.

    The LoS part is built from the path set and rescaled to unit-modulus
    entries so the K-factor weighs LoS and scattering at equal per-entry power.
    """
    N, M = array.N, array.M
    G_L = np.zeros((N, M), complex)
    for a, gam, phi, eta in zip(paths.gains, paths.bs_azimuths, paths.ris_azimuths, paths.ris_elevations):
        b = upa_response(phi, eta, array.N1, array.N2, array.element_spacing, array.wavelength)
        at = ula_response(gam, M, array.element_spacing, array.wavelength)
        G_L += a * np.outer(b, at.conj())
    G_L *= np.sqrt(N * M / paths.L1)
    G_S = (rng.standard_normal((N, M)) + 1j * rng.standard_normal((N, M))) / np.sqrt(2)
    k = params.kappa_br
    if np.isinf(k):
        mix = G_L
    else:
        mix = np.sqrt(k / (k + 1)) * G_L + np.sqrt(1 / (k + 1)) * G_S
    return np.sqrt(params.beta0 * bs_ris_distance ** (-params.alpha_br)) * mix


def draw_zeta(params: FadingParams, rng: np.random.Generator) -> float:
    return float(rng.normal(params.zeta_mean, params.zeta_std))


def synthesize_near_channel(receiver_position, array: ArrayConfig, geometry: SceneGeometry,
                            params: FadingParams, rng: np.random.Generator,
                            zeta: float | None = None) -> np.ndarray:
    if zeta is None:
        zeta = draw_zeta(params, rng)
    return (1 + 1j) * zeta * nearfield_steering(receiver_position, array, geometry)


def far_field_baseline_channel(receiver_polar, array: ArrayConfig, geometry: SceneGeometry,
                               params: FadingParams, rng: np.random.Generator | None = None,
                               zeta: float | None = None) -> np.ndarray:
    """Planar-wave counterpart of :func:`synthesize_near_channel`; the receiver
    distance plays no role in the phase profile."""
    if zeta is None:
        zeta = draw_zeta(params, rng) if rng is not None else params.zeta_mean
    phi, eta = geometry.angles_from_ris(geometry.polar_to_position(receiver_polar))
    b = upa_response(phi, eta, array.N1, array.N2, array.element_spacing, array.wavelength)
    return (1 + 1j) * zeta * b


def draw_channels(array: ArrayConfig, geometry: SceneGeometry, params: FadingParams,
                  rng: np.random.Generator, far_field: bool = False) -> ChannelSet:
    """One Monte Carlo draw. Draw order is fixed (G, then zeta_user, zeta_eve)
    so trials sharing a seed share G and gains across schemes and geometries."""
    paths = FarFieldPathSet.line_of_sight(geometry)
    G = synthesize_far_channel(params, paths, array, geometry.bs_ris_distance, rng)
    zeta_u, zeta_e = draw_zeta(params, rng), draw_zeta(params, rng)
    if far_field:
        h = far_field_baseline_channel(geometry.user_polar, array, geometry, params, zeta=zeta_u)
        f = far_field_baseline_channel(geometry.eve_polar, array, geometry, params, zeta=zeta_e)
    else:
        h = synthesize_near_channel(geometry.user_position, array, geometry, params, rng, zeta=zeta_u)
        f = synthesize_near_channel(geometry.eve_position, array, geometry, params, rng, zeta=zeta_e)
    return ChannelSet(G, h, f, meta={"zeta_user": zeta_u, "zeta_eve": zeta_e, "far_field": far_field})
