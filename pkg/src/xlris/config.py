"""Scenario files (TOML) and run modes."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli

from .ao import AoSettings
from .geometry import SPEED_OF_LIGHT, ArrayConfig, FadingParams, SceneGeometry, db_to_linear
from .precoder import P2Settings
from .qcqp import SolverSettings
from .ris import P3Settings, PhaseAlphabet
from .secrecy import NoiseAndLimits, dbm_to_watt

DESK_ARRAY = {"M": 4, "N1": 16, "N2": 4}
FULL_ARRAY = {"M": 8, "N1": 64, "N2": 8}
MODES = ("continuous", "discrete", "stochastic", "ff", "nojam")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Mode:
    kind: str = "continuous"
    bits: int | None = None

    @classmethod
    def parse(cls, text: str) -> "Mode":
        text = str(text).strip().lower()
        kind, _, arg = text.partition(":")
        if kind not in MODES:
            raise ConfigError(f"unknown mode {text!r}; expected one of continuous, discrete:<b>, "
                              "stochastic, ff, nojam")
        if kind == "discrete":
            try:
                bits = int(arg) if arg else 3
            except ValueError:
                raise ConfigError(f"bad bit count in mode {text!r}") from None
            if bits < 1:
                raise ConfigError("discrete mode needs at least 1 bit")
            return cls(kind, bits)
        if arg:
            raise ConfigError(f"mode {kind!r} takes no argument")
        return cls(kind)

    @property
    def phases(self):
        """Phase constraint handed to the RIS solver."""
        return PhaseAlphabet(self.bits) if self.kind == "discrete" else "continuous"

    @property
    def label(self) -> str:
        return f"discrete{self.bits}" if self.kind == "discrete" else self.kind

    def __str__(self):
        return f"discrete:{self.bits}" if self.kind == "discrete" else self.kind


@dataclass
class SweepAxes:
    radii: tuple = (5.0, 8.0, 11.0, 13.0, 15.0, 17.0, 19.0, 22.0, 25.0)
    alt_eve_azimuth: float = np.pi / 6
    n1_values: tuple = (8, 16, 24, 32)
    n2: int | None = None


@dataclass
class ScenarioConfig:
    array: ArrayConfig = field(default_factory=lambda: ArrayConfig(**DESK_ARRAY))
    geometry: SceneGeometry = field(default_factory=SceneGeometry)
    fading: FadingParams = field(default_factory=FadingParams)
    limits: NoiseAndLimits = field(default_factory=NoiseAndLimits)
    carrier_frequency: float = 10e9
    mode: Mode = field(default_factory=Mode)
    trials: int | None = None
    seed: int = 0
    workers: int = 1
    solver: AoSettings = field(default_factory=AoSettings)
    sweep: SweepAxes = field(default_factory=SweepAxes)

    def __post_init__(self):
        if self.trials is not None and self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.carrier_frequency <= 0:
            raise ConfigError("carrier frequency must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def trials_or(self, default: int) -> int:
        return self.trials if self.trials is not None else default

    def replace(self, **kw) -> "ScenarioConfig":
        return dataclasses.replace(self, **kw)

    def with_array(self, **kw) -> "ScenarioConfig":
        return self.replace(array=dataclasses.replace(self.array, **kw))


_SECTIONS = {
    "array": {"M", "N1", "N2", "frequency_hz", "element_spacing"},
    "geometry": {"bs_position", "ris_center", "user_radius", "user_azimuth", "eve_radius", "eve_azimuth",
                 "bs_axis_offset"},
    "fading": {"beta0_db", "alpha", "kappa_db", "zeta_mean", "zeta_std"},
    "limits": {"noise_dbm", "eve_noise_dbm", "p_max_dbm", "r_th"},
    "solver": {"variant", "eps_ao", "max_sweeps", "eps_p2", "max_outer_p2", "eps_admm", "max_iter_p3",
               "mu0", "patience", "eps_kkt", "max_iter_qcqp"},
    "run": {"trials", "seed", "mode", "workers"},
    "sweep": {"radii", "alt_eve_azimuth", "n1_values", "n2"},
}


def _check_keys(doc: dict):
    for name, body in doc.items():
        if name not in _SECTIONS:
            raise ConfigError(f"unknown section [{name}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{name}] must be a table")
        extra = set(body) - _SECTIONS[name]
        if extra:
            raise ConfigError(f"unknown keys in [{name}]: {', '.join(sorted(extra))}")


def build_config(doc: dict | None = None, full_scale: bool = False) -> ScenarioConfig:
    """ScenarioConfig from a parsed TOML document; missing keys take defaults."""
    doc = doc or {}
    _check_keys(doc)
    a, g = doc.get("array", {}), doc.get("geometry", {})
    fd, lm = doc.get("fading", {}), doc.get("limits", {})
    sv, rn, sw = doc.get("solver", {}), doc.get("run", {}), doc.get("sweep", {})
    try:
        freq = float(a.get("frequency_hz", 10e9))
        if freq <= 0:
            raise ConfigError("frequency_hz must be positive")
        base = FULL_ARRAY if full_scale else DESK_ARRAY
        array = ArrayConfig(M=int(a.get("M", base["M"])), N1=int(a.get("N1", base["N1"])),
                            N2=int(a.get("N2", base["N2"])), wavelength=SPEED_OF_LIGHT / freq,
                            element_spacing=a.get("element_spacing"))
        geo0 = SceneGeometry()
        geometry = SceneGeometry(
            bs_position=tuple(float(x) for x in g.get("bs_position", geo0.bs_position)),
            ris_center=tuple(float(x) for x in g.get("ris_center", geo0.ris_center)),
            user_polar=(float(g.get("user_radius", geo0.user_polar[0])),
                        float(g.get("user_azimuth", geo0.user_polar[1]))),
            eve_polar=(float(g.get("eve_radius", geo0.eve_polar[0])),
                       float(g.get("eve_azimuth", geo0.eve_polar[1]))),
            bs_axis_offset=float(g.get("bs_axis_offset", 0.0)))
        if len(geometry.bs_position) != 3 or len(geometry.ris_center) != 3:
            raise ConfigError("positions need three coordinates")
        if np.allclose(geometry.bs_position, geometry.ris_center):
            raise ConfigError("BS coincides with the RIS")
        fading = FadingParams(beta0=db_to_linear(float(fd.get("beta0_db", -30.0))),
                              alpha_br=float(fd.get("alpha", 2.2)),
                              kappa_br=db_to_linear(float(fd.get("kappa_db", 3.0))),
                              zeta_mean=float(fd.get("zeta_mean", 1.0)),
                              zeta_std=float(fd.get("zeta_std", 0.1)))
        limits = NoiseAndLimits(sigma2=dbm_to_watt(float(lm.get("noise_dbm", -80.0))),
                                sigma2_eve=dbm_to_watt(float(lm.get("eve_noise_dbm", -80.0))),
                                p_max=dbm_to_watt(float(lm.get("p_max_dbm", 10.0))),
                                r_th=float(lm.get("r_th", 1.0)))
        qp = SolverSettings(eps_kkt=float(sv.get("eps_kkt", 1e-7)),
                            max_iter=int(sv.get("max_iter_qcqp", 100)))
        variant = str(sv.get("variant", "standard"))
        if variant not in ("standard", "verbatim"):
            raise ConfigError(f"unknown WMMSE variant {variant!r}")
        solver = AoSettings(
            eps_ao=float(sv.get("eps_ao", 1e-3)), max_sweeps=int(sv.get("max_sweeps", 100)),
            p2=P2Settings(variant=variant, eps_bits=float(sv.get("eps_p2", 1e-4)),
                          max_outer=int(sv.get("max_outer_p2", 50)), solver=qp),
            p3=P3Settings(variant=variant, eps_admm=float(sv.get("eps_admm", 1e-4)),
                          max_iter=int(sv.get("max_iter_p3", 200)), mu0=float(sv.get("mu0", 0.01)),
                          patience=int(sv.get("patience", 10)), solver=qp))
        if solver.eps_ao <= 0 or solver.max_sweeps < 1 or solver.p3.mu0 <= 0:
            raise ConfigError("solver tolerances, iteration caps and mu0 must be positive")
        sweep0 = SweepAxes()
        sweep = SweepAxes(radii=tuple(float(r) for r in sw.get("radii", sweep0.radii)),
                          alt_eve_azimuth=float(sw.get("alt_eve_azimuth", sweep0.alt_eve_azimuth)),
                          n1_values=tuple(int(n) for n in sw.get("n1_values", sweep0.n1_values)),
                          n2=int(sw["n2"]) if "n2" in sw else None)
        if any(r <= 0 for r in sweep.radii) or not sweep.radii:
            raise ConfigError("sweep radii must be positive")
        if any(n < 1 for n in sweep.n1_values) or not sweep.n1_values:
            raise ConfigError("n1_values must be >= 1")
        trials = rn.get("trials")
        return ScenarioConfig(array=array, geometry=geometry, fading=fading, limits=limits,
                              carrier_frequency=freq, mode=Mode.parse(rn.get("mode", "continuous")),
                              trials=None if trials is None else int(trials), seed=int(rn.get("seed", 0)),
                              workers=int(rn.get("workers", 1)), solver=solver, sweep=sweep)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path | None, full_scale: bool = False) -> ScenarioConfig:
    if path is None:
        return build_config({}, full_scale)
    path = Path(path)
    try:
        with path.open("rb") as fh:
            doc = tomli.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario {path}: {exc}") from exc
    except tomli.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return build_config(doc, full_scale)
