"""Seeded Monte Carlo experiments: convergence, distance and element sweeps, baselines.

Trial ``t`` always uses ``seed = config.seed + t`` and draws the channels
first, so every scheme and geometry sees the same G and gains for a given
trial index.
"""
from __future__ import annotations

import dataclasses
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .ao import solve_no_jamming_baseline, solve_p1
from .config import Mode, ScenarioConfig
from .geometry import draw_channels
from .precoder import InfeasibleError, feasible, solve_p2
from .secrecy import RisVector, cascade, rates_and_secrecy

CONVERGENCE_TRIALS = 10
SWEEP_TRIALS = 50


@dataclass(frozen=True)
class Row:
    sweep_value: float
    trial: int
    seed: int
    rate_bits: float
    rate_user: float
    rate_eve: float
    iters: int
    status: str


@dataclass
class SweepResult:
    name: str
    axis: str
    values: list
    trials: int
    rows: list = field(default_factory=list)
    skipped: dict = field(default_factory=dict)

    def rates_at(self, value) -> np.ndarray:
        return np.array([r.rate_bits for r in self.rows if r.sweep_value == value])

    def medians(self) -> np.ndarray:
        return np.array([np.median(self.rates_at(v)) if len(self.rates_at(v)) else np.nan
                         for v in self.values])

    def summary(self) -> list[dict]:
        out = []
        for v in self.values:
            x = self.rates_at(v)
            skip = self.skipped.get(v, 0) / self.trials
            if len(x):
                out.append({"sweep_value": v, "mean": float(np.mean(x)), "median": float(np.median(x)),
                            "p10": float(np.percentile(x, 10)), "p90": float(np.percentile(x, 90)),
                            "skip_fraction": skip})
            else:
                out.append({"sweep_value": v, "mean": np.nan, "median": np.nan, "p10": np.nan,
                            "p90": np.nan, "skip_fraction": skip})
        return out

    @property
    def total_skipped(self) -> int:
        return int(sum(self.skipped.values()))

    @property
    def all_infeasible(self) -> bool:
        return not self.rows and self.total_skipped > 0


def stochastic_ris(N: int, rng: np.random.Generator) -> RisVector:
    """Phases drawn uniformly on the circle."""
    return RisVector.from_phases(rng.uniform(-np.pi, np.pi, N))


@dataclass(frozen=True)
class _Job:
    config: ScenarioConfig
    seed: int
    scheme: Mode
    far_field: bool = False
    keep_trace: bool = False


@dataclass(frozen=True)
class _Outcome:
    rate: float
    rate_user: float
    rate_eve: float
    iters: int
    status: str
    trace: tuple | None = None


def _run_job(job: _Job) -> _Outcome | None:
    cfg = job.config
    rng = np.random.default_rng(job.seed)
    ch = draw_channels(cfg.array, cfg.geometry, cfg.fading, rng, far_field=job.far_field)
    try:
        if job.scheme.kind == "stochastic":
            # phases come after the channel draw so channels stay paired
            ris = stochastic_ris(ch.N, rng)
            cas = cascade(ch, ris)
            if not feasible(cas, cfg.limits):
                raise InfeasibleError("QoS unreachable with these phases")
            prec, diag = solve_p2(ch, ris, cfg.limits, settings=cfg.solver.p2)
            r_u, r_e, r = rates_and_secrecy(cas, prec, cfg.limits)
            return _Outcome(r, r_u, r_e, diag["iterations"], "p2_only")
        if job.scheme.kind == "nojam":
            prec, ris, tr = solve_no_jamming_baseline(ch, cfg.limits, cfg.solver)
        else:
            prec, ris, tr = solve_p1(ch, cfg.limits, job.scheme.phases, cfg.solver)
    except InfeasibleError:
        return None
    r_u, r_e, r = rates_and_secrecy(cascade(ch, ris), prec, cfg.limits)
    trace = (tuple((rec.secrecy, rec.rate_user, rec.rate_eve) for rec in tr.records)
             if job.keep_trace else None)
    return _Outcome(r, r_u, r_e, tr.sweeps, tr.status, trace)


def _map(jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [_run_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map yields in submission order regardless of completion order
        return list(pool.map(_run_job, jobs, chunksize=1))


def _sweep(name: str, axis: str, points: list, trials: int, base_seed: int, workers: int,
           make_job) -> SweepResult:
    """``make_job(value, seed)`` builds the job for one (point, trial)."""
    jobs = [make_job(v, base_seed + t) for v in points for t in range(trials)]
    outs = _map(jobs, workers)
    res = SweepResult(name, axis, list(points), trials)
    k = 0
    for v in points:
        res.skipped[v] = 0
        for t in range(trials):
            o = outs[k]
            k += 1
            if o is None:
                res.skipped[v] += 1
                continue
            res.rows.append(Row(v, t, base_seed + t, max(o.rate, 0.0), o.rate_user, o.rate_eve,
                                o.iters, o.status))
    return res


def _scheme_for_ao(mode: Mode) -> Mode:
    # ff is a channel model, not a phase constraint
    return Mode("continuous") if mode.kind in ("ff", "stochastic") else mode


def run_convergence(config: ScenarioConfig) -> list[SweepResult]:
    """Per-sweep secrecy rate of the jamming and no-jamming schemes.

    Traces that stop early are held at their final value so every trial
    contributes a row at every sweep index.
    """
    trials = config.trials_or(CONVERGENCE_TRIALS)
    far = config.mode.kind == "ff"
    out = []
    for name, scheme in (("converge_jam", _scheme_for_ao(config.mode)), ("converge_nojam", Mode("nojam"))):
        jobs = [_Job(config, config.seed + t, scheme, far, keep_trace=True) for t in range(trials)]
        outs = _map(jobs, config.workers)
        length = max((len(o.trace) for o in outs if o is not None), default=1)
        res = SweepResult(name, "iteration", list(range(length)), trials)
        res.skipped = {k: 0 for k in range(length)}
        for k in range(length):
            for t, o in enumerate(outs):
                if o is None:
                    res.skipped[k] += 1
                    continue
                tr = o.trace
                r, r_u, r_e = tr[min(k, len(tr) - 1)]
                res.rows.append(Row(k, t, config.seed + t, max(r, 0.0), r_u, r_e,
                                    o.iters, o.status))
        out.append(res)
    return out


def _eve_at(config: ScenarioConfig, radius: float, azimuth: float) -> ScenarioConfig:
    return config.replace(geometry=dataclasses.replace(config.geometry, eve_polar=(radius, azimuth)))


def _deg(az: float) -> str:
    return f"az{int(round(np.degrees(az)))}"


def run_distance_sweep(config: ScenarioConfig, radii=None, eve_azimuth: float | None = None,
                       scheme: Mode | None = None, far_field: bool = True) -> list[SweepResult]:
    """Eavesdropper radius sweep at a fixed azimuth with the user held in place.

    Runs the near-field model and, when ``far_field`` is set, the planar-wave
    model on the same draws. ``scheme`` defaults to the no-jamming design.
    """
    radii = list(config.sweep.radii if radii is None else radii)
    if any(r <= 0 for r in radii):
        raise ValueError("radii must be positive")
    az = config.geometry.eve_polar[1] if eve_azimuth is None else eve_azimuth
    scheme = scheme or Mode("nojam")
    trials = config.trials_or(SWEEP_TRIALS)
    models = [("nf", False)] + ([("ff", True)] if far_field else [])
    return [_sweep(f"dist_{tag}_{_deg(az)}", "eve_radius_m", radii, trials, config.seed, config.workers,
                   lambda r, s, ff=ff: _Job(_eve_at(config, r, az), s, scheme, ff))
            for tag, ff in models]


def run_element_sweep(config: ScenarioConfig, n1_values=None, modes=None) -> list[SweepResult]:
    """Secrecy rate against the RIS size; the vertical size stays fixed."""
    n1_values = list(config.sweep.n1_values if n1_values is None else n1_values)
    n2 = config.sweep.n2 or config.array.N2
    modes = modes or [Mode("continuous"), Mode("discrete", 1), Mode("discrete", 2), Mode("discrete", 3),
                      Mode("stochastic")]
    trials = config.trials_or(SWEEP_TRIALS)
    sizes = [n1 * n2 for n1 in n1_values]
    by_size = {n1 * n2: config.with_array(N1=n1, N2=n2) for n1 in n1_values}
    out = []
    for mode in modes:
        far = mode.kind == "ff"
        scheme = _scheme_for_ao(mode) if far else mode
        out.append(_sweep(f"elem_{mode.label}", "N", sizes, trials, config.seed, config.workers,
                          lambda n, s, sc=scheme, ff=far: _Job(by_size[n], s, sc, ff)))
    return out


def run_stochastic_phase_baseline(config: ScenarioConfig) -> SweepResult:
    """Uniformly random phases per trial, precoders optimized for them."""
    trials = config.trials_or(SWEEP_TRIALS)
    return _sweep("baseline_stochastic", "N", [config.array.N], trials, config.seed, config.workers,
                  lambda n, s: _Job(config, s, Mode("stochastic")))


def run_baseline(config: ScenarioConfig, mode: Mode | None = None) -> SweepResult:
    """Single-point run of one scheme at the scenario geometry."""
    mode = mode or Mode("stochastic")
    if mode.kind == "stochastic":
        return run_stochastic_phase_baseline(config)
    trials = config.trials_or(SWEEP_TRIALS)
    far = mode.kind == "ff"
    scheme = _scheme_for_ao(mode)
    return _sweep(f"baseline_{mode.label}", "N", [config.array.N], trials, config.seed, config.workers,
                  lambda n, s: _Job(config, s, scheme, far))
