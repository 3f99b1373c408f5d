"""Alternating optimization of precoders and RIS phases."""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .geometry import ChannelSet
from .precoder import InfeasibleError, P2Settings, feasible, initial_precoders, solve_p2
from .ris import P3Settings, PhaseAlphabet, solve_p3
from .secrecy import (NoiseAndLimits, Precoders, RisVector, cascade, check_constraints,
                      rates_and_secrecy)


@dataclass
class SweepRecord:
    secrecy: float
    rate_user: float
    rate_eve: float
    difference: float
    qos_margin: float
    sic_margin: float
    p2_status: str
    p3_status: str
    p2_seconds: float
    p3_seconds: float


@dataclass
class AoTrace:
    records: list = field(default_factory=list)
    status: str = "running"
    N: int | None = None
    M: int | None = None

    def __len__(self):
        return len(self.records)

    @property
    def secrecy_bits(self) -> np.ndarray:
        return np.array([r.secrecy for r in self.records])

    @property
    def sweeps(self) -> int:
        # record 0 is the initial point
        return max(len(self.records) - 1, 0)


@dataclass
class AoSettings:
    eps_ao: float = 1e-3
    max_sweeps: int = 100
    p2: P2Settings = field(default_factory=P2Settings)
    p3: P3Settings = field(default_factory=P3Settings)


def _record(channels, prec, ris, limits, jamming, p2_status="init", p3_status="init", t2=0.0, t3=0.0):
    cas = cascade(channels, ris)
    r_u, r_e, r = rates_and_secrecy(cas, prec, limits)
    rep = check_constraints(cas, prec, limits, ris, jamming=jamming)
    return SweepRecord(r, r_u, r_e, r_u - r_e, -rep.qos_violation, -rep.sic_violation,
                       p2_status, p3_status, t2, t3)


def _status_of(statuses):
    if not statuses:
        return "none"
    bad = [s for s in statuses if s != "optimal"]
    return "optimal" if not bad else bad[-1]


def _run(channels: ChannelSet, limits: NoiseAndLimits, mode, settings: AoSettings, jamming: bool):
    import copy
    p2 = copy.copy(settings.p2)
    p3 = copy.copy(settings.p3)
    p2.jamming = p3.jamming = jamming
    ris = RisVector.ones(channels.N)
    cas = cascade(channels, ris)
    if not feasible(cas, limits, jamming):
        raise InfeasibleError("QoS unreachable for this channel realization")
    prec = initial_precoders(cas, limits, jamming)
    trace = AoTrace(N=channels.N, M=channels.M)
    trace.records.append(_record(channels, prec, ris, limits, jamming))
    best = (prec, ris, trace.records[-1])
    for _ in range(settings.max_sweeps):
        prev = trace.records[-1]
        prec, d2 = solve_p2(channels, ris, limits, init=prec, settings=p2)
        ris, d3 = solve_p3(channels, prec, limits, ris, mode, p3)
        rec = _record(channels, prec, ris, limits, jamming, _status_of(d2["statuses"]),
                      _status_of(d3["statuses"]), d2["seconds"], d3["seconds"])
        if rec.difference >= best[2].difference:
            best = (prec, ris, rec)
        else:
            # both stages are safeguarded, so this only happens through roundoff
            prec, ris, rec = best[0], best[1], best[2]
        trace.records.append(rec)
        still_negative = rec.difference < 0 and rec.difference - prev.difference >= settings.eps_ao
        if abs(rec.secrecy - prev.secrecy) < settings.eps_ao and not still_negative:
            trace.status = "converged"
            break
    else:
        trace.status = "max_sweeps"
    prec, ris, _ = best
    if not jamming:
        prec = Precoders(prec.w, np.zeros_like(prec.w))
    return prec, ris, trace


def solve_p1(channels: ChannelSet, limits: NoiseAndLimits, mode="continuous",
             settings: AoSettings | None = None, rng: np.random.Generator | None = None):
    """Joint precoder/jamming/phase design. Returns (Precoders, RisVector, AoTrace).

    ``mode`` is ``"continuous"`` or a :class:`PhaseAlphabet`. ``rng`` is
    accepted for interface symmetry; the algorithm itself is deterministic.
    Raises :class:`InfeasibleError` when QoS/SIC cannot be met for the draw.
    """
    return _run(channels, limits, mode, settings or AoSettings(), jamming=True)


def solve_no_jamming_baseline(channels: ChannelSet, limits: NoiseAndLimits,
                              settings: AoSettings | None = None, mode="continuous"):
    """Same pipeline with the jamming beam fixed at zero and no SIC constraint."""
    return _run(channels, limits, mode, settings or AoSettings(), jamming=False)


def fit_growth_exponent(sizes, times) -> float:
    """Least-squares slope of log(time) against log(size)."""
    sizes, times = np.asarray(sizes, float), np.asarray(times, float)
    if len(sizes) < 2 or np.any(sizes <= 0) or np.any(times <= 0):
        raise ValueError("need at least two positive (size, time) pairs")
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def complexity_report(traces) -> dict:
    """Per-stage timing summary.

    ``traces`` is one :class:`AoTrace` or a list of them; with traces at
    two or more RIS sizes the report also carries fitted growth exponents
    of the per-sweep stage times in N.
    """
    if isinstance(traces, AoTrace):
        traces = [traces]
    traces = [t for t in traces if t is not None]
    if not traces or all(t.sweeps == 0 for t in traces):
        raise ValueError("complexity report needs a nonempty trace")
    by_n: dict = {}
    for t in traces:
        recs = t.records[1:]
        if not recs:
            continue
        d = by_n.setdefault(t.N, {"p2": [], "p3": []})
        d["p2"].extend(r.p2_seconds for r in recs)
        d["p3"].extend(r.p3_seconds for r in recs)
    sizes = sorted(by_n)
    out = {"N": sizes,
           "p2_seconds": [float(np.median(by_n[n]["p2"])) for n in sizes],
           "p3_seconds": [float(np.median(by_n[n]["p3"])) for n in sizes]}
    if len(sizes) >= 2:
        out["p2_exponent"] = fit_growth_exponent(sizes, out["p2_seconds"])
        out["p3_exponent"] = fit_growth_exponent(sizes, out["p3_seconds"])
    return out


__all__ = ["AoSettings", "AoTrace", "SweepRecord", "InfeasibleError", "PhaseAlphabet",
           "solve_p1", "solve_no_jamming_baseline", "complexity_report", "fit_growth_exponent"]
