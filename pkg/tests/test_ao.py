import numpy as np
import pytest

from xlris.ao import (AoTrace, complexity_report, fit_growth_exponent, solve_no_jamming_baseline,
                      solve_p1)
from xlris.geometry import ArrayConfig, ChannelSet, FadingParams, SceneGeometry, draw_channels
from xlris.precoder import InfeasibleError
from xlris.ris import PhaseAlphabet
from xlris.secrecy import NoiseAndLimits, cascade, check_constraints, rates_and_secrecy

LIM = NoiseAndLimits()


@pytest.fixture(scope="module")
def paired_runs():
    arr = ArrayConfig(M=4, N1=16, N2=4)
    out = []
    for seed in range(20):
        ch = draw_channels(arr, SceneGeometry(), FadingParams(), np.random.default_rng(seed))
        out.append((ch, solve_p1(ch, LIM), solve_no_jamming_baseline(ch, LIM)))
    return out


def test_traces_monotone_and_converge(paired_runs):
    for ch, (p, r, tr), _ in paired_runs:
        d = np.array([rec.difference for rec in tr.records])
        assert np.all(np.diff(d) >= -1e-9)
        assert np.all(np.diff(tr.secrecy_bits) >= -1e-9)
        assert tr.status == "converged" and tr.sweeps <= 60


def test_final_solution_feasible(paired_runs):
    for ch, (p, r, tr), (pn, rn, _) in paired_runs:
        assert check_constraints(cascade(ch, r), p, LIM, r, tol=1e-6).ok
        assert check_constraints(cascade(ch, rn), pn, LIM, rn, tol=1e-6, jamming=False).ok
        assert rates_and_secrecy(cascade(ch, r), p, LIM)[2] >= 0


def test_no_jamming_zero_and_not_better(paired_runs):
    gaps = []
    for ch, (p, r, _), (pn, rn, _) in paired_runs:
        assert np.all(pn.w_jam == 0)
        gaps.append(rates_and_secrecy(cascade(ch, r), p, LIM)[2] - rates_and_secrecy(cascade(ch, rn), pn, LIM)[2])
    assert np.median(gaps) >= -1e-6


def _no_eve(desk_channels):
    ch = desk_channels(3)
    return ChannelSet(ch.G, ch.h, np.zeros_like(ch.f))


def test_no_eavesdropper_limit(desk_channels):
    ch = _no_eve(desk_channels)
    p, r, tr = solve_p1(ch, LIM)
    cas = cascade(ch, r)
    r_u, r_e, rate = rates_and_secrecy(cas, p, LIM)
    assert r_e == 0 and rate == r_u
    # max-rate beamforming under SIC for these phases: half the power on each beam along h_u
    best = np.log2(1 + LIM.p_max / 2 * np.vdot(cas.h_u, cas.h_u).real / LIM.sigma2)
    assert abs(r_u - best) < 1e-3
    pn, rn, _ = solve_no_jamming_baseline(ch, LIM)
    # without an eavesdropper, jamming power is wasted: compare against the no-jamming rate at half power
    no_jam = rates_and_secrecy(cascade(ch, rn), pn, LIM)[2]
    assert abs(no_jam - np.log2(1 + LIM.p_max * np.vdot(cascade(ch, rn).h_u, cascade(ch, rn).h_u).real
                                / LIM.sigma2)) < 1e-3


def test_discrete_mode_runs(desk_channels):
    ch = desk_channels(1)
    p, r, tr = solve_p1(ch, LIM, PhaseAlphabet(2))
    assert PhaseAlphabet(2).contains(r.v)
    assert np.all(np.diff(tr.secrecy_bits) >= -1e-9)


def test_infeasible_draw(desk_channels):
    with pytest.raises(InfeasibleError):
        solve_p1(desk_channels(0), NoiseAndLimits(p_max=1e-12))


def test_deterministic(desk_channels):
    a = solve_p1(desk_channels(2), LIM)[2]
    b = solve_p1(desk_channels(2), LIM)[2]
    np.testing.assert_array_equal(a.secrecy_bits, b.secrecy_bits)


def test_complexity_report(paired_runs):
    rep = complexity_report([tr for _, (_, _, tr), _ in paired_runs])
    assert rep["N"] == [64] and rep["p3_seconds"][0] > 0
    with pytest.raises(ValueError):
        complexity_report(AoTrace())
    with pytest.raises(ValueError):
        complexity_report([])


def test_fit_growth_exponent():
    n = np.array([32, 64, 128])
    assert abs(fit_growth_exponent(n, 3e-6 * n ** 3.0) - 3) < 1e-9
    with pytest.raises(ValueError):
        fit_growth_exponent([1], [1])
