import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from l96gen.bifurcation import (
    HopfHopfDegeneracy, NoHopfError, amplitude_slope, first_bifurcation, first_hopf, first_lyapunov,
    hopf_criteria_2local, hopf_hopf, lyapunov_l96, perturbation_matrix, second_hopf, wave_diagnostics,
)
from l96gen.dynamics import SystemSpec, integrate_adaptive
from l96gen.gmap import G1, G3, G5, G6, linearize_at, named, tilde
from l96gen.spectral import fourier_column, laurent_of

P3 = laurent_of(G3)


def test_first_hopf_n36():
    rep = first_hopf(P3, 36)
    assert abs(rep.F1 - 1 / (math.cos(math.pi / 9) + math.sin(math.pi / 18))) < 1e-12
    assert abs(rep.F1 - 0.898198) < 5e-7
    assert rep.mode_k == 8 and rep.spatial_period == 9 and not rep.tie
    assert rep.tau0 > 0


def test_first_hopf_tie_n12():
    rep = first_hopf(P3, 12)
    assert rep.tie and {rep.mode_k, rep.tie_mode} == {2, 3}
    assert abs(rep.F1 - 1) < 1e-12
    with pytest.raises(HopfHopfDegeneracy):
        first_lyapunov(G3, 12)


def test_no_hopf_for_g1():
    with pytest.raises(NoHopfError, match="no Hopf for F>0"):
        first_hopf(laurent_of(G1), 10)


@pytest.mark.parametrize("n,F2,mode", [(36, 0.902474, 7), (22, 0.9343, None), (14, 1.1820, None)])
def test_second_hopf(n, F2, mode):
    rep = second_hopf(P3, n)
    tol = 5e-7 if mode else 5e-5
    assert abs(rep.F1 - F2) < tol
    if mode:
        assert rep.mode_k == mode
        assert abs(rep.F1 - 1 / (math.cos(2 * math.pi / 9) + math.sin(math.pi / 9))) < 1e-12


def test_lyapunov_general_matches_specialized():
    for n in range(5, 101):
        if first_hopf(P3, n).tie:
            continue
        rep = first_lyapunov(G3, n)
        assert rep.I1 < 0 and rep.supercritical
        assert abs(rep.I1 - lyapunov_l96(n)) <= 1e-12


def test_lyapunov_n4_n36():
    assert first_lyapunov(G3, 4).I1 < 0
    assert abs(first_lyapunov(G3, 36).I1 + 0.0709) < 1e-4


@pytest.mark.parametrize("g", [G5, G6], ids=["G5", "G6"])
def test_other_maps_supercritical(g):
    for n in (20, 36, 50):
        assert first_lyapunov(g, n).I1 < 0


@pytest.mark.parametrize("name", ["G3", "G5", "G6", "~G3"])
def test_hopf_point_invariant(name):
    p = laurent_of(named(name.lstrip("~")) if not name.startswith("~") else tilde(named(name[1:])))
    for n in range(8, 60):
        rep = first_hopf(p, n)
        assert abs(rep.F1 * p(rep.z1) - 1 - 1j * rep.tau0) <= 1e-12


TABLE1 = {
    "G1": ("none", "pitchfork"), "G2": ("none", "pitchfork"), "G3": ("hopf", "pitchfork"),
    "G4": ("none", "pitchfork"), "G5": ("hopf", "hopf"), "G6": ("hopf", "pitchfork"),
    "G7": ("none", "none"), "G8": ("pitchfork", "pitchfork"),
}


@pytest.mark.parametrize("name", sorted(TABLE1))
def test_first_bifurcation_table(name):
    p = laurent_of(named(name))
    assert (first_bifurcation(p, 36, +1), first_bifurcation(p, 36, -1)) == TABLE1[name]


def test_odd_n_turns_pitchfork_into_hopf():
    assert first_bifurcation(P3, 35, -1) == "hopf"


def test_criteria_2local():
    c = hopf_criteria_2local(P3, 36)
    assert c.condition1 and c.condition2
    assert abs(c.s1 - math.acos(0.25) / (2 * math.pi)) < 1e-15
    assert (c.first_bif_type_Fpos, c.first_bif_type_Fneg) == ("hopf", "pitchfork")
    c1 = hopf_criteria_2local(laurent_of(G1), 36)
    assert not c1.has_hopf_Fpos and c1.first_bif_type_Fneg == "pitchfork"
    with pytest.raises(ValueError):
        hopf_criteria_2local(laurent_of(named("G4")))


def test_wave_signs_and_reflection():
    w = wave_diagnostics(P3, 36)
    assert w.phase_velocity < 0 < w.group_velocity
    assert w.wavelength_sites > 4
    assert 0 < w.s1 < 0.25
    assert abs(w.phase_velocity + 0.8535) < 1e-3 and abs(w.group_velocity - 1.532) < 1e-3
    wt = wave_diagnostics(laurent_of(tilde(G3)), 36)
    assert wt.phase_velocity > 0
    assert abs(wt.phase_velocity + w.phase_velocity) < 1e-12


def test_perturbation_matrix():
    n, l = 14, 5
    c = perturbation_matrix(n, l)
    assert c.dtype == float and np.allclose(c, c.T)
    assert np.allclose(c[1], np.roll(c[0], 1))
    assert np.linalg.matrix_rank(c) == 2
    for j in range(n):
        q = fourier_column(n, j)
        want = q if j in (l, n - l) else 0 * q
        np.testing.assert_allclose(c @ q, want, atol=1e-12)
    for bad in (0, 7, 14):
        with pytest.raises(ValueError):
            perturbation_matrix(n, bad)


@pytest.mark.parametrize("n", [14, 18, 22, 28, 36])
def test_hopf_hopf_eigenstructure(n):
    h = hopf_hopf(G3, n)
    assert abs(h.alpha0 - (h.F2 - h.F1) / h.F2) < 1e-15
    a = h.F1 * linearize_at(G3, np.ones(n)) - np.eye(n) + h.alpha0 * perturbation_matrix(n, h.mode_l)
    ev = np.linalg.eigvals(a)
    on_axis = np.abs(ev.real) <= 1e-10
    assert on_axis.sum() == 4
    assert np.all(ev[~on_axis].real < -1e-8)
    np.testing.assert_allclose(np.sort(np.abs(ev[on_axis].imag)), np.repeat(sorted([h.tau1, h.tau2]), 2), atol=1e-10)


def test_hopf_hopf_n36_and_tie():
    h = hopf_hopf(G3, 36)
    assert (h.mode_k, h.mode_l, h.m1, h.m2) == (8, 7, 9, 36)
    assert h.simple and h.type_one
    assert abs(h.F3_star - 0.9094) < 5e-4
    t = hopf_hopf(G3, 12)
    assert abs(t.alpha0) < 1e-15 and t.F3_star == t.F1 and t.slope is None


@pytest.mark.slow
def test_amplitude_scaling_oracle():
    rep = first_lyapunov(G3, 36)
    q = fourier_column(36, rep.mode_k).real
    ds = np.array([0.01, 0.02, 0.04])
    amp2 = []
    for d in ds:
        F = rep.F1 + d
        tr = integrate_adaptive(SystemSpec.standard(36, F), F + 0.3 * q, 0, 1500, dt_out=0.1)
        amp2.append(np.mean(np.sum((tr.window(1400, 1500).states - F) ** 2, axis=1)))
    slope = np.polyfit(ds, amp2, 1)[0]
    assert abs(slope / amplitude_slope(rep) - 1) < 0.2


# properties

@given(st.integers(5, 120))
def test_first_hopf_is_max_real_part(n):
    rep = first_hopf(P3, n)
    j = np.arange(1, (n + 1) // 2)
    assert abs(1 / rep.F1 - P3(np.exp(2j * np.pi * j / n)).real.max()) < 1e-12
    assert abs(rep.F1 * P3(rep.z1) - 1 - 1j * rep.tau0) <= 1e-12


@given(st.integers(8, 100))
def test_second_hopf_not_before_first(n):
    assert second_hopf(P3, n).F1 >= first_hopf(P3, n).F1 - 1e-15
