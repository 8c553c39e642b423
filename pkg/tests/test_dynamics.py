import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from l96gen.dynamics import (
    InvariantSet, SystemSpec, Trajectory, audit, effective_forcing, energy, energy_loss_rate,
    integrate_adaptive, integrate_rk4, large_forcing_spec, reduce_n4, reduce_n6, rescale, rhs,
    sine_initial,
)
from l96gen.gmap import G3, G7, tilde
from l96gen.integrate import BlowUpError

SYM = G3 - tilde(G3)


def inhomogeneous_loop(x, a, b, g):
    n = len(x)
    return np.array([a[i] * x[(i - 1) % n] * (x[(i + 1) % n] - x[(i - 2) % n]) - b[i] * x[i] + g[i]
                     for i in range(n)])


def test_rhs_constant_state_is_stationary():
    assert np.allclose(rhs(SystemSpec.standard(36, 8.0), 0.0, 8.0 * np.ones(36)), 0)


def test_rhs_period_two_inviscid_n6():
    spec = SystemSpec.inviscid_system(6, SYM)
    assert np.allclose(rhs(spec, 0.0, np.array([1.0, -3.0] * 3)), 0)


def test_rhs_matches_scalar_loop(rng):
    n = 11
    a, b, g, x = rng.uniform(0.5, 2, n), rng.uniform(0.5, 2, n), rng.normal(size=n), rng.normal(size=n)
    spec = SystemSpec(n, G3, a, b, g)
    np.testing.assert_allclose(rhs(spec, 0.0, x), inhomogeneous_loop(x, a, b, g), atol=1e-13)


def test_time_dependent_forcing():
    spec = SystemSpec(8, G3, 1.0, 1.0, lambda t: np.full(8, np.sin(t)))
    assert np.allclose(rhs(spec, np.pi / 2, np.zeros(8)), 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        SystemSpec(8, G3, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        SystemSpec(8, G3, 1.0, [1.0] * 7, 1.0)
    with pytest.raises(ValueError):
        SystemSpec(5, G3)
    with pytest.raises(ValueError):
        rhs(SystemSpec.standard(8, 1.0), 0, np.ones(9))
    with pytest.raises(ValueError):
        rhs(SystemSpec.standard(8, 1.0), 0, np.full(8, np.nan))


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory([0.0, 0.0], np.zeros((2, 3)))
    with pytest.raises(ValueError):
        Trajectory([0.0, 1.0], np.zeros((3, 3)))


def test_adaptive_agrees_with_fine_rk4(rng):
    spec = SystemSpec.standard(36, 2.0)
    x0 = 2 + 0.5 * rng.normal(size=36)
    a = integrate_adaptive(spec, x0, 0, 10, rtol=1e-11, atol=1e-13, dt_out=1.0)
    r = integrate_rk4(spec, x0, 0, 10, 0.001, every=1000)
    np.testing.assert_allclose(a.times, r.times, atol=1e-9)
    assert np.abs(a.states - r.states).max() < 1e-6


def test_zero_forcing_decays_exactly(rng):
    spec = SystemSpec.standard(20, 0.0)
    x0 = rng.normal(size=20) * 3
    # advection is energy neutral, so |x|^2 decays like exp(-2t); RK4 error is O(dt^4)
    errs = []
    for dt in (0.02, 0.01):
        tr = integrate_rk4(spec, x0, 0, 5, dt)
        errs.append(np.max(np.abs(energy(tr.states) / (energy(x0) * np.exp(-2 * tr.times)) - 1)))
    assert errs[1] < 1e-6
    assert 12 < errs[0] / errs[1] < 20
    assert energy(tr.final) < 1e-3 * energy(x0)


def test_rk4_f8_bounded():
    spec = SystemSpec.standard(36, 8.0)
    x0 = 8 + 0.08 * np.random.default_rng(0).standard_normal(36)
    tr = integrate_rk4(spec, x0, 0, 500, 0.05, every=20)
    assert np.all(np.isfinite(tr.states))
    assert np.sqrt(energy(tr.states)).max() <= 8 * 6 + 1e-6


def test_rescale_dual_simulation(rng):
    alpha, beta, gamma = 2.0, 1.0, 1.0
    F = effective_forcing(alpha, beta, gamma)
    assert F == 2.0
    x0 = F + rng.normal(size=12)
    std = integrate_adaptive(SystemSpec.standard(12, F), x0, 0, 20, 1e-12, 1e-13, dt_out=0.5)
    mapped = rescale(std, alpha, beta, gamma)
    X0 = (beta / alpha) * x0
    direct = integrate_adaptive(SystemSpec(12, G3, alpha, beta, gamma), X0, 0, 20, 1e-12, 1e-13, dt_out=0.5)
    assert np.abs(mapped.states - direct.states).max() < 1e-8
    assert mapped.solver_meta["rescaled"]["F"] == 2.0


def test_rescale_generic_triple(rng):
    alpha, beta, gamma = 0.7, 1.6, 3.0
    F = effective_forcing(alpha, beta, gamma)
    x0 = F + rng.normal(size=10)
    std = integrate_adaptive(SystemSpec.standard(10, F), x0, 0, 16, 1e-12, 1e-13, dt_out=1.6)
    mapped = rescale(std, alpha, beta, gamma)
    direct = integrate_adaptive(SystemSpec(10, G3, alpha, beta, gamma), (beta / alpha) * x0, 0, 10, 1e-12, 1e-13, dt_out=1.0)
    np.testing.assert_allclose(mapped.times, direct.times, atol=1e-12)
    assert np.abs(mapped.states - direct.states).max() < 1e-8


def test_rescale_identity_and_errors(rng):
    tr = Trajectory([0.0, 1.0], rng.normal(size=(2, 8)))
    same = rescale(tr, 1.0, 1.0, 1.0)
    np.testing.assert_array_equal(same.states, tr.states)
    with pytest.raises(ValueError):
        rescale(tr, 1.0, 0.0)
    assert effective_forcing(1, 1.5, 2) == pytest.approx(8 / 9)


def test_inviscid_time_scaling(rng):
    spec = SystemSpec.inviscid_system(12)
    x0 = rng.normal(size=12)
    lam = 2.5
    slow = integrate_adaptive(spec, x0, 0, 5 * lam, 1e-12, 1e-13, dt_out=lam)
    fast = integrate_adaptive(spec, lam * x0, 0, 5, 1e-12, 1e-13, dt_out=1.0)
    assert np.abs(fast.states - lam * slow.states).max() < 1e-6


def test_large_forcing_form_approaches_inviscid(rng):
    y0 = rng.normal(size=36)
    inv = integrate_adaptive(SystemSpec.inviscid_system(36), y0, 0, 1, 1e-11, 1e-12)
    errs = []
    for F in (1e2, 1e4):
        tr = integrate_adaptive(large_forcing_spec(36, F), y0, 0, 1, 1e-11, 1e-12)
        errs.append(np.abs(tr.final - inv.final).max())
    # the forcing term scales like F^(-1/3): a factor 4.6 over two decades
    assert errs[1] < errs[0] / 3


def test_audit_n6_symmetric():
    x0 = np.random.default_rng(7).normal(size=6)
    tr = integrate_adaptive(SystemSpec.inviscid_system(6, SYM), x0, 0, 100, 1e-10, 1e-12, dt_out=0.5)
    rep = audit(tr)
    assert "hamiltonian_n4" in rep.inapplicable
    for name in ("total_sum", "even_energy", "odd_energy", "stride3_sum_0", "stride3_sum_1", "stride3_sum_2"):
        assert rep.drift[name] < 1e-8


def test_audit_energy_g3(rng):
    tr = integrate_adaptive(SystemSpec.inviscid_system(20), rng.normal(size=20), 0, 50, 1e-10, 1e-12, dt_out=1.0)
    assert audit(tr, InvariantSet.standard().select("energy")).drift["energy"] < 1e-8
    with pytest.raises(KeyError):
        InvariantSet.standard().select("momentum")


def test_audit_n4_hamiltonian():
    spec = SystemSpec.inviscid_system(4, SYM, allow_aliasing=True)
    x0 = np.array([0.3, -1.2, 0.8, 0.5])
    tr = integrate_adaptive(spec, x0, 0, 50, 1e-10, 1e-12, dt_out=0.5)
    rep = audit(tr)
    assert rep.drift["hamiltonian_n4"] < 1e-8
    assert rep.drift["even_energy"] < 1e-8 and rep.drift["odd_energy"] < 1e-8


def test_reduce_n4_matches_direct(rng):
    x0 = rng.normal(size=4)
    red = reduce_n4(x0)
    assert not red.degenerate
    times = np.linspace(0, 20, 81)
    direct = integrate_adaptive(SystemSpec.inviscid_system(4, SYM, allow_aliasing=True), x0, 0, 20, 1e-11, 1e-12, dt_out=0.25)
    assert np.abs(red.reconstruct(times) - direct.states).max() < 1e-6
    a = red.angles(times)
    H = red.hamiltonian(a[:, 0], a[:, 1])
    assert np.ptp(H) < 1e-8


def test_reduce_n4_degenerate():
    red = reduce_n4([1.0, 0, 0, 0])
    assert red.degenerate
    spec = SystemSpec.inviscid_system(4, SYM, allow_aliasing=True)
    assert np.allclose(rhs(spec, 0, [1.0, 0, 0, 0]), 0)


def test_reduce_n6_matches_direct(rng):
    x0 = rng.normal(size=6)
    red = reduce_n6(x0)
    np.testing.assert_allclose(red.reconstruct([0.0])[0], x0, atol=1e-15)
    direct = integrate_adaptive(SystemSpec.inviscid_system(6, SYM), x0, 0, 50, 1e-11, 1e-12, dt_out=0.5)
    assert np.abs(red.reconstruct(direct.times) - direct.states).max() < 1e-6
    y = red.y(direct.times)
    assert np.ptp(np.linalg.norm(y, axis=1)) < 1e-12
    assert np.ptp(y @ red.c) < 1e-12


def test_reduce_n6_zero_c():
    x0 = np.array([1.0, 2.0, -0.5, -1.0, -2.0, 0.5])
    red = reduce_n6(x0)
    assert np.allclose(red.c, 0) and red.angular_speed == 0
    np.testing.assert_allclose(red.reconstruct([0.0, 10.0]), np.tile(x0, (2, 1)))


def test_energy_loss_helpers():
    x = sine_initial(36, 400.0)
    assert energy(x) == pytest.approx(400.0)
    tr = Trajectory([0.0, 10.0], np.stack([x, 0.9 * x]))
    assert energy_loss_rate(tr) == pytest.approx(100 * 0.19 / 10)


def test_blow_up_guard():
    # dissipation of the wrong sign is rejected, so drive the inviscid non-energy-preserving map
    from l96gen.gmap import GMap
    bad = SystemSpec(8, GMap.from_terms([(0, 0, 1)]), 1.0, 1.0, 0.0)
    with pytest.raises(BlowUpError):
        integrate_adaptive(bad, np.full(8, 3.0), 0, 10)


# properties

@pytest.mark.slow
@settings(max_examples=3)
@given(st.integers(0, 2**32 - 1), st.floats(0, 20), st.floats(1, 100))
def test_trajectories_stay_in_absorbing_ball(seed, F, radius):
    n = 36
    rng = np.random.default_rng(seed)
    x0 = rng.normal(size=n)
    x0 *= radius / np.linalg.norm(x0)
    tr = integrate_adaptive(SystemSpec.standard(n, F), x0, 0, 1000, dt_out=1.0)
    # d|x|^2/dt = -2|x|^2 + 2F sum x, so |x| cannot grow past max(|x0|, F sqrt(N))
    assert np.sqrt(energy(tr.states)).max() <= max(radius, F * np.sqrt(n)) * (1 + 1e-6)


@settings(max_examples=10)
@given(st.integers(0, 2**32 - 1))
def test_g7_inviscid_energy_conserved(seed):
    x0 = np.random.default_rng(seed).normal(size=10)
    tr = integrate_adaptive(SystemSpec.inviscid_system(10, G7), x0, 0, 10, 1e-10, 1e-12, dt_out=1.0)
    assert audit(tr).drift["energy"] < 1e-8
