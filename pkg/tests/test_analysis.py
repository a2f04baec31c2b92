import cmath
import math

import numpy as np
import pytest

from jcfeedback import (
    KernelDomainError,
    ModelKind,
    ParameterError,
    SeriesPrecisionError,
    SeriesSolution,
    char_eval,
    characteristic_function,
    dm_rabi_diagnostic,
    find_poles,
    make_params,
    normal_modes,
    series_cm,
    series_dm,
    simulate_cm,
    simulate_dm_delay,
    spectrum,
    steady_state_dm,
)


def _params(gamma=1.0, kappa=1.0, kappa1=0.0, tau=1.0, phi=0.0):
    return make_params(gamma=gamma, kappa=kappa, kappa1=kappa1, tau=tau, phi=phi)


# characteristic functions ---------------------------------------------------

def test_markov_interval_root():
    p = _params(gamma=0.6, kappa=1.0)
    cf = characteristic_function(p, ModelKind.CONTINUOUS_MODE, n=0)
    root = -p.kappa + math.sqrt(p.kappa**2 - p.gamma**2)
    assert abs(char_eval(cf, root)) < 1e-14


def test_cm_at_zero_detuning_origin():
    p = _params(gamma=1.3, phi=0.0)
    cf = characteristic_function(p, ModelKind.CONTINUOUS_MODE)
    assert char_eval(cf, 0.0) == pytest.approx(p.gamma**2)


def test_dm_single_interval_formula():
    p = _params(gamma=1.1, kappa=0.8, kappa1=0.2, tau=1.7, phi=0.9)
    cf = characteristic_function(p, ModelKind.DISCRETE_MODE_DELAY, n=1)
    s = 0.3 + 0.7j
    x = cmath.exp(-(s + 1j * p.delta0) * p.tau)
    expected = s * s + p.gamma**2 + 2 * p.kappa * s * (1 - 2 * x) + 2 * p.kappa1 * s
    assert cf(s) == pytest.approx(expected, rel=1e-14)


def test_dm_summed_kernel_closed_form():
    p = _params(gamma=1.0, kappa=1.0, tau=1.2, phi=0.4)
    cf = characteristic_function(p, ModelKind.DISCRETE_MODE_DELAY, n=None)
    s = 0.5 + 0.3j   # inside the convergence region
    x = cmath.exp(-(s + 1j * p.delta0) * p.tau)
    expected = s * s + p.gamma**2 + 2 * p.kappa * s * (1 - x) / (1 + x)
    assert cf(s) == pytest.approx(expected, rel=1e-14)
    # the closed kernel equals the deep finite-interval sum where it converges
    cf_deep = characteristic_function(p, ModelKind.DISCRETE_MODE_DELAY, n=200)
    assert cf(s) == pytest.approx(cf_deep(s), rel=1e-12)


def test_dm_kernel_pole_raises():
    p = _params(phi=math.pi)
    cf = characteristic_function(p, ModelKind.DISCRETE_MODE_DELAY, n=None)
    with pytest.raises(KernelDomainError):
        cf(0.0)   # e^{-i*phi} = -1 at s = 0


@pytest.mark.parametrize("kind,n", [
    (ModelKind.CONTINUOUS_MODE, None),
    (ModelKind.CONTINUOUS_MODE, 0),
    (ModelKind.DISCRETE_MODE_DELAY, 3),
    (ModelKind.DISCRETE_MODE_DELAY, None),
])
def test_characteristic_derivative_matches_finite_difference(kind, n):
    p = _params(gamma=0.9, kappa=1.1, kappa1=0.15, tau=0.8, phi=1.3)
    cf = characteristic_function(p, kind, n=n)
    s = 0.4 + 0.9j
    h = 1e-6
    numeric = (cf(s + h) - cf(s - h)) / (2 * h)
    assert cf.derivative(s) == pytest.approx(numeric, rel=1e-6)


# pole finding ---------------------------------------------------------------

def test_find_poles_quadratic_roots_randomized():
    rng = np.random.default_rng(5)
    for _ in range(100):
        gamma = 10.0 ** rng.uniform(-0.5, 0.5)
        kappa = 10.0 ** rng.uniform(-0.5, 0.5)
        if abs(gamma**2 - kappa**2) < 0.05 * kappa**2:
            kappa *= 1.5   # keep away from the degenerate double root
        p = _params(gamma=gamma, kappa=kappa)
        cf = characteristic_function(p, ModelKind.CONTINUOUS_MODE, n=0)
        omega2 = complex(gamma**2 - kappa**2)
        expected = (-kappa + 1j * cmath.sqrt(omega2),
                    -kappa - 1j * cmath.sqrt(omega2))
        rate = max(gamma, kappa)
        roots = find_poles(cf, (-3 * rate, 0.5 * rate, -2 * rate, 2 * rate), grid=10)
        assert len(roots) == 2
        for want in expected:
            assert min(abs(r.s - want) for r in roots) < 1e-10 * rate


def test_find_poles_flags_double_root():
    p = _params(gamma=1.0, kappa=1.0)
    cf = characteristic_function(p, ModelKind.CONTINUOUS_MODE, n=0)
    roots = find_poles(cf, (-3.0, 0.5, -1.0, 1.0), grid=10)
    assert len(roots) == 1
    assert roots[0].multiplicity == 2
    assert abs(roots[0].s + 1.0) < 1e-6


def test_find_poles_cm_marginal_roots_at_stabilization():
    # kappa*tau = pi and (delta0 + gamma)*tau = 2*pi put roots at +-i*gamma
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi, phi=math.pi)
    cf = characteristic_function(p, ModelKind.CONTINUOUS_MODE)
    roots = find_poles(cf, (-1.0, 1.0, -3.0, 3.0), grid=20)
    marginal = sorted((r.s for r in roots if abs(r.s.real) < 1e-8),
                      key=lambda z: z.imag)
    assert len(marginal) == 2
    assert abs(marginal[0] + 1j * p.gamma) < 1e-8
    assert abs(marginal[1] - 1j * p.gamma) < 1e-8


def test_find_poles_dm_summed_kernel_admits_no_boundary_roots():
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi, phi=math.pi)
    cf = characteristic_function(p, ModelKind.DISCRETE_MODE_DELAY, n=None)
    box = (-1.0, 1.0, -3.0, 3.0)
    assert find_poles(cf, box, grid=20) == []
    # the raw continuation does place roots on the axis; they are rejected
    # because the defining tap series never converges there
    raw = find_poles(cf, box, grid=20, require_series_convergence=False)
    assert any(abs(r.s - 1j * p.gamma) < 1e-8 for r in raw)
    assert all(abs(r.s.real) < 1e-8 for r in raw)


def test_find_poles_box_validation():
    p = _params()
    cf = characteristic_function(p, ModelKind.CONTINUOUS_MODE, n=0)
    with pytest.raises(ParameterError):
        find_poles(cf, (1.0, -1.0, -1.0, 1.0))
    with pytest.raises(ParameterError):
        find_poles(cf, (-math.inf, 1.0, -1.0, 1.0))


# stability partial sums -----------------------------------------------------

def test_rabi_diagnostic_alternating_case():
    # (mu + delta0)*tau = 0: partial sums alternate 1, 0, 1, 0, ...
    p = _params(tau=1.0, phi=-1.0)
    sums = dm_rabi_diagnostic(p, mu=1.0, n_max=9)
    assert np.allclose(sums, [1, 0, 1, 0, 1, 0, 1, 0, 1, 0])


def test_rabi_diagnostic_divergent_case():
    # (mu + delta0)*tau = pi: every term is +1
    p = _params(tau=1.0, phi=0.0)
    sums = dm_rabi_diagnostic(p, mu=math.pi, n_max=9)
    assert np.allclose(sums, np.arange(1, 11))


def test_rabi_diagnostic_generic_phase_keeps_oscillating():
    p = _params(tau=1.0, phi=0.37)
    sums = dm_rabi_diagnostic(p, mu=1.0, n_max=10000)
    assert float(np.var(sums[5000:])) >= 0.01


# steady state and normal modes ----------------------------------------------

def test_steady_state_trapped_value():
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi / 3, phi=math.pi)
    assert steady_state_dm(p) == pytest.approx(1.0 / (1.0 + math.pi / 12.0), rel=1e-15)


def test_steady_state_vanishes_for_long_delay():
    p = _params(gamma=1.0, kappa=1.0, tau=1e6, phi=math.pi)
    assert steady_state_dm(p) < 1e-5


def test_steady_state_decoupled_atom():
    assert steady_state_dm(_params(gamma=0.0, phi=0.4)) == 1.0


def test_steady_state_zero_off_resonant_phase():
    assert steady_state_dm(_params(gamma=1.0, phi=0.5 * math.pi)) == 0.0
    assert steady_state_dm(_params(gamma=1.0, phi=3 * math.pi)) > 0.0


def test_normal_modes_symmetric_case():
    modes = normal_modes(1.0, 1.0)
    assert modes.xi == pytest.approx(math.sqrt(2.0))
    assert modes.dark_overlap == pytest.approx(0.5)


def test_normal_modes_decoupled_atom_is_dark():
    modes = normal_modes(0.0, 2.0)
    assert modes.dark_overlap == pytest.approx(1.0)
    np.testing.assert_allclose(modes.modes[2], [-1.0, 0.0, 0.0], atol=1e-15)


def test_normal_modes_rejects_double_zero():
    with pytest.raises(ParameterError):
        normal_modes(0.0, 0.0)


def test_normal_modes_orthonormal_and_dark_avoids_lossy_cavity():
    rng = np.random.default_rng(2)
    for _ in range(25):
        gamma = 10.0 ** rng.uniform(-1, 1)
        big_g = 10.0 ** rng.uniform(-1, 1)
        modes = normal_modes(gamma, big_g)
        gram = modes.modes @ modes.modes.T
        assert np.max(np.abs(gram - np.eye(3))) < 1e-14
        assert abs(modes.modes[2, 1]) < 1e-14
        assert modes.energies[0] == -modes.energies[1] == modes.xi
        assert modes.energies[2] == 0.0


def test_steady_state_equals_dark_overlap():
    rng = np.random.default_rng(9)
    for _ in range(100):
        p = _params(gamma=10.0 ** rng.uniform(-1, 1),
                    kappa=10.0 ** rng.uniform(-1, 1),
                    tau=10.0 ** rng.uniform(-1, 1.5), phi=math.pi)
        modes = normal_modes(p.gamma, p.mode_coupling)
        assert abs(steady_state_dm(p) - modes.dark_overlap) < 1e-12


# spectra ----------------------------------------------------------------

def test_spectrum_requires_emission_channel():
    p = _params(kappa1=0.0)
    with pytest.raises(ParameterError):
        spectrum(p, ModelKind.NO_FEEDBACK, np.linspace(-1, 1, 5))
    with pytest.raises(ParameterError):
        spectrum(_params(kappa1=0.5), ModelKind.DISCRETE_MODE_SUM,
                 np.linspace(-1, 1, 5))


def test_spectrum_no_feedback_resonance_value():
    p = _params(gamma=1.2, kappa=0.7, kappa1=0.4)
    spec = spectrum(p, ModelKind.NO_FEEDBACK, np.array([0.0]))
    assert spec.values[0] == pytest.approx(2 * p.kappa1 / (math.pi * p.gamma**2),
                                           rel=1e-15)


def test_spectrum_dm_zeros_at_tangent_poles():
    p = _params(gamma=1.0, kappa=1.0, kappa1=0.5, tau=1.0, phi=math.pi)
    # omega*tau - phi equals an odd multiple of pi, including omega = 0
    omegas = np.array([0.0, 2 * math.pi / p.tau, -4 * math.pi / p.tau, 0.37])
    spec = spectrum(p, ModelKind.DISCRETE_MODE_DELAY, omegas)
    assert spec.values[0] == 0.0
    assert spec.values[1] == 0.0
    assert spec.values[2] == 0.0
    assert spec.values[3] > 0.0


def test_spectrum_dm_matches_direct_tangent_form():
    p = _params(gamma=1.0, kappa=0.8, kappa1=0.4, tau=1.3, phi=2.1)
    omegas = np.linspace(-7.0, 7.0, 301)
    spec = spectrum(p, ModelKind.DISCRETE_MODE_DELAY, omegas)
    tan = np.tan((omegas * p.tau - p.phi) / 2.0)
    direct = (2 * p.gamma**2 * p.kappa1 / math.pi) / (
        (omegas**2 - p.gamma**2 + 2 * p.kappa * omegas * tan) ** 2
        + 4 * p.kappa1**2 * omegas**2)
    mask = np.abs(np.cos((omegas * p.tau - p.phi) / 2.0)) > 0.1
    np.testing.assert_allclose(spec.values[mask], direct[mask], rtol=1e-10)


def test_spectrum_cm_reduces_to_closed_channel_line():
    p = _params(gamma=1.0, kappa=1.0, kappa1=10.0, tau=1e-6, phi=0.0)
    w = np.linspace(-10.0, 10.0, 2001)
    s_cm = spectrum(p, ModelKind.CONTINUOUS_MODE, w).values
    limit = (2 * p.gamma**2 * p.kappa1 / math.pi) / (
        (w**2 - p.gamma**2) ** 2 + 4 * p.kappa1**2 * w**2)
    assert np.max(np.abs(s_cm - limit) / limit) < 1e-6


def test_spectrum_nonnegative_everywhere():
    p = _params(gamma=1.0, kappa=1.0, kappa1=0.5, tau=2.0, phi=1.0)
    w = np.linspace(-60, 60, 5001)
    for kind in (ModelKind.NO_FEEDBACK, ModelKind.CONTINUOUS_MODE,
                 ModelKind.DISCRETE_MODE_DELAY):
        assert np.all(spectrum(p, kind, w).values >= 0.0)


# series solutions -------------------------------------------------------

def test_series_zero_time():
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi / 3, phi=math.pi)
    assert series_cm(p, 0.0) == 0.0
    assert series_dm(p, 0.0) == 0.0


def test_series_first_interval_is_degenerate_markov_solution():
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi / 3, phi=math.pi)
    for frac in (0.2, 0.5, 0.9):
        t = frac * p.tau
        expected = 1j * p.kappa * t * math.exp(-p.kappa * t)
        assert series_cm(p, t) == pytest.approx(expected, rel=1e-12)
        assert series_dm(p, t) == pytest.approx(expected, rel=1e-12)


def test_series_match_integrators_past_first_roundtrip():
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi / 3, phi=math.pi)
    cm = simulate_cm(p, 2.6 * p.tau, 1000)
    dm = simulate_dm_delay(p, 2.6 * p.tau, 1000)
    j = cm.index_of(round(2.5 * p.tau / cm.dt) * cm.dt)
    t = cm.times[j]
    assert abs(series_cm(p, t) - cm.c_g[j]) < 1e-5
    assert abs(series_dm(p, t) - dm.c_g[j]) < 1e-5


def test_series_generic_phase_against_integrator():
    p = _params(gamma=1.0, kappa=1.0, tau=0.9, phi=0.6)
    dm = simulate_dm_delay(p, 2.0, 1000)
    cm = simulate_cm(p, 2.0, 1000)
    j = dm.index_of(round(1.8 / dm.dt) * dm.dt)
    assert abs(series_dm(p, dm.times[j]) - dm.c_g[j]) < 1e-5
    assert abs(series_cm(p, cm.times[j]) - cm.c_g[j]) < 1e-5


def test_series_requires_matched_rates():
    with pytest.raises(ParameterError):
        series_cm(_params(gamma=1.2, kappa=1.0), 0.5)
    with pytest.raises(ParameterError):
        series_dm(_params(gamma=1.0, kappa=1.0, kappa1=0.1), 0.5)


def test_series_reports_precision_horizon():
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi / 3, phi=math.pi)
    with pytest.raises(SeriesPrecisionError):
        series_dm(p, 80.0 * p.tau)


def test_series_solution_wrapper():
    p = _params(gamma=1.0, kappa=1.0, tau=math.pi / 3, phi=math.pi)
    sol = SeriesSolution(kind=ModelKind.DISCRETE_MODE_DELAY, params=p)
    t = 0.4 * p.tau
    assert sol(t) == series_dm(p, t)
    with pytest.raises(ParameterError):
        SeriesSolution(kind=ModelKind.NO_FEEDBACK, params=p)
