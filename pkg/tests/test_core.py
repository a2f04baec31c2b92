import math

import numpy as np
import pytest

from jcfeedback import (
    FeedbackParams,
    ParameterError,
    Spectrum,
    Trajectory,
    is_odd_pi_phase,
    make_params,
    regime_label,
)


def test_make_params_basic_fields():
    p = make_params(gamma=1.0, kappa=1.0, kappa1=0.0, tau=math.pi, phi=math.pi)
    assert p.kappa_tau == math.pi
    assert p.gamma_over_kappa == 1.0
    assert p.delta0 == 1.0
    assert p.total_decay == 1.0


def test_trapping_parameter_eta():
    p = make_params(gamma=1.0, kappa=1.0, kappa1=0.5, tau=math.pi / 3, phi=math.pi)
    assert p.eta == pytest.approx(math.pi / 12, rel=0, abs=1e-16)


def test_mode_coupling_value():
    p = make_params(gamma=0.3, kappa=2.0, kappa1=0.0, tau=0.5, phi=0.0)
    assert p.mode_coupling == pytest.approx(2.0 * math.sqrt(2.0 / 0.5), rel=1e-15)


@pytest.mark.parametrize("kwargs", [
    dict(gamma=1.0, kappa=0.0, kappa1=0.0, tau=1.0, phi=0.0),
    dict(gamma=-1.0, kappa=1.0, kappa1=0.0, tau=1.0, phi=0.0),
    dict(gamma=1.0, kappa=1.0, kappa1=-0.1, tau=1.0, phi=0.0),
    dict(gamma=1.0, kappa=1.0, kappa1=0.0, tau=0.0, phi=0.0),
    dict(gamma=1.0, kappa=1.0, kappa1=0.0, tau=-2.0, phi=0.0),
    dict(gamma=math.nan, kappa=1.0, kappa1=0.0, tau=1.0, phi=0.0),
    dict(gamma=1.0, kappa=math.inf, kappa1=0.0, tau=1.0, phi=0.0),
])
def test_make_params_rejects_bad_inputs(kwargs):
    with pytest.raises(ParameterError):
        make_params(**kwargs)


def test_phase_detuning_round_trip():
    rng = np.random.default_rng(3)
    for _ in range(50):
        tau = 10.0 ** rng.uniform(-2, 2)
        phi = rng.uniform(-10, 10)
        p = make_params(gamma=1.0, kappa=1.0, kappa1=0.0, tau=tau, phi=phi)
        # delta0 is derived, so the product reconstructs phi to the last ulp
        assert p.delta0 * p.tau == pytest.approx(phi, rel=1e-15, abs=1e-300)


def test_regime_label_categories():
    p = make_params(gamma=10.0, kappa=1.0, kappa1=0.0, tau=0.01, phi=0.0)
    label = regime_label(p)
    assert (label.delay, label.coupling) == ("short-delay", "weak")

    p = make_params(gamma=1.0, kappa=1.0, kappa1=0.0, tau=100 * math.pi, phi=0.0)
    label = regime_label(p)
    assert (label.delay, label.coupling) == ("long-delay", "weak")

    p = make_params(gamma=1.0, kappa=1.0, kappa1=0.0, tau=1.0, phi=0.0)
    label = regime_label(p)
    assert (label.delay, label.coupling) == ("intermediate", "weak")

    p = make_params(gamma=10.5, kappa=1.0, kappa1=0.0, tau=1.0, phi=0.0)
    assert regime_label(p).coupling == "strong"
    p = make_params(gamma=0.05, kappa=1.0, kappa1=0.0, tau=1.0, phi=0.0)
    assert regime_label(p).coupling == "bad-cavity"


def test_odd_pi_phase_detection():
    assert is_odd_pi_phase(math.pi)
    assert is_odd_pi_phase(-math.pi)
    assert is_odd_pi_phase(3 * math.pi)
    assert not is_odd_pi_phase(0.0)
    assert not is_odd_pi_phase(2 * math.pi)
    assert not is_odd_pi_phase(0.5)


def test_trajectory_validation():
    t = np.linspace(0.0, 1.0, 11)
    z = np.zeros(11, dtype=complex)
    tr = Trajectory(times=t, c_e=z + 1.0, c_g=z)
    assert tr.dt == pytest.approx(0.1)
    assert np.allclose(tr.system_norm(), 1.0)
    assert tr.index_of(0.3) == 3
    with pytest.raises(ValueError):
        tr.index_of(0.35)

    with pytest.raises(ParameterError):
        Trajectory(times=t[::-1], c_e=z, c_g=z)
    with pytest.raises(ParameterError):
        Trajectory(times=np.concatenate([t[:5], t[6:]]), c_e=z[:10], c_g=z[:10])
    with pytest.raises(ParameterError):
        Trajectory(times=t, c_e=z[:5], c_g=z)


def test_spectrum_rejects_negative_values():
    w = np.linspace(-1, 1, 5)
    with pytest.raises(ParameterError):
        Spectrum(omegas=w, values=np.array([0.1, 0.2, -0.1, 0.2, 0.1]))


def test_params_are_immutable():
    p = make_params(gamma=1.0, kappa=1.0, kappa1=0.0, tau=1.0, phi=0.0)
    with pytest.raises(AttributeError):
        p.gamma = 2.0
