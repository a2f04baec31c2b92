"""Frozen scenario presets for the canonical demonstration runs.

Every preset is normalized to kappa = 1, so times are in units of 1/kappa
and the two dimensionless knobs kappa*tau and gamma/kappa are read directly
off the parameter fields.  Preset values are locked by tests; free-form runs
go through explicit CLI flags instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import FeedbackParams
from .models import ModelKind

_PI = math.pi


@dataclass(frozen=True)
class Scenario:
    """One reproducible simulation run: parameters, backends, grid."""

    name: str
    description: str
    params: FeedbackParams
    models: tuple[ModelKind, ...]
    t_max: float
    steps_per_delay: int
    n_modes: int | None = None
    report_steady_state: bool = False


SCENARIOS: dict[str, Scenario] = {}


def _add(scenario: Scenario) -> None:
    SCENARIOS[scenario.name] = scenario


_add(Scenario(
    name="fig-shortdelay-a",
    description=("short delay, constructive feedback phase: kappa*tau = 0.01, "
                 "gamma*tau = 0.1, phi = 2*pi; the two feedback types agree "
                 "closely while the no-feedback cavity decays"),
    params=FeedbackParams(gamma=10.0, kappa=1.0, kappa1=0.0, tau=0.01, phi=2 * _PI),
    models=(ModelKind.NO_FEEDBACK, ModelKind.CONTINUOUS_MODE, ModelKind.DISCRETE_MODE_DELAY),
    t_max=5.0,
    steps_per_delay=200,
))

_add(Scenario(
    name="fig-shortdelay-b",
    description=("short delay, destructive feedback phase: kappa*tau = 0.01, "
                 "gamma*tau = 0.1, phi = pi; multi-delay dynamics departs "
                 "from the single-delay case"),
    params=FeedbackParams(gamma=10.0, kappa=1.0, kappa1=0.0, tau=0.01, phi=_PI),
    models=(ModelKind.NO_FEEDBACK, ModelKind.CONTINUOUS_MODE, ModelKind.DISCRETE_MODE_DELAY),
    t_max=5.0,
    steps_per_delay=200,
))

_add(Scenario(
    name="fig-longdelay",
    description=("long delay pulse train: kappa*tau = gamma*tau = 100*pi, "
                 "phi = 2*pi; every roundtrip re-emits a pulse, and the "
                 "multi-delay micro-structure gains oscillations per trip"),
    params=FeedbackParams(gamma=1.0, kappa=1.0, kappa1=0.0, tau=100 * _PI, phi=2 * _PI),
    models=(ModelKind.NO_FEEDBACK, ModelKind.CONTINUOUS_MODE, ModelKind.DISCRETE_MODE_DELAY),
    t_max=3 * 100 * _PI + 30.0,
    steps_per_delay=4000,
))

_add(Scenario(
    name="fig-3tau",
    description=("intermediate delay over three roundtrips: kappa*tau = 5*pi, "
                 "gamma*tau = 10*pi, phi = pi; the two feedback types split "
                 "after the second roundtrip"),
    params=FeedbackParams(gamma=2.0, kappa=1.0, kappa1=0.0, tau=5 * _PI, phi=_PI),
    models=(ModelKind.CONTINUOUS_MODE, ModelKind.DISCRETE_MODE_DELAY),
    t_max=15 * _PI,
    steps_per_delay=1000,
))

_add(Scenario(
    name="fig-trapped",
    description=("excitation trapping with a leaky cavity: kappa*tau = "
                 "gamma*tau = pi/3, kappa1 = kappa/2, phi = pi; the "
                 "multi-delay atom retains 1/(1+eta) of its amplitude while "
                 "the single-delay atom decays away"),
    params=FeedbackParams(gamma=1.0, kappa=1.0, kappa1=0.5, tau=_PI / 3, phi=_PI),
    models=(ModelKind.NO_FEEDBACK, ModelKind.CONTINUOUS_MODE, ModelKind.DISCRETE_MODE_DELAY),
    t_max=200.0,
    steps_per_delay=600,
    report_steady_state=True,
))

_add(Scenario(
    name="fig-trapped-inset",
    description=("stabilized oscillations for single-delay feedback: "
                 "kappa*tau = gamma*tau = pi, phi = pi, kappa1 = 0, so "
                 "(delta0 + gamma)*tau = 2*pi puts a marginal pole on the "
                 "imaginary axis"),
    params=FeedbackParams(gamma=1.0, kappa=1.0, kappa1=0.0, tau=_PI, phi=_PI),
    models=(ModelKind.CONTINUOUS_MODE,),
    t_max=60 * _PI,
    steps_per_delay=1000,
))

_add(Scenario(
    name="fig-comparison",
    description=("cross-validation of the multi-delay kernel against the "
                 "truncated mode expansion: kappa*tau = gamma*tau = pi/3, "
                 "phi = pi, kappa1 = 0"),
    params=FeedbackParams(gamma=1.0, kappa=1.0, kappa1=0.0, tau=_PI / 3, phi=_PI),
    models=(ModelKind.DISCRETE_MODE_DELAY, ModelKind.DISCRETE_MODE_SUM),
    t_max=10 * _PI / 3,
    steps_per_delay=400,
    n_modes=400,
))


@dataclass(frozen=True)
class SpectrumScenario:
    """Spectrum preset; kappa*tau is deliberately left to the caller."""

    name: str
    description: str
    gamma: float
    kappa: float
    kappa1: float
    phi: float


SPECTRUM_SCENARIOS: dict[str, SpectrumScenario] = {
    "fig-spectrum-short": SpectrumScenario(
        name="fig-spectrum-short",
        description=("emission spectra through the detection channel with "
                     "kappa1 = kappa/2, gamma = kappa, phi = pi; the delay "
                     "kappa*tau must be supplied via --kappa-tau"),
        gamma=1.0,
        kappa=1.0,
        kappa1=0.5,
        phi=_PI,
    ),
}
