"""Parameter conventions and result containers shared by simulators and analysis.

Conventions
-----------
All rates (gamma, kappa, kappa1) are angular rates in units of 1/time and the
roundtrip delay tau is the one intrinsic timescale.  The feedback phase phi is
the canonical input; the central-mode detuning delta0 = phi/tau is always
derived from it, never stored separately.  The per-mode coupling of the
discrete reservoir is fixed by kappa and tau alone, g = 2*sqrt(kappa/tau).

Two dimensionless numbers classify the physics: the delay parameter kappa*tau
and the coupling parameter gamma/kappa.  The thresholds used by
``regime_label`` (0.1 and 10) are informational only and never branch any
physics code.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

SHORT_DELAY_MAX = 0.1
LONG_DELAY_MIN = 10.0
BAD_CAVITY_MAX = 0.1
STRONG_COUPLING_MIN = 10.0


class ParameterError(ValueError):
    """Raised when a physical parameter set fails validation."""


def _require_finite(name, value):
    if not math.isfinite(value):
        raise ParameterError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class FeedbackParams:
    """Physical parameter set of the feedback problem.

    Attributes
    ----------
    gamma : float
        Atom-cavity coupling rate, >= 0.
    kappa : float
        Coupling rate into the feedback channel, > 0.
    kappa1 : float
        Extra loss (detection) channel rate, >= 0.
    tau : float
        Roundtrip delay of the feedback loop, > 0.
    phi : float
        Feedback phase accumulated by the central reservoir mode over one
        roundtrip; the detuning delta0 = phi/tau is derived.
    """

    gamma: float
    kappa: float
    kappa1: float
    tau: float
    phi: float

    def __post_init__(self):
        for name in ("gamma", "kappa", "kappa1", "tau", "phi"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ParameterError(f"{name} must be a real number, got {value!r}")
            _require_finite(name, float(value))
            object.__setattr__(self, name, float(value))
        if self.gamma < 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if self.kappa <= 0:
            raise ParameterError(f"kappa must be > 0, got {self.kappa}")
        if self.kappa1 < 0:
            raise ParameterError(f"kappa1 must be >= 0, got {self.kappa1}")
        if self.tau <= 0:
            raise ParameterError(f"tau must be > 0, got {self.tau}")

    @property
    def delta0(self) -> float:
        """Detuning of the central reservoir mode, phi/tau."""
        return self.phi / self.tau

    @property
    def kappa_tau(self) -> float:
        return self.kappa * self.tau

    @property
    def gamma_over_kappa(self) -> float:
        return self.gamma / self.kappa

    @property
    def eta(self) -> float:
        """Trapping parameter gamma^2*tau/(4*kappa)."""
        return self.gamma**2 * self.tau / (4.0 * self.kappa)

    @property
    def mode_coupling(self) -> float:
        """Per-mode coupling of the discrete reservoir, 2*sqrt(kappa/tau)."""
        return 2.0 * math.sqrt(self.kappa / self.tau)

    @property
    def total_decay(self) -> float:
        """Combined cavity loss rate kappa + kappa1."""
        return self.kappa + self.kappa1


def make_params(gamma, kappa, kappa1, tau, phi) -> FeedbackParams:
    """Validate and build a :class:`FeedbackParams`.

    Raises :class:`ParameterError` on non-finite inputs, negative rates,
    kappa <= 0, or tau <= 0.
    """
    return FeedbackParams(gamma=gamma, kappa=kappa, kappa1=kappa1, tau=tau, phi=phi)


@dataclass(frozen=True)
class RegimeLabel:
    """Dimensionless regime descriptors with categorical tags."""

    kappa_tau: float
    gamma_over_kappa: float
    delay: str      # "short-delay" | "intermediate" | "long-delay"
    coupling: str   # "bad-cavity" | "weak" | "strong"


def regime_label(params: FeedbackParams) -> RegimeLabel:
    """Classify a parameter set by (kappa*tau, gamma/kappa).

    short-delay: kappa*tau < 0.1, long-delay: kappa*tau > 10;
    strong coupling: gamma/kappa > 10, bad-cavity: gamma/kappa < 0.1.
    Everything else is intermediate/weak.  Informational only.
    """
    kt = params.kappa_tau
    gk = params.gamma_over_kappa
    if kt < SHORT_DELAY_MAX:
        delay = "short-delay"
    elif kt > LONG_DELAY_MIN:
        delay = "long-delay"
    else:
        delay = "intermediate"
    if gk > STRONG_COUPLING_MIN:
        coupling = "strong"
    elif gk < BAD_CAVITY_MAX:
        coupling = "bad-cavity"
    else:
        coupling = "weak"
    return RegimeLabel(kappa_tau=kt, gamma_over_kappa=gk, delay=delay, coupling=coupling)


def is_odd_pi_phase(phi: float, tol: float = 1e-9) -> bool:
    """True when phi is an odd multiple of pi within tol (radians)."""
    return abs(math.remainder(phi / math.pi - 1.0, 2.0)) * math.pi < tol


@dataclass(frozen=True)
class Trajectory:
    """Complex atomic and cavity amplitudes on a uniform time grid.

    times must be uniformly spaced starting at 0; c_e and c_g are the
    excited-atom and one-photon-cavity amplitudes at each sample.
    """

    times: np.ndarray
    c_e: np.ndarray
    c_g: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        c_e = np.asarray(self.c_e, dtype=complex)
        c_g = np.asarray(self.c_g, dtype=complex)
        if not (times.shape == c_e.shape == c_g.shape) or times.ndim != 1:
            raise ParameterError("times, c_e, c_g must be 1-d arrays of equal length")
        if times.size < 2:
            raise ParameterError("a trajectory needs at least two samples")
        steps = np.diff(times)
        if not np.all(steps > 0):
            raise ParameterError("times must be strictly increasing")
        if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ParameterError("times must be uniformly spaced")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "c_e", c_e)
        object.__setattr__(self, "c_g", c_g)

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])

    def system_norm(self) -> np.ndarray:
        """|c_e|^2 + |c_g|^2 at every sample."""
        return np.abs(self.c_e) ** 2 + np.abs(self.c_g) ** 2

    def index_of(self, t: float) -> int:
        """Grid index of time t (must lie on the grid within 1e-6 steps)."""
        idx = t / self.dt
        j = int(round(idx))
        if abs(idx - j) > 1e-6 or j < 0 or j >= self.times.size:
            raise ValueError(f"t={t} is not on the stored grid")
        return j


@dataclass(frozen=True)
class ModeRegister:
    """Truncated discrete-mode amplitudes with their detunings.

    amplitudes has shape (n_samples, n_modes), one row per trajectory sample;
    detunings[j] = (2*q+1)*pi/tau - delta0 for q = q_indices[j].
    """

    q_indices: np.ndarray
    detunings: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        q = np.asarray(self.q_indices, dtype=int)
        det = np.asarray(self.detunings, dtype=float)
        amp = np.asarray(self.amplitudes, dtype=complex)
        if q.ndim != 1 or det.shape != q.shape:
            raise ParameterError("q_indices and detunings must be matching 1-d arrays")
        if amp.ndim != 2 or amp.shape[1] != q.size:
            raise ParameterError("amplitudes must have shape (n_samples, n_modes)")
        object.__setattr__(self, "q_indices", q)
        object.__setattr__(self, "detunings", det)
        object.__setattr__(self, "amplitudes", amp)

    def mode_norm(self) -> np.ndarray:
        """Sum_q |c_{g,q}|^2 at every stored sample."""
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)


@dataclass(frozen=True)
class Spectrum:
    """Emission spectral density S(omega) >= 0 on a frequency grid."""

    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.omegas, dtype=float)
        s = np.asarray(self.values, dtype=float)
        if w.ndim != 1 or s.shape != w.shape:
            raise ParameterError("omegas and values must be matching 1-d arrays")
        if np.any(s < 0):
            raise ParameterError("spectral density must be nonnegative")
        object.__setattr__(self, "omegas", w)
        object.__setattr__(self, "values", s)


@dataclass(frozen=True)
class NormalModeSet:
    """Normal modes of the atom + two coupled single-mode cavities reduction.

    modes rows are the two bright states and the dark state over the basis
    (atom, cavity 1, cavity 2); energies are (+xi, -xi, 0) with
    xi = sqrt(gamma^2 + G^2); dark_overlap = G^2/xi^2 is the squared overlap
    of the initially excited atom with the dark state.
    """

    xi: float
    energies: np.ndarray
    modes: np.ndarray
    dark_overlap: float
