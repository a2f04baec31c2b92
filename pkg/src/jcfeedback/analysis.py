"""Closed-form and semi-analytic results: Laplace-domain characteristic
functions and pole finding, the trapping steady state, normal modes of the
two-cavity reduction, emission spectra, and series solutions for gamma = kappa.

Laplace conventions (x = e^{-(s + i*delta0)*tau}):

continuous mode      D(s) = s^2 + gamma^2 + 2*kappa*s*(1 - x) + 2*kappa1*s
discrete, interval n D(s) = s^2 + gamma^2
                            + 2*kappa*s*{2*sum_{q=0..n} (-x)^q - 1} + 2*kappa1*s
discrete, n = inf    the geometric sum closes to 2/(1+x) - 1 = (1-x)/(1+x),
                     convergent for Re(s) > 0 and continued analytically
                     elsewhere (kernel poles at x = -1)

The cavity amplitude transform is i*gamma/D(s) and the roots of D are the
poles of the stability landscape.  For the discrete-mode infinite-interval
kernel, a root with Re(s) <= 0 is not a pole of the physical transform: the
defining tap series only converges for Re(s) > 0, and on the boundary the
per-interval partial sums oscillate without settling (see
``dm_rabi_diagnostic``), so such continuation roots are rejected by the pole
search unless explicitly requested.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .core import (
    FeedbackParams,
    NormalModeSet,
    ParameterError,
    Spectrum,
    is_odd_pi_phase,
)
from .models import ModelKind

KERNEL_POLE_TOL = 1e-13


class KernelDomainError(ValueError):
    """Evaluation requested at (or too close to) a pole of the summed kernel."""


class SeriesPrecisionError(RuntimeError):
    """The truncated series cannot deliver the requested precision at this time.

    Raised when alternating-term cancellation exceeds what double precision
    supports; use the delay-differential backend instead.
    """


@dataclass(frozen=True)
class CharacteristicFunction:
    """Denominator D(s) of the Laplace-domain cavity amplitude.

    kind is CONTINUOUS_MODE or DISCRETE_MODE_DELAY; n selects the validity
    interval for the discrete kernel (None means all roundtrips summed).
    n = 0 reduces both kinds to the Markovian quadratic.
    """

    kind: ModelKind
    params: FeedbackParams
    n: int | None = None

    def __post_init__(self):
        if self.kind not in (ModelKind.CONTINUOUS_MODE, ModelKind.DISCRETE_MODE_DELAY):
            raise ParameterError("characteristic functions exist for the cm and dm kinds")
        if self.n is not None and self.n < 0:
            raise ParameterError("interval index n must be >= 0 or None")

    def _x(self, s: complex) -> complex:
        p = self.params
        return cmath.exp(-(s + 1j * p.delta0) * p.tau)

    def __call__(self, s: complex) -> complex:
        p = self.params
        base = s * s + p.gamma**2 + 2.0 * p.kappa1 * s
        if self.n == 0:
            return base + 2.0 * p.kappa * s
        x = self._x(s)
        if self.kind is ModelKind.CONTINUOUS_MODE:
            return base + 2.0 * p.kappa * s * (1.0 - x)
        if self.n is None:
            one_plus = 1.0 + x
            if abs(one_plus) < KERNEL_POLE_TOL:
                raise KernelDomainError(
                    f"s={s:.6g} lies on a pole of the summed delay kernel")
            kernel = (1.0 - x) / one_plus
        else:
            partial = 0j
            term = 1.0 + 0j
            for _ in range(self.n + 1):
                partial += term
                term *= -x
            kernel = 2.0 * partial - 1.0
        return base + 2.0 * p.kappa * s * kernel

    def derivative(self, s: complex) -> complex:
        """dD/ds, analytic (dx/ds = -tau*x)."""
        p = self.params
        base = 2.0 * s + 2.0 * p.kappa1
        if self.n == 0:
            return base + 2.0 * p.kappa
        x = self._x(s)
        tau = p.tau
        if self.kind is ModelKind.CONTINUOUS_MODE:
            return base + 2.0 * p.kappa * (1.0 - x) + 2.0 * p.kappa * s * tau * x
        if self.n is None:
            one_plus = 1.0 + x
            if abs(one_plus) < KERNEL_POLE_TOL:
                raise KernelDomainError(
                    f"s={s:.6g} lies on a pole of the summed delay kernel")
            kernel = (1.0 - x) / one_plus
            dkernel = 2.0 * tau * x / (one_plus * one_plus)
        else:
            partial = 0j
            dpartial = 0j
            term = 1.0 + 0j
            for q in range(self.n + 1):
                partial += term
                if q >= 1:
                    dpartial += q * term / (-x) if x != 0 else 0.0
                term *= -x
            kernel = 2.0 * partial - 1.0
            dkernel = 2.0 * tau * x * dpartial
        return base + 2.0 * p.kappa * kernel + 2.0 * p.kappa * s * dkernel


def characteristic_function(params: FeedbackParams, kind: ModelKind,
                            n: int | None = None) -> CharacteristicFunction:
    """Build the characteristic function for a backend kind."""
    return CharacteristicFunction(kind=kind, params=params, n=n)


def char_eval(cf: CharacteristicFunction, s: complex) -> complex:
    """Evaluate D(s).

    For the discrete-mode kernel with n = None the defining series converges
    for Re(s) > 0 only; values elsewhere are its analytic continuation,
    undefined on the kernel poles (x = -1), where KernelDomainError is raised.
    """
    return cf(s)


class PoleResult(NamedTuple):
    s: complex
    multiplicity: int


def _newton_root(cf: CharacteristicFunction, seed: complex, scale: float,
                 max_iter: int = 80) -> complex | None:
    s = seed
    for _ in range(max_iter):
        try:
            value = cf(s)
            slope = cf.derivative(s)
        except KernelDomainError:
            return None
        if slope == 0:
            return None
        step = value / slope
        s = s - step
        if not (math.isfinite(s.real) and math.isfinite(s.imag)):
            return None
        if abs(s) > 1e6 * scale:
            return None
        if abs(step) < 1e-13 * max(scale, abs(s)):
            return s
    return s


def find_poles(cf: CharacteristicFunction, box, grid: int = 24,
               require_series_convergence: bool = True) -> list[PoleResult]:
    """Locate roots of D inside box = (re_min, re_max, im_min, im_max).

    Newton iterations are seeded from a grid x grid mesh over the box; roots
    are kept when |D| < 1e-10 * scale^2 with scale = max(gamma, kappa+kappa1,
    1/tau), deduplicated within 1e-6 * max(kappa, gamma), and flagged with
    multiplicity 2 when D' also vanishes there.

    For the discrete-mode kernel with n = None, candidates with Re(s) <= 0
    are rejected by default: the underlying tap series diverges there, so the
    continuation root is not a pole of the physical transform.  Pass
    require_series_convergence=False to inspect the raw continuation roots.
    """
    re_min, re_max, im_min, im_max = map(float, box)
    if not all(map(math.isfinite, (re_min, re_max, im_min, im_max))):
        raise ParameterError("search box bounds must be finite")
    if re_min >= re_max or im_min >= im_max:
        raise ParameterError("search box must have positive extent")
    p = cf.params
    scale = max(p.gamma, p.kappa + p.kappa1, 1.0 / p.tau)
    accept_tol = 1e-10 * scale * scale
    dedup = 1e-6 * max(p.kappa, p.gamma, 1e-300)
    margin = 1e-9 * scale
    filter_axis = (require_series_convergence
                   and cf.kind is ModelKind.DISCRETE_MODE_DELAY
                   and cf.n is None)

    roots: list[complex] = []
    res = np.linspace(re_min, re_max, grid)
    ims = np.linspace(im_min, im_max, grid)
    for re0 in res:
        for im0 in ims:
            root = _newton_root(cf, complex(re0, im0), scale)
            if root is None:
                continue
            if not (re_min - margin <= root.real <= re_max + margin
                    and im_min - margin <= root.imag <= im_max + margin):
                continue
            try:
                if abs(cf(root)) >= accept_tol:
                    continue
            except KernelDomainError:
                continue
            if filter_axis and root.real <= 1e-8 * scale:
                continue
            if all(abs(root - r) > dedup for r in roots):
                roots.append(root)

    results = []
    for root in sorted(roots, key=lambda z: (z.real, z.imag)):
        slope = cf.derivative(root)
        multiplicity = 2 if abs(slope) < 1e-6 * scale else 1
        results.append(PoleResult(s=root, multiplicity=multiplicity))
    return results


def dm_rabi_diagnostic(params: FeedbackParams, mu: float, n_max: int) -> np.ndarray:
    """Partial sums sum_{q=0..n} (-1)^q cos[q*(mu+delta0)*tau] for n = 0..n_max.

    A persistent oscillation at +-i*mu would require this sequence to settle
    at 1/2; non-decaying oscillation of the partial sums certifies that no
    such pole survives the roundtrip accumulation.
    """
    if n_max < 1:
        raise ParameterError("n_max must be >= 1")
    q = np.arange(n_max + 1)
    alpha = (mu + params.delta0) * params.tau
    terms = (1.0 - 2.0 * (q % 2)) * np.cos(q * alpha)
    return np.cumsum(terms)


def steady_state_dm(params: FeedbackParams) -> float:
    """Long-time atomic amplitude under discrete-mode feedback.

    For phi an odd multiple of pi the excitation traps at 1/(1+eta) with
    eta = gamma^2*tau/(4*kappa); for any other phase the s -> 0 limit of the
    transform vanishes.  A decoupled atom (gamma = 0) keeps its excitation
    for every phase.
    """
    if params.gamma == 0.0:
        return 1.0
    if is_odd_pi_phase(params.phi):
        return 1.0 / (1.0 + params.eta)
    return 0.0


def normal_modes(gamma: float, big_g: float) -> NormalModeSet:
    """Normal modes of the atom coupled to two single-mode cavities.

    gamma couples the atom to cavity 1 and big_g couples the two cavities.
    Basis order is (atom, cavity 1, cavity 2); the bright pair carries
    energies +-xi with xi = sqrt(gamma^2 + G^2) and the dark mode (no
    cavity-1 component) carries zero energy.  dark_overlap = G^2/xi^2 is the
    squared projection of the excited atom onto the dark mode.
    """
    if gamma < 0 or big_g < 0:
        raise ParameterError("couplings must be nonnegative")
    if gamma == 0 and big_g == 0:
        raise ParameterError("at least one coupling must be nonzero")
    xi_squared = gamma * gamma + big_g * big_g
    xi = math.sqrt(xi_squared)
    root2 = math.sqrt(2.0)
    bright_plus = np.array([gamma, xi, big_g]) / (root2 * xi)
    bright_minus = np.array([gamma, -xi, big_g]) / (root2 * xi)
    dark = np.array([-big_g, 0.0, gamma]) / xi
    return NormalModeSet(
        xi=xi,
        energies=np.array([xi, -xi, 0.0]),
        modes=np.vstack([bright_plus, bright_minus, dark]),
        dark_overlap=big_g * big_g / xi_squared,
    )


SPECTRUM_ZERO_SNAP = 1e-9   # radians, distance of (w*tau-phi)/2 to an odd pi/2


def spectrum(params: FeedbackParams, kind: ModelKind, omegas) -> Spectrum:
    """Emission spectral density through the kappa1 channel on a frequency grid.

    Closed forms (u = omega*tau - phi, N0 = 2*gamma^2*kappa1/pi):

    no feedback      N0 / {(w^2-g^2)^2 + 4*(kappa1+kappa)^2 w^2}
    continuous mode  N0 / {[w^2-g^2+2*w*kappa*sin u]^2
                           + 4*[kappa1+kappa-kappa*cos u]^2 w^2}
    discrete mode    N0*C^2 / {[(w^2-g^2)*C + 2*kappa*w*Sn]^2
                               + 4*kappa1^2 w^2 C^2},  C = cos(u/2), Sn = sin(u/2)

    The discrete form is the tangent-free rewriting of the summed-kernel
    result; grid points where u is an odd multiple of pi (C = 0, the tangent
    poles) yield exactly zero, including omega = 0 when phi is an odd
    multiple of pi.
    """
    if params.kappa1 <= 0:
        raise ParameterError("kappa1 must be > 0; nothing is emitted otherwise")
    w = np.asarray(omegas, dtype=float)
    if not np.all(np.isfinite(w)):
        raise ParameterError("frequency grid must be finite")
    gamma, kappa, kappa1, tau, phi = (
        params.gamma, params.kappa, params.kappa1, params.tau, params.phi)
    numerator = 2.0 * gamma**2 * kappa1 / math.pi
    w2 = w * w

    if kind is ModelKind.NO_FEEDBACK:
        den = (w2 - gamma**2) ** 2 + 4.0 * (kappa1 + kappa) ** 2 * w2
        values = np.divide(numerator, den, out=np.zeros_like(w), where=den > 0)
    elif kind is ModelKind.CONTINUOUS_MODE:
        u = w * tau - phi
        a = w2 - gamma**2 + 2.0 * w * kappa * np.sin(u)
        b = kappa1 + kappa - kappa * np.cos(u)
        den = a * a + 4.0 * b * b * w2
        values = np.divide(numerator, den, out=np.zeros_like(w), where=den > 0)
    elif kind is ModelKind.DISCRETE_MODE_DELAY:
        theta = 0.5 * (w * tau - phi)
        nearest = np.round((theta - 0.5 * math.pi) / math.pi)
        at_pole = np.abs(theta - (0.5 * math.pi + nearest * math.pi)) < SPECTRUM_ZERO_SNAP
        cos_half = np.where(at_pole, 0.0, np.cos(theta))
        sin_half = np.where(at_pole, 1.0 - 2.0 * (nearest % 2), np.sin(theta))
        num = numerator * cos_half**2
        a = (w2 - gamma**2) * cos_half + 2.0 * kappa * w * sin_half
        den = a * a + 4.0 * kappa1**2 * w2 * cos_half**2
        values = np.divide(num, den, out=np.zeros_like(w), where=den > 0)
    elif kind is ModelKind.DISCRETE_MODE_SUM:
        raise ParameterError(
            "the mode-sum backend has no separate closed-form spectrum; "
            "use DISCRETE_MODE_DELAY")
    else:
        raise ParameterError(f"unknown model kind {kind!r}")

    return Spectrum(omegas=w, values=values)


def _require_series_regime(params: FeedbackParams) -> None:
    if abs(params.gamma - params.kappa) > 1e-12 * params.kappa:
        raise ParameterError("series solutions require gamma = kappa")
    if params.kappa1 != 0.0:
        raise ParameterError("series solutions require kappa1 = 0")


def _ln_comb(n: int, k: int) -> float:
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def _series_sum(reals, imags, max_mag) -> complex:
    total = complex(math.fsum(reals), math.fsum(imags))
    n_terms = max(len(reals), 1)
    cancellation = max_mag * 1e-16 * n_terms
    if cancellation > 1e-8 * max(abs(total), 1e-300):
        raise SeriesPrecisionError(
            "alternating-term cancellation exceeds double precision at this "
            "time; integrate with the delay-differential backend instead")
    return 1j * total


def series_cm(params: FeedbackParams, t: float, m_max: int | None = None) -> complex:
    """Cavity amplitude of the continuous-mode case from its resummed transform.

    Valid for gamma = kappa, kappa1 = 0.  The m-th geometric order arrives
    with delay m*tau and phase e^{+i*m*phi}:

      c_g(t) = i * sum_{m>=0} sum_{l=0..m} 2^m (-1)^l C(m,l)
               [kappa*(t-m*tau)]^{m+l+1}/(m+l+1)! e^{-kappa*(t-m*tau)}
               e^{+i*m*phi} Theta(t-m*tau)

    Because the step function ties the order to the elapsed roundtrips, the
    sum over m is finite for finite t and exact once m_max >= floor(t/tau).
    """
    _require_series_regime(params)
    if t < 0:
        raise ParameterError("t must be >= 0")
    kappa, tau, phi = params.kappa, params.tau, params.phi
    m_top = int(math.floor(t / tau + 1e-12))
    if m_max is not None:
        m_top = min(m_top, m_max)
    reals, imags = [], []
    max_mag = 0.0
    ln2 = math.log(2.0)
    for m in range(m_top + 1):
        tm = t - m * tau
        if tm <= 0.0:
            continue
        phase = cmath.exp(1j * m * phi)
        ln_t = math.log(kappa * tm)
        for l in range(m + 1):
            power = m + l + 1
            ln_mag = m * ln2 + _ln_comb(m, l) + power * ln_t - math.lgamma(power + 1) - kappa * tm
            if ln_mag > 700.0:
                raise SeriesPrecisionError(
                    "series term overflows double precision; use the "
                    "delay-differential backend")
            mag = math.exp(ln_mag)
            max_mag = max(max_mag, mag)
            z = (mag if l % 2 == 0 else -mag) * phase
            reals.append(z.real)
            imags.append(z.imag)
    if not reals:
        return 0j
    return _series_sum(reals, imags, max_mag)


def series_dm(params: FeedbackParams, t: float, m_max: int | None = None,
              p_max: int | None = None) -> complex:
    """Cavity amplitude of the discrete-mode case from its resummed transform.

    Valid for gamma = kappa, kappa1 = 0.  Relative to the continuous-mode
    series, every geometric order m is dressed by the kernel's binomial tail
    over p extra roundtrips, each delayed by tau and phase-shifted by -phi:

      c_g(t) = i * sum_{m,p} 4^m (-1)^(l+p) C(m,l) C(m+p-1,p)
               [kappa*t']^{m+l+1}/(m+l+1)! e^{-kappa*t'} e^{-i*(m+p)*phi}
               Theta(t'),  t' = t-(m+p)*tau

    Only orders with (m+p) <= floor(t/tau) contribute, so the evaluation is
    exact given full m_max/p_max; precision is limited at large t by
    cancellation, reported through SeriesPrecisionError.
    """
    _require_series_regime(params)
    if t < 0:
        raise ParameterError("t must be >= 0")
    kappa, tau, phi = params.kappa, params.tau, params.phi
    q_top = int(math.floor(t / tau + 1e-12))
    m_top = q_top if m_max is None else min(q_top, m_max)
    reals, imags = [], []
    max_mag = 0.0
    ln4 = math.log(4.0)
    for m in range(m_top + 1):
        p_top = q_top - m if p_max is None else min(q_top - m, p_max)
        for p in range(p_top + 1):
            if m == 0 and p > 0:
                continue    # the zeroth geometric order has no kernel tail
            tp = t - (m + p) * tau
            if tp <= 0.0:
                continue
            ln_tail = 0.0 if p == 0 else (
                math.lgamma(m + p) - math.lgamma(p + 1) - math.lgamma(m))
            phase = cmath.exp(-1j * (m + p) * phi)
            sign_p = 1.0 if p % 2 == 0 else -1.0
            ln_t = math.log(kappa * tp)
            for l in range(m + 1):
                power = m + l + 1
                ln_mag = (m * ln4 + ln_tail + _ln_comb(m, l)
                          + power * ln_t - math.lgamma(power + 1) - kappa * tp)
                if ln_mag > 700.0:
                    raise SeriesPrecisionError(
                        "series term overflows double precision; use the "
                        "delay-differential backend")
                mag = math.exp(ln_mag)
                max_mag = max(max_mag, mag)
                sign = sign_p if l % 2 == 0 else -sign_p
                z = sign * mag * phase
                reals.append(z.real)
                imags.append(z.imag)
    if not reals:
        return 0j
    return _series_sum(reals, imags, max_mag)


@dataclass(frozen=True)
class SeriesSolution:
    """Reusable series evaluator for one backend kind at gamma = kappa."""

    kind: ModelKind
    params: FeedbackParams
    m_max: int | None = None
    p_max: int | None = None

    def __post_init__(self):
        if self.kind not in (ModelKind.CONTINUOUS_MODE, ModelKind.DISCRETE_MODE_DELAY):
            raise ParameterError("series solutions exist for the cm and dm kinds")
        _require_series_regime(self.params)

    def __call__(self, t: float) -> complex:
        if self.kind is ModelKind.CONTINUOUS_MODE:
            return series_cm(self.params, t, self.m_max)
        return series_dm(self.params, t, self.m_max, self.p_max)
