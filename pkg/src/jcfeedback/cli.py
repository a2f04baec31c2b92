"""Command-line interface: scenario presets, free-form runs, spectra, pole
searches, and the validation suite.  Output is CSV with 17 significant
digits, lossless for double precision.

Exit codes: 0 success, 1 validation-check failure, 2 usage error,
3 numerical failure (non-finite state).
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .core import ParameterError, make_params, regime_label
from .engine import NonFiniteStateError
from .models import (
    ModelKind,
    simulate_cm,
    simulate_dm_delay,
    simulate_dm_modesum,
    simulate_no_feedback,
)
from .analysis import (
    KernelDomainError,
    characteristic_function,
    find_poles,
    normal_modes,
    series_cm,
    series_dm,
    spectrum,
    steady_state_dm,
)
from .checks import CHECKS, format_result, run_checks
from .presets import SCENARIOS, SPECTRUM_SCENARIOS

USAGE_ERROR = 2
NUMERICAL_ERROR = 3

_FMT = "%.17g"

_PARAM_KEYS = ("gamma", "kappa", "kappa1", "tau", "phi")
_FLOAT_KEYS = _PARAM_KEYS + ("tmax", "kappa_tau", "omega_max", "re_min",
                             "re_max", "im_min", "im_max", "big_g")
_INT_KEYS = ("steps_per_delay", "modes", "points", "grid", "n_intervals",
             "m_max", "p_max")


class UsageError(Exception):
    pass


def _load_config(path: str) -> dict[str, str]:
    """Flat key=value file mirroring the CLI flags; '#' starts a comment."""
    values: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        values[key.strip().replace("-", "_")] = value.strip()
    return values


def _merge_config(args: argparse.Namespace) -> None:
    """Fill unset flags from the config file; explicit flags win."""
    if not getattr(args, "config", None):
        return
    config = _load_config(args.config)
    for key, raw in config.items():
        if not hasattr(args, key):
            raise UsageError(f"unknown config key {key!r}")
        if getattr(args, key) is not None:
            continue
        try:
            if key in _FLOAT_KEYS:
                setattr(args, key, float(raw))
            elif key in _INT_KEYS:
                setattr(args, key, int(raw))
            else:
                setattr(args, key, raw)
        except ValueError as exc:
            raise UsageError(f"config key {key!r}: {exc}") from exc


def _add_param_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--gamma", type=float, default=None,
                        help="atom-cavity coupling rate")
    parser.add_argument("--kappa", type=float, default=None,
                        help="feedback-channel coupling rate")
    parser.add_argument("--kappa1", type=float, default=None,
                        help="extra loss channel rate (default 0)")
    parser.add_argument("--tau", type=float, default=None,
                        help="roundtrip delay")
    parser.add_argument("--phi", type=float, default=None,
                        help="feedback phase (detuning follows as phi/tau)")


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", default=None,
                        help="key=value file supplying defaults for any flag")
    parser.add_argument("--out", default=None,
                        help="output directory for CSV files (default .)")


def _resolve_params(args, defaults: dict | None = None):
    merged = dict(defaults or {})
    for key in _PARAM_KEYS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    merged.setdefault("kappa1", 0.0)
    missing = [k for k in _PARAM_KEYS if k not in merged]
    if missing:
        raise UsageError("missing parameter flag(s): "
                         + ", ".join("--" + k for k in missing))
    return make_params(**merged)


def _out_dir(args) -> Path:
    path = Path(args.out or ".")
    try:
        path.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {path}: {exc}") from exc
    return path


def _params_comment(params, extra: str = "") -> str:
    fields = " ".join(f"{k}={getattr(params, k)!r}" for k in _PARAM_KEYS)
    return f"# params: {fields}" + (f" {extra}" if extra else "")


def _write_rows(path: Path, comment: str, header: str, columns) -> None:
    try:
        with open(path, "w") as fh:
            fh.write(comment + "\n")
            fh.write(header + "\n")
            for row in zip(*columns):
                fh.write(",".join(_FMT % v for v in row) + "\n")
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc


def write_trajectory_csv(path: Path, params, trajectory, extra_comment: str = "") -> None:
    t = trajectory.times
    _write_rows(
        path,
        _params_comment(params, extra_comment),
        "t,re_ce,im_ce,abs2_ce,re_cg,im_cg,abs2_cg,t_over_tau",
        (t, trajectory.c_e.real, trajectory.c_e.imag, np.abs(trajectory.c_e) ** 2,
         trajectory.c_g.real, trajectory.c_g.imag, np.abs(trajectory.c_g) ** 2,
         t / params.tau),
    )


_MODEL_TOKENS = {kind.value: kind for kind in ModelKind}


def _run_model(params, kind, t_max, steps, n_modes):
    if kind is ModelKind.NO_FEEDBACK:
        return simulate_no_feedback(params, t_max, steps)
    if kind is ModelKind.CONTINUOUS_MODE:
        return simulate_cm(params, t_max, steps)
    if kind is ModelKind.DISCRETE_MODE_DELAY:
        return simulate_dm_delay(params, t_max, steps)
    trajectory, _ = simulate_dm_modesum(params, n_modes, t_max, steps)
    return trajectory


def cmd_simulate(args) -> int:
    scenario = None
    if args.preset is not None:
        scenario = SCENARIOS.get(args.preset)
        if scenario is None:
            print(f"unknown preset {args.preset!r}; available: "
                  + ", ".join(sorted(SCENARIOS)), file=sys.stderr)
            return USAGE_ERROR

    defaults = {}
    if scenario is not None:
        defaults = {k: getattr(scenario.params, k) for k in _PARAM_KEYS}
    params = _resolve_params(args, defaults)

    if args.models is not None:
        tokens = [tok.strip() for tok in args.models.split(",") if tok.strip()]
        unknown = [tok for tok in tokens if tok not in _MODEL_TOKENS]
        if unknown:
            raise UsageError(f"unknown model(s) {', '.join(unknown)}; "
                             f"choose from {', '.join(_MODEL_TOKENS)}")
        kinds = [_MODEL_TOKENS[tok] for tok in tokens]
    elif scenario is not None:
        kinds = list(scenario.models)
    else:
        kinds = [ModelKind.NO_FEEDBACK, ModelKind.CONTINUOUS_MODE,
                 ModelKind.DISCRETE_MODE_DELAY]

    t_max = args.tmax if args.tmax is not None else (
        scenario.t_max if scenario is not None else None)
    if t_max is None:
        raise UsageError("missing --tmax")
    steps = args.steps_per_delay if args.steps_per_delay is not None else (
        scenario.steps_per_delay if scenario is not None else 1000)
    n_modes = args.modes if args.modes is not None else (
        scenario.n_modes if scenario is not None else None)
    if ModelKind.DISCRETE_MODE_SUM in kinds and n_modes is None:
        raise UsageError("the modesum backend needs --modes")

    out = _out_dir(args)
    stem = args.preset if args.preset is not None else "run"
    label = regime_label(params)
    print(f"regime: kappa*tau = {label.kappa_tau:.6g} ({label.delay}), "
          f"gamma/kappa = {label.gamma_over_kappa:.6g} ({label.coupling})")
    if any(k in (ModelKind.DISCRETE_MODE_DELAY, ModelKind.DISCRETE_MODE_SUM)
           for k in kinds):
        print(f"steady_state = {_FMT % steady_state_dm(params)} "
              f"(eta = {_FMT % params.eta})")
    for kind in kinds:
        trajectory = _run_model(params, kind, t_max, steps, n_modes)
        path = out / f"{stem}_{kind.value}.csv"
        extra = f"model={kind.value} steps_per_delay={steps}"
        if kind is ModelKind.DISCRETE_MODE_SUM:
            extra += f" n_modes={n_modes}"
        write_trajectory_csv(path, params, trajectory, extra)
        print(f"wrote {path}")
    return 0


def cmd_spectrum(args) -> int:
    defaults = {}
    if args.preset is not None:
        preset = SPECTRUM_SCENARIOS.get(args.preset)
        if preset is None:
            print(f"unknown preset {args.preset!r}; available: "
                  + ", ".join(sorted(SPECTRUM_SCENARIOS)), file=sys.stderr)
            return USAGE_ERROR
        if args.kappa_tau is None and args.tau is None:
            raise UsageError(
                f"preset {args.preset!r} fixes no delay; supply --kappa-tau")
        defaults = {"gamma": preset.gamma, "kappa": preset.kappa,
                    "kappa1": preset.kappa1, "phi": preset.phi}
        if args.kappa_tau is not None:
            defaults["tau"] = args.kappa_tau / preset.kappa
    params = _resolve_params(args, defaults)

    omega_max = args.omega_max if args.omega_max is not None else \
        10.0 * max(params.gamma, params.kappa)
    points = args.points if args.points is not None else 2001
    omegas = np.linspace(-omega_max, omega_max, points)

    out = _out_dir(args)
    stem = args.preset if args.preset is not None else "spectrum"
    if args.all:
        kinds = [ModelKind.NO_FEEDBACK, ModelKind.CONTINUOUS_MODE,
                 ModelKind.DISCRETE_MODE_DELAY]
        columns = [omegas] + [spectrum(params, k, omegas).values for k in kinds]
        path = out / f"{stem}_all.csv"
        _write_rows(path, _params_comment(params), "omega,S_nofb,S_cm,S_dm", columns)
    else:
        kind = _MODEL_TOKENS[args.kind]
        values = spectrum(params, kind, omegas).values
        path = out / f"{stem}_{kind.value}.csv"
        _write_rows(path, _params_comment(params, f"kind={kind.value}"),
                    "omega,S", (omegas, values))
    print(f"wrote {path}")
    return 0


def cmd_poles(args) -> int:
    params = _resolve_params(args)
    rate = max(params.gamma, params.kappa)
    if args.model == "markov":
        cf = characteristic_function(params, ModelKind.CONTINUOUS_MODE, n=0)
    else:
        kind = (ModelKind.CONTINUOUS_MODE if args.model == "cm"
                else ModelKind.DISCRETE_MODE_DELAY)
        n = args.n_intervals
        cf = characteristic_function(params, kind, n=n)
    box = (
        args.re_min if args.re_min is not None else -3.0 * rate,
        args.re_max if args.re_max is not None else 1.0 * rate,
        args.im_min if args.im_min is not None else -4.0 * rate,
        args.im_max if args.im_max is not None else 4.0 * rate,
    )
    grid = args.grid if args.grid is not None else 24
    roots = find_poles(cf, box, grid=grid,
                       require_series_convergence=not args.raw)

    out = _out_dir(args)
    path = out / "poles.csv"
    res = [r.s.real for r in roots]
    ims = [r.s.imag for r in roots]
    residuals = [abs(cf(r.s)) for r in roots]
    _write_rows(path, _params_comment(params, f"model={args.model}"),
                "re_s,im_s,abs_D", (res, ims, residuals))
    print(f"wrote {path} ({len(roots)} root(s))")
    for r in roots:
        tags = []
        if abs(r.s.real) < 1e-8 * rate:
            tags.append("marginal")
        if r.multiplicity > 1:
            tags.append(f"multiplicity={r.multiplicity}")
        print(f"root s = {_FMT % r.s.real} + {_FMT % r.s.imag}j"
              + (f"  [{', '.join(tags)}]" if tags else ""))

    if args.check_rabi:
        period_defect = abs(math.remainder(
            (params.delta0 + params.gamma) * params.tau, 2.0 * math.pi))
        on_condition = period_defect < 1e-9
        m_float = params.gamma * params.tau / math.pi
        amplitude = 1.0 / (1.0 + params.kappa * params.tau)
        print(f"rabi_condition (delta0+gamma)*tau mod 2*pi = "
              f"{_FMT % period_defect} -> {'met' if on_condition else 'not met'}")
        print(f"predicted_amplitude 1/(1+kappa*m*pi/gamma) = {_FMT % amplitude} "
              f"(m = {_FMT % m_float})")
    return 0


def cmd_steady_state(args) -> int:
    params = _resolve_params(args)
    value = steady_state_dm(params)
    modes = normal_modes(params.gamma, params.mode_coupling)
    print(f"eta = {_FMT % params.eta}")
    print(f"steady_state = {_FMT % value}")
    print(f"dark_overlap = {_FMT % modes.dark_overlap}")
    return 0


def cmd_normal_modes(args) -> int:
    if args.gamma is None:
        raise UsageError("missing --gamma")
    if args.big_g is not None:
        big_g = args.big_g
    elif args.kappa is not None and args.tau is not None:
        big_g = 2.0 * math.sqrt(args.kappa / args.tau)
    else:
        raise UsageError("supply --big-g or both --kappa and --tau")
    modes = normal_modes(args.gamma, big_g)
    print(f"xi = {_FMT % modes.xi}")
    for name, energy, vec in zip(("bright+", "bright-", "dark"),
                                 modes.energies, modes.modes):
        comps = ", ".join(_FMT % c for c in vec)
        print(f"{name}: energy = {_FMT % energy}, (atom, cavity1, cavity2) = ({comps})")
    print(f"dark_overlap = {_FMT % modes.dark_overlap}")
    return 0


def cmd_series(args) -> int:
    params = _resolve_params(args)
    if args.times is not None:
        try:
            times = [float(tok) for tok in args.times.split(",") if tok.strip()]
        except ValueError as exc:
            raise UsageError(f"bad --times list: {exc}") from exc
    else:
        if args.tmax is None:
            raise UsageError("supply --times or --tmax")
        times = list(np.linspace(0.0, args.tmax, args.points or 101))
    evaluate = series_cm if args.model == "cm" else series_dm
    values = []
    for t in times:
        if args.model == "cm":
            values.append(series_cm(params, t, args.m_max))
        else:
            values.append(series_dm(params, t, args.m_max, args.p_max))
    out = _out_dir(args)
    path = out / f"series_{args.model}.csv"
    values = np.asarray(values)
    _write_rows(path, _params_comment(params, f"model={args.model}"),
                "t,re_cg,im_cg,abs2_cg",
                (np.asarray(times), values.real, values.imag, np.abs(values) ** 2))
    print(f"wrote {path}")
    return 0


def cmd_validate(args) -> int:
    names = None
    if args.only is not None:
        names = [tok.strip() for tok in args.only.split(",") if tok.strip()]
    try:
        results = run_checks(names, fast=args.fast)
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return USAGE_ERROR
    for result in results:
        print(format_result(result))
    failures = sum(not r.passed for r in results)
    print(f"{len(results) - failures}/{len(results)} checks passed")
    return 0 if failures == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jcfeedback",
        description="Time-delayed coherent feedback simulators for the "
                    "single-excitation atom-cavity model")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one or more backends, write CSV")
    _add_param_flags(p)
    _add_common(p)
    p.add_argument("--preset", default=None,
                   help="named scenario; see README for the list")
    p.add_argument("--models", default=None,
                   help="comma list from: nofb, cm, dm, modesum")
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--steps-per-delay", type=int, default=None, dest="steps_per_delay")
    p.add_argument("--modes", type=int, default=None,
                   help="mode-sum truncation (modes -N..N)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("spectrum", help="closed-form emission spectra, write CSV")
    _add_param_flags(p)
    _add_common(p)
    p.add_argument("--preset", default=None)
    p.add_argument("--kappa-tau", type=float, default=None, dest="kappa_tau",
                   help="delay parameter for spectrum presets")
    p.add_argument("--kind", choices=("nofb", "cm", "dm"), default="dm")
    p.add_argument("--all", action="store_true",
                   help="emit all three kinds side by side")
    p.add_argument("--omega-max", type=float, default=None, dest="omega_max")
    p.add_argument("--points", type=int, default=None)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("poles", help="roots of the characteristic function")
    _add_param_flags(p)
    _add_common(p)
    p.add_argument("--model", choices=("cm", "dm", "markov"), default="cm")
    p.add_argument("--n-intervals", type=int, default=None, dest="n_intervals",
                   help="finite roundtrip count for the dm kernel (default: all)")
    p.add_argument("--re-min", type=float, default=None, dest="re_min")
    p.add_argument("--re-max", type=float, default=None, dest="re_max")
    p.add_argument("--im-min", type=float, default=None, dest="im_min")
    p.add_argument("--im-max", type=float, default=None, dest="im_max")
    p.add_argument("--grid", type=int, default=None, help="seed grid per axis")
    p.add_argument("--check-rabi", action="store_true", dest="check_rabi",
                   help="report the marginal-oscillation condition and amplitude")
    p.add_argument("--raw", action="store_true",
                   help="for the dm kernel, keep continuation roots that the "
                        "tap series does not support")
    p.set_defaults(func=cmd_poles)

    p = sub.add_parser("steady-state", help="long-time trapped amplitude")
    _add_param_flags(p)
    _add_common(p)
    p.set_defaults(func=cmd_steady_state)

    p = sub.add_parser("normal-modes", help="atom + two-cavity normal modes")
    p.add_argument("--gamma", type=float, default=None)
    p.add_argument("--big-g", type=float, default=None, dest="big_g",
                   help="cavity-cavity coupling (default 2*sqrt(kappa/tau))")
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--tau", type=float, default=None)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_normal_modes)

    p = sub.add_parser("series", help="resummed-transform amplitudes (gamma=kappa)")
    _add_param_flags(p)
    _add_common(p)
    p.add_argument("--model", choices=("cm", "dm"), required=True)
    p.add_argument("--times", default=None, help="comma list of times")
    p.add_argument("--tmax", type=float, default=None)
    p.add_argument("--points", type=int, default=None)
    p.add_argument("--m-max", type=int, default=None, dest="m_max")
    p.add_argument("--p-max", type=int, default=None, dest="p_max")
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("validate", help="run the validation suite")
    p.add_argument("--fast", action="store_true",
                   help="reduced grids and truncations, same thresholds")
    p.add_argument("--full", action="store_true",
                   help="full-resolution settings (default)")
    p.add_argument("--only", default=None,
                   help="comma list of check names; available: "
                        + ", ".join(CHECKS))
    p.set_defaults(func=cmd_validate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _merge_config(args)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (ParameterError, KernelDomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except NonFiniteStateError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return NUMERICAL_ERROR


if __name__ == "__main__":
    sys.exit(main())
