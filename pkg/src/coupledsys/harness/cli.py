"""Command-line entry point: ``python3 -m coupledsys <command> [flags]``."""

from __future__ import annotations

import argparse
import sys

from .. import parallel
from ..characteristic import verify_characteristic
from ..errors import NumericalError, PreconditionError
from ..fitting import decay_fit, dyadic_ladder, geometric_ladder
from ..flow import evolve_continuous, write_trajectory_csv
from ..lattice import convergence_test, evolve
from ..models import MODEL_NAMES
from ..spectral import growth_parameter, spectrum_curve
from . import csvio
from .config import ExperimentConfig, build_config, read_config_file
from .rates import (
    derivative_samples,
    difference_samples,
    operator_samples_continuous,
    operator_samples_discrete,
)
from .scenarios import (
    EXIT_NUMERIC,
    EXIT_OK,
    EXIT_PRECONDITION,
    EXIT_THRESHOLD,
    ORBIT_T_CAP,
    RATE_BAND,
    SCENARIOS,
    SPECTRUM_GRID,
    run_experiment,
    scenario_values,
)

VERIFY_TOL = 1e-10
SIMULATE_TIMES = 9


def _common(p: argparse.ArgumentParser):
    g = p.add_argument_group("common options")
    g.add_argument("--model", choices=MODEL_NAMES)
    g.add_argument("--alpha", type=float, help="rendezvous coupling α in (0, 1)")
    g.add_argument("--alpha0", type=float, help="second-order gain α0 in (0, 1)")
    g.add_argument("--zeta", type=float, help="platoon / scalar-flow parameter ζ > 0")
    g.add_argument("--p", help="norm exponent: 1, 2 or inf")
    g.add_argument("--n-max", type=int, dest="n_max")
    g.add_argument("--t-max", type=float, dest="t_max")
    g.add_argument("--frequencies", type=int, help="circulant size N (power of two)")
    g.add_argument("--initial", help="delta | empty | constant(c) | perturbed(c[,seed]) | window:... | file:PATH")
    g.add_argument("--method", choices=("expm", "rk"), help="integrator for trajectory output; long orbit rates always use rk")
    g.add_argument("--out", help="output directory")
    g.add_argument("--threads", type=int)
    g.add_argument("--config", help="key = value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coupledsys",
        description="Spectra, exact evolutions and decay rates of infinite coupled systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "spectrum": "sample the spectrum and report the special form",
        "simulate": "evolve initial data and write trajectory.csv",
        "cesaro": "run the Cesàro convergence test",
        "rates": "measure operator-norm and orbit decay rates",
        "verify": "check the characteristic identity and special form",
        "scenario": "run a named experiment with pass/fail thresholds",
    }
    for name, text in helps.items():
        p = sub.add_parser(name, help=text, description=text)
        if name == "scenario":
            p.add_argument("name", choices=sorted(SCENARIOS))
        _common(p)
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    """Defaults < scenario defaults < config file < CLI flags."""
    values = {}
    section = ""
    if args.command == "scenario":
        values.update(scenario_values(args.name))
        section = args.name
    if args.config:
        values.update(read_config_file(args.config, section))
    flags = {k: v for k, v in vars(args).items() if k not in ("command", "name", "config") and v is not None}
    values.update(flags)
    return build_config(values)


def _cmd_spectrum(cfg: ExperimentConfig) -> int:
    system = cfg.model.build()
    path = csvio.write_spectrum(cfg.out / "spectrum.csv", spectrum_curve(system, SPECTRUM_GRID), system.char_fn)
    form = system.special_form()
    print(f"{system.name}: phi = {system.char_fn}")
    if form is not None:
        print(f"special form: param={form.param!r} k={form.k} circle centre {form.centre!r}")
        print(f"growth parameter n_T = {growth_parameter(system).n_t}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_simulate(cfg: ExperimentConfig) -> int:
    system = cfg.model.build()
    x0 = cfg.initial_state()
    if system.is_discrete:
        kept = []
        evolve(x0, system, cfg.n_max, observer=lambda j, s: kept.append((j, s)),
               observe_at=set(dyadic_ladder(cfg.n_max)) | {0})
        times, states = zip(*kept)
    else:
        grid = geometric_ladder(1.0, cfg.t_max, SIMULATE_TIMES, integer=False)
        traj = evolve_continuous(x0, system, grid, cfg.method)
        times, states = traj.times, traj.states
    path, side = write_trajectory_csv(cfg.out / "trajectory.csv", times, states, "step_or_time")
    print(f"wrote {path} and {side}")
    return EXIT_OK


def _cmd_cesaro(cfg: ExperimentConfig) -> int:
    system = cfg.model.build()
    report = convergence_test(cfg.initial_state(), system, cfg.n_max)
    path = csvio.write_cesaro(cfg.out / "cesaro.csv", report)
    fit = report.cesaro_rate
    print(f"Cesàro error slope {fit.slope!r} ({fit.regime})")
    if report.cesaro_limit is None:
        print("Cesàro averages do not converge to a constant")
    else:
        print(f"Cesàro limit entry {report.cesaro_limit}")
        print(f"predicted limit profile entry {report.predicted_z.left_tail}")
    print(f"wrote {path}")
    return EXIT_OK


def _cmd_rates(cfg: ExperimentConfig) -> int:
    system = cfg.model.build()
    x0 = cfg.initial_state()
    if system.is_discrete:
        op = operator_samples_discrete(system, cfg.frequencies, cfg.n_max)
        orbit = {"difference": difference_samples(system, x0, cfg.n_max)}
    else:
        op = operator_samples_continuous(system, cfg.frequencies, cfg.t_max)
        orbit = {"derivative": derivative_samples(system, x0, min(cfg.t_max, ORBIT_T_CAP), "rk")}
    csvio.write_rates(cfg.out / "rates.csv", op)
    csvio.write_orbit_rates(cfg.out / "rates_orbit.csv", orbit)
    summary = csvio.Summary()
    op_fit = decay_fit(op, 1.0)
    if system.special_form() is not None:
        ok = RATE_BAND[0] <= op_fit.slope <= RATE_BAND[1]
        summary.check("operator_slope", op_fit.slope, f"[{RATE_BAND[0]},{RATE_BAND[1]}]", ok)
    else:
        summary.info("operator_slope", op_fit.slope)
    for name, samples in orbit.items():
        summary.info(f"{name}_slope", decay_fit(samples, 0.5, min_decades=1.0).slope)
    summary.write(cfg.out / "summary.csv")
    for metric, value, _, ok in summary.rows:
        print(f"{metric} = {value!r}{'' if ok else '  FAIL'}")
    return EXIT_OK if summary.passed else EXIT_THRESHOLD


def _cmd_verify(cfg: ExperimentConfig) -> int:
    system = cfg.model.build()
    summary = csvio.Summary()
    res = verify_characteristic(system, 100)
    summary.check("characteristic_residual", res, f"<={VERIFY_TOL}", res <= VERIFY_TOL)
    form = system.special_form()
    summary.check("special_form_detected", int(form is not None), "==1", form is not None)
    if form is not None:
        summary.info("special_form_param", form.param)
        summary.info("special_form_order", form.k)
    summary.write(cfg.out / "summary.csv")
    for metric, value, _, ok in summary.rows:
        print(f"{metric} = {value!r}{'' if ok else '  FAIL'}")
    return EXIT_OK if summary.passed else EXIT_THRESHOLD


def _cmd_scenario(cfg: ExperimentConfig) -> int:
    status, summary = run_experiment(cfg, SCENARIOS[cfg.scenario])
    for metric, value, threshold, ok in summary.rows:
        mark = "" if not threshold else ("  pass" if ok else "  FAIL")
        print(f"{metric} = {value!r}{mark}")
    print(f"wrote CSV files to {cfg.out}")
    return status


COMMANDS = {
    "spectrum": _cmd_spectrum,
    "simulate": _cmd_simulate,
    "cesaro": _cmd_cesaro,
    "rates": _cmd_rates,
    "verify": _cmd_verify,
    "scenario": _cmd_scenario,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args)
        parallel.set_threads(cfg.threads)
        cfg.out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg)
    except PreconditionError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except NumericalError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
