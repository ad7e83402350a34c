"""Command-line driver.

Subcommands: ``evolve`` (metric trajectories to CSV/JSON), ``sweep``
(adiabaticity parameter ladders), ``smatrix`` (dressed S-matrix reports),
``static`` (static-metric construction and residuals), ``moyal-check``
(exact star-product self-verification).  All state lives in the JSON
configuration; outputs are deterministic and schema-versioned.  Exit
codes: 0 success, 2 configuration error, 3 solver failure, 4 violated
physics precondition (with a structured JSON error report where the
command emits JSON).
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .config import (
    ModelConfig,
    build_schedule,
    load_config,
    matrix_from,
    two_level_params,
)
from .errors import ComplexSpectrum, ConfigError, PhysicsError, SolverError
from .ioutil import dump_json, matrix_to_json, write_csv
from .metric_flow import (
    evolve_metric,
    quasi_hermiticity_residual,
    static_metric,
)
from .operator_core import (
    biorthogonal_decompose,
    positivity_check,
    spectrum_reality_check,
)
from .scattering import ScatteringConfig, s_matrix
from .switching import adiabatic_sweep, extrapolate_to_zero, is_monotone_nonincreasing
from .two_level import ramp_experiment, static_solution
from .moyal import (
    ANSATZ_NAMES,
    cubic_linear_switch_evolve,
    linear_switch_closed_form,
)


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    return open(path, "w", encoding="utf-8"), True


def _emit(args, columns=None, rows=None, payload=None):
    stream, close = _open_out(args.out)
    try:
        if payload is not None:
            dump_json(stream, payload)
        else:
            write_csv(stream, columns, rows)
    finally:
        if close:
            stream.close()


def _report(config: ModelConfig, result: dict, diagnostics: dict) -> dict:
    return {"config": config.raw, "result": result, "diagnostics": diagnostics}


# ---------------------------------------------------------------- evolve


def _evolve_two_level(config: ModelConfig, args):
    model = config.model
    if "ramp" in model:
        ramp = model["ramp"]
        res = ramp_experiment(
            duration=float(ramp["duration"]),
            amplitude=float(ramp.get("amplitude", 5.0)),
            w3=float(ramp.get("w3", 3.0)),
            v0=float(ramp.get("v0", 0.0)),
            config=config.solver,
        )
        times, comps = res.times, res.components
        diag = {
            "deviation": res.deviation,
            "selected_static": list(map(float, res.selected_static.four_vector())),
        }
    else:
        params = two_level_params(model)
        initial = model.get("initial", {})
        if "components" in initial:
            comp0 = np.asarray(initial["components"], dtype=float)
        else:
            comp0 = static_solution(
                params,
                theta0_s=float(initial.get("theta0", 1.0)),
                alpha=float(initial.get("alpha", 0.0)),
            ).four_vector()
        from ._integrate import solve_ode
        from .two_level import component_flow

        t0 = float(model.get("t0", 0.0))
        t1 = float(model.get("t1", 10.0))

        def rhs(t, y):
            d0, dv = component_flow(y[0], y[1:], params)
            return np.concatenate(([d0], dv))

        sol = solve_ode(
            rhs,
            t0,
            t1,
            comp0,
            rtol=config.solver.rtol,
            atol=config.solver.atol,
            t_eval=np.linspace(t0, t1, config.solver.samples),
        )
        times, comps = sol.times, np.array(sol.states)
        diag = {}

    columns = ["t", "theta0", "theta1", "theta2", "theta3"]
    rows = [[t, *c] for t, c in zip(times, comps)]
    if args.format == "json":
        payload = _report(
            config,
            {
                "columns": columns,
                "rows": [[float(x) for x in row] for row in rows],
            },
            diag,
        )
        _emit(args, payload=payload)
    else:
        _emit(args, columns=columns, rows=rows)


def _evolve_matrix(config: ModelConfig, args):
    model = config.model
    schedule = build_schedule(model.get("schedule") or {"type": "constant", "h": model.get("h")})
    dim = schedule.at(0.0).shape[0]
    theta0 = matrix_from(model, "theta0", required=False)
    if theta0 is None:
        theta0 = np.eye(dim, dtype=complex)
    t0 = float(model.get("t0", 0.0))
    t1 = float(model.get("t1", 10.0))
    traj = evolve_metric(schedule, theta0, t0, t1, config.solver)

    columns = ["t"]
    for i in range(dim):
        for j in range(dim):
            columns += [f"theta_re_{i}_{j}", f"theta_im_{i}_{j}"]
    rows = []
    for t, m in zip(traj.times, traj.metrics):
        row = [t]
        for i in range(dim):
            for j in range(dim):
                row += [m[i, j].real, m[i, j].imag]
        rows.append(row)
    if args.format == "json":
        payload = _report(
            config,
            {"times": [float(t) for t in traj.times],
             "metrics": [matrix_to_json(m) for m in traj.metrics]},
            {"solver": traj.solver.value, **traj.stats},
        )
        _emit(args, payload=payload)
    else:
        _emit(args, columns=columns, rows=rows)


def _evolve_cubic(config: ModelConfig, args):
    model = config.model
    g = float(model.get("g", 0.1))
    duration = float(model.get("duration", math.pi))
    traj = cubic_linear_switch_evolve(g, duration, config=None)
    columns = ["t"]
    for name in ANSATZ_NAMES:
        columns += [f"coeff_{name}_re", f"coeff_{name}_im"]
    rows = []
    for t, vals in zip(traj.times, traj.values):
        row = [t]
        for v in vals:
            row += [float(np.real(v)), float(np.imag(v))]
        rows.append(row)
    if args.format == "json":
        payload = _report(
            config,
            {"times": [float(t) for t in traj.times],
             "coefficients": {n: [float(x) for x in traj.coefficient(n).real]
                              for n in ANSATZ_NAMES}},
            {"closed_form_at_duration": [float(x) for x in
                                         linear_switch_closed_form(g, duration, duration)]},
        )
        _emit(args, payload=payload)
    else:
        _emit(args, columns=columns, rows=rows)


def cmd_evolve(config: ModelConfig, args) -> int:
    if config.kind == "two-level":
        _evolve_two_level(config, args)
    elif config.kind == "matrix":
        _evolve_matrix(config, args)
    else:
        _evolve_cubic(config, args)
    return 0


# ----------------------------------------------------------------- sweep


def cmd_sweep(config: ModelConfig, args) -> int:
    spec = config.section("sweep")
    if not spec:
        raise ConfigError("sweep command needs a 'sweep' section")
    kind = spec["kind"]
    if kind == "two-level-deviation":
        ladder = spec.get("durations")
        if not ladder:
            raise ConfigError("two-level sweep needs 'durations'")

        def experiment(duration):
            return ramp_experiment(
                duration,
                amplitude=float(spec.get("amplitude", 5.0)),
                w3=float(spec.get("w3", 3.0)),
                config=config.solver,
            ).deviation

        param_name = "duration"
    else:
        ladder = spec.get("eps_ladder")
        if not ladder:
            raise ConfigError("smatrix sweep needs 'eps_ladder'")
        h0 = matrix_from(spec, "h0")
        h_int = matrix_from(spec, "h_int")

        def experiment(eps):
            return s_matrix(h0, h_int, eps).unitarity_defect

        param_name = "eps"

    table = adiabatic_sweep(ladder, experiment)
    values = [v for _, v in table]
    monotone_prefix = [True]
    for prev, cur in zip(values, values[1:]):
        monotone_prefix.append(monotone_prefix[-1] and cur <= prev)

    columns = [param_name, "value", "monotone_nonincreasing_prefix"]
    rows = [[p, v, float(flag)] for (p, v), flag in zip(table, monotone_prefix)]
    if args.format == "json":
        payload = _report(
            config,
            {"parameters": [float(p) for p, _ in table],
             "values": [float(v) for v in values],
             "monotone_nonincreasing": is_monotone_nonincreasing(values)},
            {"extrapolated": float(extrapolate_to_zero(
                [1.0 / p for p, _ in table] if param_name == "duration" else ladder,
                values))},
        )
        _emit(args, payload=payload)
    else:
        _emit(args, columns=columns, rows=rows)
    return 0


# --------------------------------------------------------------- smatrix


def cmd_smatrix(config: ModelConfig, args) -> int:
    spec = config.section("scattering")
    if not spec:
        raise ConfigError("smatrix command needs a 'scattering' section")
    h0 = matrix_from(spec, "h0")
    h_int = matrix_from(spec, "h_int")
    theta0 = matrix_from(spec, "theta0", required=False)
    sc_cfg = ScatteringConfig(
        horizon_factor=float(spec.get("horizon_factor", 12.0))
    )
    ladder = spec.get("eps_ladder")
    if ladder is None:
        ladder = [float(spec["eps"])] if "eps" in spec else [0.1]

    results = [s_matrix(h0, h_int, eps, theta0, sc_cfg) for eps in ladder]
    defects = [r.unitarity_defect for r in results]
    result = {
        "eps_ladder": [float(e) for e in ladder],
        "unitarity_defects": [float(d) for d in defects],
        "runs": [r.as_report() for r in results],
    }
    diagnostics = {"defects_decreasing": is_monotone_nonincreasing(defects)}
    if len(ladder) >= 2:
        diagnostics["extrapolated_defect"] = float(
            extrapolate_to_zero(ladder, defects)
        )
        s_ext = extrapolate_to_zero(
            ladder, [r.phase_renormalized() for r in results]
        )
        diagnostics["extrapolated_s_phase_renormalized"] = matrix_to_json(s_ext)
    if spec.get("compare_shapes"):
        smooth = [s_matrix(h0, h_int, eps, theta0, sc_cfg, shape="smooth") for eps in ladder]
        if len(ladder) >= 2:
            s_smooth = extrapolate_to_zero(
                ladder, [r.phase_renormalized() for r in smooth]
            )
            diagnostics["shape_disagreement"] = float(np.max(np.abs(s_ext - s_smooth)))
        diagnostics["smooth_defects"] = [float(r.unitarity_defect) for r in smooth]
    _emit(args, payload=_report(config, result, diagnostics))
    return 0


# ---------------------------------------------------------------- static


def cmd_static(config: ModelConfig, args) -> int:
    model = config.model
    if config.kind == "two-level":
        params = two_level_params(model)
        initial = model.get("initial", {})
        comp = static_solution(
            params,
            theta0_s=float(initial.get("theta0", 1.0)),
            alpha=float(initial.get("alpha", 0.0)),
        )
        theta = comp.matrix()
        h = params.hamiltonian()
        if not spectrum_reality_check(h, 1e-9):
            raise ComplexSpectrum(
                "two-level spectrum is complex; no positive static metric exists"
            )
        result = {
            "components": list(map(float, comp.four_vector())),
            "theta": matrix_to_json(theta),
        }
    elif config.kind == "matrix":
        h = matrix_from(model, "h", required=False)
        if h is None:
            schedule = build_schedule(model["schedule"])
            h = schedule.at(0.0)
        system = biorthogonal_decompose(h)
        weights = np.asarray(model.get("weights", [1.0] * system.dim), dtype=float)
        theta = static_metric(system, weights)
        result = {"theta": matrix_to_json(theta),
                  "weights": [float(w) for w in weights]}
    else:
        raise ConfigError("static command supports 'two-level' and 'matrix' models")

    positive, smallest = positivity_check(theta)
    diagnostics = {
        "quasi_hermiticity_residual": float(quasi_hermiticity_residual(h, theta)),
        "positive_definite": bool(positive),
        "smallest_eigenvalue": float(smallest),
    }
    _emit(args, payload=_report(config, result, diagnostics))
    return 0


# ----------------------------------------------------------- moyal-check


def cmd_moyal_check(config: ModelConfig | None, args) -> int:
    from fractions import Fraction

    from .moyal import (
        ONE,
        P,
        PhasePolynomial,
        Q,
        cubic_static_first_order,
        harmonic_transport_check,
        moyal_product,
        star_flow_rhs,
    )

    checks = []

    def record(name, passed, detail=""):
        checks.append({"name": name, "passed": bool(passed), "detail": detail})

    comm = moyal_product(Q, P) - moyal_product(P, Q)
    record("canonical_commutator", comm == PhasePolynomial({(0, 0): 1j}),
           "q*p - p*q == i exactly")

    h0 = PhasePolynomial({(2, 0): 1, (0, 2): 1})
    rot_ok = True
    for i in range(7):
        for j in range(7 - i):
            m = PhasePolynomial.monomial(i, j)
            lhs = star_flow_rhs(m, h0)
            rhs = (Q.pointwise_mul(m.diff_p()) - P.pointwise_mul(m.diff_q())).scale(2)
            rot_ok = rot_ok and lhs == rhs
    record("flow_equals_rotation_field", rot_ok, "all monomials of degree <= 6")

    theta = PhasePolynomial({(0, 1): 1, (2, 1): 3, (1, 0): -2})
    record("transport_pi_periodic",
           harmonic_transport_check(theta, math.pi) == theta,
           "rotation transport over one period is the identity")

    th1 = cubic_static_first_order(Fraction(1, 3), Fraction(-2, 7))
    iq3 = PhasePolynomial({(0, 3): 1j})
    resid = star_flow_rhs(th1, h0) + (
        moyal_product(ONE, iq3) - moyal_product(iq3.conjugate(), ONE)
    ).times_i()
    record("cubic_static_first_order", resid.is_zero,
           "first-order flow residual vanishes identically")

    g, t = 0.1, math.pi
    spot = linear_switch_closed_form(g, t, t)[ANSATZ_NAMES.index("p3")]
    record("switch_closed_form_spot",
           abs(spot - g * (2.0 * math.pi / 3.0) / t) < 1e-15,
           "p^3 coefficient at t = duration = pi")

    passed = all(c["passed"] for c in checks)
    payload = {
        "config": config.raw if config else {},
        "result": {"checks": checks, "all_passed": passed},
        "diagnostics": {},
    }
    _emit(args, payload=payload)
    return 0 if passed else 3


# ------------------------------------------------------------------ main


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="adiametric",
        description="Time-dependent metric operators for non-Hermitian systems",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in [
        ("evolve", True),
        ("sweep", True),
        ("smatrix", True),
        ("static", True),
        ("moyal-check", False),
    ]:
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config, help="JSON configuration path")
        p.add_argument("--out", default=None, help="output path (default: stdout)")
        p.add_argument("--format", choices=["csv", "json"], default=None,
                       help="override the configured output format")
        p.add_argument("--quiet", action="store_true", help="suppress diagnostics")
    return parser


_DISPATCH = {
    "evolve": cmd_evolve,
    "sweep": cmd_sweep,
    "smatrix": cmd_smatrix,
    "static": cmd_static,
    "moyal-check": cmd_moyal_check,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = load_config(args.config) if args.config else None
        if args.format is None:
            args.format = config.output_format if config else "json"
        return _DISPATCH[args.command](config, args)
    except ConfigError as exc:
        if not args.quiet:
            print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except SolverError as exc:
        if not args.quiet:
            print(f"solver error: {exc}", file=sys.stderr)
        return 3
    except PhysicsError as exc:
        if not args.quiet:
            print(f"precondition violated: {exc}", file=sys.stderr)
        if args.format == "json":
            payload = {
                "config": config.raw if config else {},
                "result": {},
                "diagnostics": {
                    "error": {"type": type(exc).__name__, "message": str(exc)}
                },
            }
            _emit(args, payload=payload)
        return 4


if __name__ == "__main__":
    sys.exit(main())
