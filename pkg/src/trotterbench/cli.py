"""Command-line front end: parse, compile, plan, simulate, estimate.

Machine-readable artifacts go to the requested output path (or stdout);
human summaries go to stderr.  Reruns with identical flags and seeds produce
byte-identical artifacts, and every artifact embeds its resolved
configuration.

Exit codes: 0 success, 2 usage error, 3 validation error, 4 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import compiler, dense, estimator, planner, synth
from .errors import (
    BranchCutError,
    DegenerateFitError,
    ParseError,
    ResourceCapError,
    ValidationError,
)
from .hamiltonian import (
    FermionHamiltonian,
    load_integrals,
    serialize_integrals,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VALIDATION = 3
EXIT_RESOURCE = 4


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        Path(path).write_text(text, encoding="utf-8")


def _emit_json(payload: dict, path: str | None) -> None:
    _write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", path)


def _parse_synth_spec(spec: str) -> synth.SynthConfig:
    """Parse 'N=8,r=2,removal=0.25,seed=42' into a SynthConfig."""
    fields: dict[str, str] = {}
    for chunk in spec.split(","):
        if not chunk:
            continue
        key, _, value = chunk.partition("=")
        if not value:
            raise ValidationError(f"malformed synth spec item {chunk!r}")
        fields[key.strip().lower()] = value.strip()
    try:
        return synth.SynthConfig(
            n_spin_orbitals=int(fields["n"]),
            inverse_filling=float(fields.get("r", "2")),
            removal_fraction=float(fields.get("removal", synth.DEFAULT_REMOVAL_FRACTION)),
            seed=int(fields.get("seed", "0")),
        )
    except KeyError as exc:
        raise ValidationError(f"synth spec missing {exc.args[0]!r} (need at least N=...)")
    except ValueError as exc:
        raise ValidationError(f"malformed synth spec {spec!r}: {exc}")


def _load_hamiltonian(args) -> tuple[FermionHamiltonian, dict]:
    if getattr(args, "input", None) and getattr(args, "synth", None):
        raise ValidationError("give either --input or --synth, not both")
    if getattr(args, "input", None):
        path = Path(args.input)
        if not path.exists():
            raise ValidationError(f"input file not found: {path}")
        return load_integrals(path), {"input": str(path)}
    if getattr(args, "synth", None):
        cfg = _parse_synth_spec(args.synth)
        return synth.generate_molecule(cfg), {"synth": cfg.to_dict()}
    raise ValidationError("an input Hamiltonian is required (--input or --synth)")


def _dt_list(text: str) -> list[float]:
    try:
        values = [float(x) for x in text.split(",") if x]
    except ValueError as exc:
        raise ValidationError(f"malformed dt list {text!r}: {exc}")
    if not values:
        raise ValidationError("empty dt list")
    return values


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_synth(args) -> int:
    cfg = synth.SynthConfig(
        n_spin_orbitals=args.n_so,
        inverse_filling=args.inverse_filling,
        removal_fraction=args.removal,
        seed=args.seed,
    )
    h = synth.generate_molecule(cfg)
    header = "# " + json.dumps({"config": cfg.to_dict()}, sort_keys=True) + "\n"
    _write_text(header + serialize_integrals(h), args.output)
    _note(f"synthetic molecule: {h.n_terms} terms over {h.n_spin_orbitals} orbitals")
    return EXIT_OK


def _cmd_count(args) -> int:
    h, source = _load_hamiltonian(args)
    metrics = compiler.metrics_for_step(
        h,
        dt=args.dt,
        order=args.order,
        mode=args.mode,
        fuse_double_excitations=args.fuse,
    )
    payload = {
        "config": {
            **source,
            "dt": args.dt,
            "order": args.order,
            "mode": args.mode,
            "fuse_double_excitations": args.fuse,
        },
        **metrics.to_dict(),
    }
    _emit_json(payload, args.output)
    _note(
        f"rotations {metrics.rotations}, sequential {metrics.sequential_total}, "
        f"parallel {metrics.parallel_total}"
    )
    return EXIT_OK


def _cmd_compile(args) -> int:
    h, source = _load_hamiltonian(args)
    circuit = compiler.circuit_for_step(h, args.dt, order=args.order, mode=args.mode)
    _write_text("\n".join(circuit.export_lines()) + "\n", args.output)
    if args.metrics:
        metrics = compiler.metrics_for_step(h, dt=args.dt, order=args.order, mode=args.mode)
        _emit_json({"config": {**source, "dt": args.dt, "order": args.order,
                               "mode": args.mode}, **metrics.to_dict()}, args.metrics)
    _note(f"exported {circuit.total_gates()} gates on {circuit.n_qubits} qubits")
    return EXIT_OK


def _cmd_simulate(args) -> int:
    h, source = _load_hamiltonian(args)
    n_electrons = args.electrons if args.electrons is not None else h.n_electrons
    dts = _dt_list(args.dt)
    curve = dense.error_curve(
        h,
        lambda d: planner.plan_step(h, d, order=args.order, ordering_strategy=args.ordering,
                                    seed=args.seed),
        dts,
        n_electrons=n_electrons,
    )
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["dt", "error", "excluded"])
    for p in curve.points:
        writer.writerow([f"{p.dt:.12g}", f"{p.error:.12g}", int(p.excluded)])
    _write_text(buf.getvalue(), args.output)
    fit_payload = {
        "config": {
            **source,
            "dt_list": dts,
            "order": args.order,
            "ordering": args.ordering,
            "seed": args.seed,
            "n_electrons": n_electrons,
        },
        "exact_energy": curve.exact_energy,
        "fit": {
            "exponent": curve.exponent,
            "prefactor": curve.prefactor,
            "r_squared": curve.r_squared,
        },
        "excluded_points": [
            {"dt": p.dt, "reason": p.reason} for p in curve.points if p.excluded
        ],
    }
    if args.fit_output:
        _emit_json(fit_payload, args.fit_output)
    if curve.fitted():
        _note(f"fit exponent {curve.exponent:.3f} (r^2 {curve.r_squared:.5f})")
        if args.eps_target:
            steps = dense.required_steps(curve, args.eps_target)
            _note(f"steps per unit time for eps={args.eps_target:g}: {steps}")
    else:
        _note("error curve too flat or too sparse to fit")
    return EXIT_OK


def _cmd_scale_study(args) -> int:
    n_values = [int(x) for x in args.n_list.split(",") if x]
    if args.figure == "gates":
        study = compiler.count_scaling_study(n_values)
        payload = {
            "config": {"figure": "gates", "n_list": n_values},
            "exponents": {
                "rotations": study.rotations.exponent,
                "sequential": study.sequential.exponent,
                "parallel": study.parallel.exponent,
            },
            "r_squared": {
                "rotations": study.rotations.r_squared,
                "sequential": study.sequential.r_squared,
                "parallel": study.parallel.r_squared,
            },
            "points": study.points,
        }
        _emit_json(payload, args.output)
        _note(
            "gate-count exponents: sequential "
            f"{study.sequential.exponent:.2f}, rotations {study.rotations.exponent:.2f}, "
            f"parallel {study.parallel.exponent:.2f}"
        )
        return EXIT_OK

    dts = _dt_list(args.dt)
    seeds = [int(s) for s in args.seeds.split(",") if s]
    points = []
    for n in n_values:
        for seed in seeds:
            cfg = synth.SynthConfig(
                n_spin_orbitals=n,
                inverse_filling=args.inverse_filling,
                removal_fraction=args.removal,
                seed=seed,
            )
            h = synth.generate_molecule(cfg)
            curve = dense.error_curve(
                h, lambda d: planner.plan_step(h, d, order=2), dts,
                n_electrons=cfg.n_electrons,
            )
            if not curve.fitted():
                _note(f"N={n} seed={seed}: curve not fittable, skipped")
                continue
            steps = dense.required_steps(curve, args.eps_target)
            points.append(
                {
                    "n_spin_orbitals": n,
                    "seed": seed,
                    "terms": h.n_terms,
                    "steps": steps,
                    "exponent": curve.exponent,
                }
            )
            _note(f"N={n} seed={seed}: m={h.n_terms} steps={steps}")
    model = estimator.fit_step_scaling(
        [(p["terms"], p["steps"]) for p in points], inverse_filling=args.inverse_filling
    )
    payload = {
        "config": {
            "figure": "steps",
            "n_list": n_values,
            "seeds": seeds,
            "inverse_filling": args.inverse_filling,
            "removal": args.removal,
            "dt_list": dts,
            "eps_target": args.eps_target,
        },
        "points": points,
        "fit": {
            "alpha": model.alpha,
            "prefactor": model.prefactor,
            "r_squared": model.r_squared,
        },
    }
    _emit_json(payload, args.output)
    _note(f"step-count scaling alpha = {model.alpha:.3f} (r^2 {model.r_squared:.4f})")
    return EXIT_OK


def _cmd_coalesce(args) -> int:
    h, source = _load_hamiltonian(args)
    plan = planner.plan_coalesced(h, args.time, n_buckets=args.buckets, ratio=args.ratio)
    comparison = planner.coalesce_rotation_comparison(h, plan)
    payload = {
        "config": {**source, "time": args.time, "buckets": args.buckets, "ratio": args.ratio},
        **planner.plan_report(plan, h),
        "uniform_comparison": comparison,
    }
    _emit_json(payload, args.output)
    _note(
        f"coalesced rotations {comparison['coalesced_rotations']} vs uniform "
        f"{comparison['uniform_rotations']} (x{comparison['savings_factor']:.2f} saving)"
    )
    return EXIT_OK


def _cmd_extrapolate(args) -> int:
    anchor = None if args.anchor == "water" else None
    result = estimator.extrapolate(
        args.target,
        anchor=anchor,
        gate_rate_hz=args.gate_rate,
        error_correction_multiplier=args.ec_multiplier,
    )
    pe_time = estimator.phase_estimation_time(args.accuracy)
    payload = {
        "config": {
            "anchor": args.anchor,
            "target": args.target,
            "gate_rate_hz": args.gate_rate,
            "ec_multiplier": args.ec_multiplier,
            "accuracy": args.accuracy,
        },
        "phase_estimation_time": pe_time.to_dict(),
        "note": (
            "evolution time uses the calibrated operating constant; the strict "
            "pi/accuracy value is reported alongside"
        ),
        **result.to_dict(),
    }
    _emit_json(payload, args.output)
    _note(
        f"N={args.target}: total sequential {result.total_sequential:.3e}, "
        f"parallel {result.total_parallel:.3e}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="trotterbench",
        description="Fermionic-Hamiltonian compiler, Trotter planner and resource estimator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_io(p, needs_input=True):
        if needs_input:
            p.add_argument("--input", help="integral file")
            p.add_argument("--synth", help="synthetic spec, e.g. N=8,r=2,seed=42")
        p.add_argument("--output", "-o", default=None, help="output path (default stdout)")

    p = sub.add_parser("synth", help="emit a synthetic molecule integral file")
    p.add_argument("--n-so", type=int, required=True, help="spin orbitals")
    p.add_argument("--inverse-filling", "-r", type=float, default=2.0)
    p.add_argument("--removal", type=float, default=synth.DEFAULT_REMOVAL_FRACTION)
    p.add_argument("--seed", type=int, default=0)
    add_io(p, needs_input=False)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("count", help="per-step gate counts for a Hamiltonian")
    add_io(p)
    p.add_argument("--dt", type=float, default=None)
    p.add_argument("--order", type=int, default=1, choices=(1, 2))
    p.add_argument("--mode", default="sequential", choices=("sequential", "parallel"))
    p.add_argument("--fuse", action="store_true",
                   help="pool double-excitation rotations on shared supports")
    p.set_defaults(func=_cmd_count)

    p = sub.add_parser("compile", help="export the step circuit as a gate list")
    add_io(p)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--order", type=int, default=1, choices=(1, 2))
    p.add_argument("--mode", default="sequential", choices=("sequential", "parallel"))
    p.add_argument("--metrics", default=None, help="also write a JSON metrics report here")
    p.set_defaults(func=_cmd_compile)

    p = sub.add_parser("simulate", help="error curve and energy estimates")
    add_io(p)
    p.add_argument("--dt", required=True, help="comma-separated time steps")
    p.add_argument("--order", type=int, default=2, choices=(1, 2))
    p.add_argument("--ordering", default="canonical", choices=planner.ORDERING_STRATEGIES)
    p.add_argument("--seed", type=int, default=None, help="seed for random ordering")
    p.add_argument("--electrons", type=int, default=None)
    p.add_argument("--eps-target", type=float, default=None)
    p.add_argument("--fit-output", default=None, help="JSON fit report path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("scale-study", help="gate-count or step-count scaling study")
    p.add_argument("--figure", choices=("gates", "steps"), required=True)
    p.add_argument("--n-list", required=True, help="comma-separated orbital counts")
    p.add_argument("--inverse-filling", "-r", type=float, default=2.0)
    p.add_argument("--removal", type=float, default=synth.DEFAULT_REMOVAL_FRACTION)
    p.add_argument("--seeds", default="0", help="comma-separated seeds")
    p.add_argument("--dt", default="0.04,0.02,0.01,0.004")
    p.add_argument("--eps-target", type=float, default=1e-3)
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=_cmd_scale_study)

    p = sub.add_parser("coalesce", help="bucketed plan, bounds and savings")
    add_io(p)
    p.add_argument("--time", type=float, required=True, help="total evolution time")
    p.add_argument("--buckets", type=int, default=4)
    p.add_argument("--ratio", type=float, default=2.0)
    p.set_defaults(func=_cmd_coalesce)

    p = sub.add_parser("extrapolate", help="gate-budget projection to larger molecules")
    p.add_argument("--anchor", default="water", choices=("water",))
    p.add_argument("--target", type=int, required=True, help="target spin orbitals")
    p.add_argument("--gate-rate", type=float, default=1e9, help="gates per second")
    p.add_argument("--ec-multiplier", type=float, default=1.0)
    p.add_argument("--accuracy", type=float, default=1e-3, help="target energy accuracy")
    p.add_argument("--output", "-o", default=None)
    p.set_defaults(func=_cmd_extrapolate)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ResourceCapError as exc:
        _note(f"resource cap: {exc}")
        return EXIT_RESOURCE
    except (ValidationError, ParseError, DegenerateFitError, BranchCutError) as exc:
        _note(f"invalid input: {exc}")
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
