"""Command-line surface: build families, compose channels, run experiments.

Channel arguments parse as ``FAMILY[:kappa[:a]]``.  ``compose OUTER INNER``
follows the composition-table convention: the right argument acts first.
Artifacts land in ``--output-dir`` or ``$BK_OUTPUT_DIR`` (default: cwd),
written atomically, with numeric fields at 12 significant digits.

Exit codes: 2 completeness defect too large (or no Kraus list for the
family), 3 unsupported composition pair, 4 invariant violation inside an
experiment, 1 other errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

import numpy as np

from . import analysis, kraus, phasespace
from .channels import ChannelSpec, parse_channel
from .errors import BoskrausError, DefectTooLarge, UnsupportedFamily, UnsupportedPair
from .fock import state_new

SCHEMA_VERSION = 1


def _round12(value):
    if isinstance(value, float):
        return float(f"{value:.12g}")
    if isinstance(value, (list, tuple)):
        return [_round12(v) for v in value]
    if isinstance(value, dict):
        return {k: _round12(v) for k, v in value.items()}
    return value


def _emit_json(payload: dict, path: str | None = None) -> None:
    payload = {"schema": SCHEMA_VERSION, **_round12(payload)}
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        _atomic_write(path, text)


def _atomic_write(path: str, text: str) -> None:
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-boskraus-")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _output_dir(args) -> str:
    return args.output_dir or os.environ.get("BK_OUTPUT_DIR", ".")


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def cmd_kraus(args) -> int:
    spec = parse_channel(args.family_spec) if args.family_spec else ChannelSpec(
        args.family, args.kappa, args.noise)
    try:
        if spec.family in ("A2", "B1"):
            family = kraus.build_continuous(spec, args.nodes, args.ncut)
        else:
            ell = args.ell_max if args.ell_max is not None else kraus.suggest_ell_max(spec, args.ncut)
            family = kraus.build_discrete(spec, ell, args.ncut)
    except (UnsupportedFamily, DefectTooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(f"completeness_defect {_fmt(family.completeness_defect)}")
    _emit_json(family.to_json_dict(), args.out)
    return 0


def cmd_compose(args) -> int:
    outer = parse_channel(args.outer)
    inner = parse_channel(args.inner)
    try:
        if args.lam is not None and args.lam != 1.0 or args.theta != 0.0:
            composite = phasespace.table2_compose(outer, inner, args.lam or 1.0, args.theta)
        else:
            composite = phasespace.table1_compose(outer, inner)
    except UnsupportedPair as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    payload = {"composite": composite.to_json_dict()}
    if args.verify:
        xy = phasespace.compose_xy(phasespace.canonical_xy(inner), phasespace.canonical_xy(outer))
        direct = phasespace.classify(xy)
        payload["verify"] = {
            "classified": direct.to_json_dict(),
            "family_match": direct.family == composite.family,
            "kappa_delta": abs((direct.kappa or 0.0) - (composite.kappa or 0.0)),
            "a_delta": abs(direct.noise_a - composite.noise_a),
        }
    print(str(composite))
    _emit_json(payload, args.out)
    return 0


def _experiment_fixedpoint(args, out_dir: str) -> int:
    spec = ChannelSpec(args.family, args.kappa)
    ell = kraus.suggest_ell_max(spec, args.ncut)
    family = kraus.build_discrete(spec, ell, args.ncut)
    rows = ["a0_input,step,a0_estimate,trace_distance"]
    final = []
    for a0 in args.a0:
        rho = state_new("thermal", args.ncut, a0=a0)
        traj = analysis.iterate(family, rho, args.steps)
        for step in range(args.steps + 1):
            dist = traj.step_distances[step - 1] if step else 0.0
            rows.append(f"{_fmt(a0)},{step},{_fmt(traj.a0_estimates[step])},{_fmt(dist)}")
        final.append(traj.a0_estimates[-1])
    _atomic_write(os.path.join(out_dir, "fixedpoint.csv"), "\n".join(rows) + "\n")
    target = analysis.fixed_point(spec)
    if target is not None:
        worst = max(abs(f - target) for f in final)
        print(f"fixed_point target {_fmt(target)} worst_final_gap {_fmt(worst)}")
        if worst > 0.01:
            print("invariant violated: fixedpoint-convergence", file=sys.stderr)
            return 4
    return 0


def _experiment_zeno(args, out_dir: str) -> int:
    rows = ["mode,n_interrupts,step,kappa"]
    for n in args.interrupts:
        for step in range(n + 1):
            val = analysis.zeno_kappa(args.mode, n, step, args.total)
            rows.append(f"{args.mode},{n},{step},{_fmt(val)}")
    _atomic_write(os.path.join(out_dir, "zeno.csv"), "\n".join(rows) + "\n")
    return 0


def _experiment_extremal(args, out_dir: str) -> int:
    report = {}
    for text in args.channels:
        spec = parse_channel(text)
        ell = max(kraus.suggest_ell_max(spec, args.ncut), args.block)
        family = kraus.build_discrete(spec, ell, args.ncut)
        rep = analysis.gram_rank(family, args.block)
        report[text] = {
            "block": rep.block,
            "numerical_rank": rep.numerical_rank,
            "smallest_over_largest": float(rep.singular_values[-1] / rep.singular_values[0]),
        }
        if rep.numerical_rank != rep.block:
            print(f"invariant violated: extremality({text})", file=sys.stderr)
            _emit_json({"gram": report}, os.path.join(out_dir, "extremal.json"))
            return 4
    _emit_json({"gram": report}, os.path.join(out_dir, "extremal.json"))
    return 0


def _experiment_scaling(args, out_dir: str) -> int:
    rng = np.random.default_rng(args.seed)
    grid = rng.uniform(-1.2, 1.2, size=(args.grid, 2)) @ np.array([1.0, 1.0j])
    report, bad = {}, None
    probes = {"C2": state_new("fock", args.ncut, n=1), "C1": state_new("coherent", args.ncut, alpha=0.7),
              "D": state_new("coherent", args.ncut, alpha=0.5 + 0.3j)}
    for text in args.channels:
        spec = parse_channel(text)
        out = analysis.classicality_check(spec, [probes.get(spec.family, probes["C2"])], grid)
        report[text] = [{"check": r.check, "max_deviation": r.max_deviation, "passed": r.passed}
                        for r in out]
        if not all(r.passed for r in out):
            bad = text
    _emit_json({"scaling": report}, os.path.join(out_dir, "scaling.json"))
    if bad is not None:
        print(f"invariant violated: scaling({bad})", file=sys.stderr)
        return 4
    return 0


def _experiment_verify_all(args, out_dir: str) -> int:
    from .verify import run_all

    results = run_all(args.ncut, args.seed)
    _emit_json({"invariants": results}, os.path.join(out_dir, "verify_all.json"))
    failures = [name for name, rec in results.items() if not rec["passed"]]
    for name in failures:
        print(f"invariant violated: {name}", file=sys.stderr)
    if failures:
        return 4
    print(f"verified {len(results)} invariant suites")
    return 0


def cmd_experiment(args) -> int:
    out_dir = _output_dir(args)
    runner = {
        "fixedpoint": _experiment_fixedpoint,
        "zeno": _experiment_zeno,
        "extremal": _experiment_extremal,
        "scaling": _experiment_scaling,
        "verify-all": _experiment_verify_all,
    }[args.name]
    return runner(args, out_dir)


def _csv_floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v]


def _csv_ints(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boskraus", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p_kraus = sub.add_parser("kraus", help="build and serialize a Kraus family")
    p_kraus.add_argument("family_spec", nargs="?", help="channel as FAMILY[:kappa[:a]]")
    p_kraus.add_argument("--family", help="family tag (alternative to positional spec)")
    p_kraus.add_argument("--kappa", type=float, default=None)
    p_kraus.add_argument("--noise", type=float, default=0.0)
    p_kraus.add_argument("--ncut", type=int, default=32)
    p_kraus.add_argument("--ell-max", type=int, default=None)
    p_kraus.add_argument("--nodes", type=int, default=64)
    p_kraus.add_argument("--out", default=None, help="write JSON here instead of stdout")
    p_kraus.set_defaults(func=cmd_kraus)

    p_comp = sub.add_parser("compose", help="compose two channels (right argument acts first)")
    p_comp.add_argument("outer")
    p_comp.add_argument("inner")
    p_comp.add_argument("--lambda", dest="lam", type=float, default=None)
    p_comp.add_argument("--theta", type=float, default=0.0)
    p_comp.add_argument("--verify", action="store_true")
    p_comp.add_argument("--out", default=None)
    p_comp.set_defaults(func=cmd_compose)

    p_exp = sub.add_parser("experiment", help="run a canned experiment, writing CSV/JSON artifacts")
    p_exp.add_argument("name", choices=["fixedpoint", "zeno", "extremal", "scaling", "verify-all"])
    p_exp.add_argument("--family", default="D")
    p_exp.add_argument("--kappa", type=float, default=0.8)
    p_exp.add_argument("--a0", type=_csv_floats, default=[1.0, 3.0, 7.0, 10.0])
    p_exp.add_argument("--steps", type=int, default=40)
    p_exp.add_argument("--mode", default="attenuator", choices=["attenuator", "amplifier"])
    p_exp.add_argument("--interrupts", "--N", dest="interrupts", type=_csv_ints, default=[2, 3, 5, 10])
    p_exp.add_argument("--total", type=float, default=None)
    p_exp.add_argument("--channels", type=lambda s: s.split(","),
                       default=["D:0.5", "C1:0.7", "C2:1.3"])
    p_exp.add_argument("--block", type=int, default=6)
    p_exp.add_argument("--grid", type=int, default=25)
    p_exp.add_argument("--ncut", type=int, default=48)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.add_argument("--output-dir", default=None)
    p_exp.set_defaults(func=cmd_experiment)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "ncut", 8) < 8:
        print("error: the cutoff must be at least 8", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except BoskrausError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
