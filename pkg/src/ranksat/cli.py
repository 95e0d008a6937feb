"""Command-line front end.

Verbs: validate, enumerate, optimize, sample, report, compare, fetch-satlib.
Exit codes: 0 success, 1 runtime error (resource guard, download failure),
2 input error (parse errors, bad config, mismatched artifacts).
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .cnf import CostParams, DimacsError, load_instance_file
from .evolve import GaConfig
from .harness import (
    SATLIB_UF20_URL,
    artifact_angles,
    artifact_histogram,
    fetch_satlib,
    histogram_summary,
    load_artifact,
    regenerate_g_histogram,
    run_optimize,
    run_sample,
    save_artifact,
)
from .oracle import GUARD_MAX_N, GuardError, enumerate_h
from .qsim import AngleVector
from .shaping import QuantileSet, histogram_to_csv, histogram_to_json_obj

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_INPUT = 2


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    f = load_instance_file(args.instance)
    lit_counts = [len(c.literals) for c in f.clauses]
    print(f"n={f.n} m={f.m}")
    if f.m:
        print(
            f"literals: total={sum(lit_counts)} "
            f"min={min(lit_counts)} max={max(lit_counts)} "
            f"mean={sum(lit_counts) / f.m:.3f}"
        )
    return EXIT_OK


def cmd_enumerate(args) -> int:
    f = load_instance_file(args.instance)
    table = enumerate_h(f, max_n=args.max_n)
    if args.format == "json":
        _emit(json.dumps(table.to_json_obj(), indent=2) + "\n", args.out)
    else:
        _emit(table.to_csv(), args.out)
    return EXIT_OK


def _config_from_args(args) -> GaConfig:
    return GaConfig(
        generations=args.generations,
        population=args.population,
        mutation_prob=args.mutation_prob,
        tournament_size=args.tournament_size,
        elites=args.elites,
        shots_per_eval=args.shots,
        depth=args.depth,
        quantile_levels=QuantileSet.parse(args.quantiles),
        seed=args.seed,
    )


def cmd_optimize(args) -> int:
    cfg = _config_from_args(args)
    params = None
    if args.zeta is not None or args.vartheta is not None:
        if args.zeta is None or args.vartheta is None:
            raise ValueError("--zeta and --vartheta must be given together")
        params = CostParams(zeta=args.zeta, vartheta=args.vartheta)
    artifact = run_optimize(
        args.instance,
        cfg,
        params=params,
        final_shots=args.final_shots,
        oracle_max_n=args.max_n,
    )
    save_artifact(artifact, args.out)
    run = artifact["run"]
    print(f"best shaped cost: {-run['best_fitness']:.6g}")
    print("final distribution:")
    for row in run["final_sample"]["h_histogram"]:
        print(f"  h={row['h']:>3}  count={row['count']:>7}  p={100 * row['probability']:.3f}%")
    factor = run["improvement_factor"]
    if factor is not None:
        print(f"improvement factor P(h=0)/uniform: {factor:.6g}")
    else:
        print("improvement factor: n/a (oracle disabled or instance unsatisfiable)")
    print(f"artifact written to {args.out}")
    return EXIT_OK


def _load_angles(path: str) -> tuple[AngleVector, dict | None]:
    """Angles from a run/sample artifact or a bare JSON angle array."""
    obj = json.loads(Path(path).read_text(encoding="utf-8"))
    if isinstance(obj, list):
        return AngleVector.from_json_obj(obj), None
    artifact = load_artifact(path)
    return artifact_angles(artifact), artifact


def cmd_sample(args) -> int:
    angles, source = _load_angles(args.angles)
    f = load_instance_file(args.instance)
    if source is not None:
        recorded_n = source["run"]["instance"]["n"]
        if recorded_n != f.n:
            raise ValueError(
                f"artifact was made for n={recorded_n} but instance has n={f.n}"
            )
    artifact = run_sample(args.instance, angles, shots=args.shots, seed=args.seed)
    hist = artifact_histogram(artifact)
    _emit(histogram_to_csv(hist, value_label="h"), args.out_hist)
    if args.out:
        save_artifact(artifact, args.out)
    return EXIT_OK


def cmd_report(args) -> int:
    artifact = load_artifact(args.artifact)
    run = artifact["run"]
    if args.what == "final":
        if args.g_level:
            hist = regenerate_g_histogram(artifact)
            label = "g"
        else:
            hist = artifact_histogram(artifact)
            label = "h"
        if args.format == "json":
            _emit(json.dumps(histogram_to_json_obj(hist, label), indent=2) + "\n", args.out)
        else:
            _emit(histogram_to_csv(hist, value_label=label), args.out)
    elif args.what == "initial":
        oracle = run.get("oracle")
        if not oracle:
            return _fail("artifact has no oracle section", EXIT_INPUT)
        rows = oracle["initial_h"]
        if args.format == "json":
            _emit(json.dumps(rows, indent=2) + "\n", args.out)
        else:
            lines = ["h,count,probability,cumfreq"]
            lines += [
                f"{r['h']},{r['count']},{r['probability']:.9g},{r['cumfreq']:.9g}"
                for r in rows
            ]
            _emit("\n".join(lines) + "\n", args.out)
    else:  # history
        history = run.get("history")
        if history is None:
            return _fail("artifact has no history section", EXIT_INPUT)
        lines = ["generation,best_fitness,mean_fitness,best_so_far_fitness"]
        lines += [
            f"{r['generation']},{r['best_fitness']!r},{r['mean_fitness']!r},"
            f"{r['best_so_far_fitness']!r}"
            for r in history
        ]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    art_a = load_artifact(args.artifact_a)
    art_b = load_artifact(args.artifact_b)
    sha_a = art_a["run"]["instance"]["sha256"]
    sha_b = art_b["run"]["instance"]["sha256"]
    if sha_a != sha_b:
        raise ValueError("artifacts refer to different instances")
    hist_a = artifact_histogram(art_a)
    hist_b = artifact_histogram(art_b)
    rows_a = {int(v): (int(c), float(p)) for v, c, p in
              zip(hist_a.values, hist_a.counts, hist_a.probabilities())}
    rows_b = {int(v): (int(c), float(p)) for v, c, p in
              zip(hist_b.values, hist_b.counts, hist_b.probabilities())}
    support = sorted(set(rows_a) | set(rows_b))
    lines = ["h,count_a,probability_a,count_b,probability_b"]
    for h in support:
        ca, pa = rows_a.get(h, (0, 0.0))
        cb, pb = rows_b.get(h, (0, 0.0))
        lines.append(f"{h},{ca},{pa:.9g},{cb},{pb:.9g}")
    _emit("\n".join(lines) + "\n", args.out)
    sum_a = histogram_summary(hist_a)
    sum_b = histogram_summary(hist_b)
    for key in ("p_h0", "e_0.1", "e_0.5", "mean_h"):
        print(f"{key}: a={sum_a[key]:.6g} b={sum_b[key]:.6g}")
    return EXIT_OK


def cmd_fetch_satlib(args) -> int:
    count = fetch_satlib(args.dest, url=args.url, expected_count=args.expected_count)
    print(f"fetched {count} instances into {args.dest}")
    return EXIT_OK


def _add_ga_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--generations", type=int, default=150)
    p.add_argument("--population", type=int, default=30)
    p.add_argument("--mutation-prob", type=float, default=0.25)
    p.add_argument("--tournament-size", type=int, default=3)
    p.add_argument("--elites", type=int, default=4)
    p.add_argument("--shots", type=int, default=250, help="shots per fitness evaluation")
    p.add_argument("--depth", type=int, default=2)
    p.add_argument(
        "--quantiles",
        default="0.01,0.05,0.1",
        help="comma-separated quantile levels of the shaped cost",
    )
    p.add_argument("--seed", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ranksat",
        description="Rank-phase QAOA workbench for 3-SAT/MaxSAT instances",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse an instance and print a summary")
    p.add_argument("instance")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("enumerate", help="exact initial h-distribution by enumeration")
    p.add_argument("instance")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--max-n", type=int, default=GUARD_MAX_N)
    p.set_defaults(fn=cmd_enumerate)

    p = sub.add_parser("optimize", help="GA search for circuit angles")
    p.add_argument("instance")
    _add_ga_flags(p)
    p.add_argument("--final-shots", type=int, default=100_000)
    p.add_argument("--zeta", type=float, default=None)
    p.add_argument("--vartheta", type=float, default=None)
    p.add_argument("--max-n", type=int, default=GUARD_MAX_N,
                   help="oracle guard; larger n only disables the embedded oracle section")
    p.add_argument("--out", required=True, help="artifact JSON path")
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("sample", help="sample a stored angle vector afresh")
    p.add_argument("instance")
    p.add_argument("--angles", required=True,
                   help="run/sample artifact or bare JSON angle array")
    p.add_argument("--shots", type=int, default=100_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--out", default=None, help="write a sample artifact here")
    p.add_argument("--out-hist", default=None, help="histogram CSV path (default stdout)")
    p.set_defaults(fn=cmd_sample)

    p = sub.add_parser("report", help="emit artifact sections as CSV/JSON")
    p.add_argument("artifact")
    p.add_argument("--what", choices=("final", "initial", "history"), default="final")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--g-level", action="store_true",
                   help="emit the g-cost histogram instead of the h projection")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_report)

    p = sub.add_parser("compare", help="side-by-side histograms of two artifacts")
    p.add_argument("artifact_a")
    p.add_argument("artifact_b")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("fetch-satlib", help="download the SATLIB uf20-91 benchmark set")
    p.add_argument("dest")
    p.add_argument("--url", default=SATLIB_UF20_URL)
    p.add_argument("--expected-count", type=int, default=1000)
    p.set_defaults(fn=cmd_fetch_satlib)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except DimacsError as exc:
        return _fail(str(exc), EXIT_INPUT)
    except GuardError as exc:
        return _fail(str(exc), EXIT_RUNTIME)
    except (ValueError, KeyError, FileNotFoundError, json.JSONDecodeError) as exc:
        return _fail(str(exc), EXIT_INPUT)
    except (RuntimeError, OSError) as exc:
        return _fail(str(exc), EXIT_RUNTIME)


if __name__ == "__main__":
    sys.exit(main())
