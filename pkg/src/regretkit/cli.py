"""Command-line interface.

Subcommands: validate, solve, elicit (interactive or simulated), experiment,
serve, generate.  All randomized paths take explicit seeds and print
byte-stable output.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys

from .document import load_problem
from .elicit import ElicitationSession, Termination, render_query
from .errors import RegretkitError, ValidationError
from .regret import normalization_width
from .simulate import (
    ExperimentSpec,
    GeneratorSpec,
    PriorSpec,
    generate_problem,
    run_experiment,
    sample_true_utility,
    simulate_answer,
)
from .space import constraint_from_json


def _print_outcome(schema, outcome, label):
    names = schema.outcome_names(outcome)
    pairs = ", ".join(f"{a.name}={n}" for a, n in zip(schema.attributes, names))
    print(f"{label}: {pairs}")


def cmd_validate(args) -> int:
    try:
        doc = load_problem(args.problem)
    except ValidationError as exc:
        print("invalid problem document:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 1
    print(f"ok: {doc.name} ({doc.schema.n_attributes} attributes, "
          f"{doc.structure.n_factors} factors, {doc.feasibility.mode})")
    return 0


def cmd_solve(args) -> int:
    doc = load_problem(args.problem)
    space = doc.initial_space()
    if args.space:
        with open(args.space, "r", encoding="utf-8") as fh:
            for record in json.load(fh):
                space = space.assert_constraint(constraint_from_json(record))
    from .regret import minimax_regret

    result = minimax_regret(space, doc.feasibility)
    _print_outcome(doc.schema, result.x_star, "recommendation")
    _print_outcome(doc.schema, result.witness, "witness")
    print(f"minimax regret: {result.value!r}")
    print(f"normalized: {result.value / normalization_width(space)!r}")
    return 0


def cmd_elicit(args) -> int:
    doc = load_problem(args.problem)
    space = doc.initial_space()
    session = ElicitationSession(
        doc.structure,
        space,
        doc.feasibility,
        args.strategy,
        Termination(threshold=args.threshold, max_queries=args.max_queries),
        seed=args.seed,
    )
    width = normalization_width(space)
    if args.simulate:
        true_model = sample_true_utility(space, seed=args.seed)
        answer = lambda q: simulate_answer(true_model, q)
    else:
        def answer(q):
            print(render_query(q, doc.structure)["text"], file=sys.stderr)
            while True:
                raw = input("[y/n] > ").strip().lower()
                if raw in ("y", "yes"):
                    return True
                if raw in ("n", "no"):
                    return False

    print("step,queryType,detail,answer,mmr,normalizedMmr")
    print(f"0,,,,{session.current.value!r},{session.current.value / width!r}")
    while session.done() is None:
        q = session.select_query()
        if q is None:
            break
        a = answer(q)
        session.apply_response(q, a)
        detail = json.dumps(dataclasses.asdict(q), sort_keys=True).replace(",", ";")
        print(
            f"{session.query_count},{q.kind},{detail},{'yes' if a else 'no'},"
            f"{session.current.value!r},{session.current.value / width!r}"
        )
    _print_outcome(doc.schema, session.current.x_star, "final recommendation")
    print(f"final minimax regret: {session.current.value!r}")
    return 0


def cmd_experiment(args) -> int:
    with open(args.spec, "r", encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise RegretkitError(f"experiment spec is not valid JSON: {exc}") from None
    try:
        problem = GeneratorSpec(**raw.get("problem", {}))
        prior = PriorSpec(**{k: tuple(v) if isinstance(v, list) else v
                             for k, v in raw.get("prior", {}).items()})
    except TypeError as exc:
        raise RegretkitError(f"bad experiment spec: {exc}") from None
    spec = ExperimentSpec(
        problem=problem,
        strategies=tuple(raw.get("strategies", ("AB+LB", "LB", "random"))),
        runs=int(raw.get("runs", 20)),
        max_queries=int(raw.get("max_queries", 100)),
        prior=prior,
        seed=int(raw.get("seed", 0)),
        threshold_normalized=float(raw.get("threshold_normalized", 0.0)),
        check_true_regret=bool(raw.get("check_true_regret", True)),
    )
    result = run_experiment(spec)
    sys.stdout.write(result.to_csv())
    if result.max_true_regret_violation > 1e-9:
        print(
            f"true regret exceeded MMR by {result.max_true_regret_violation!r}",
            file=sys.stderr,
        )
        return 1
    return 0


def cmd_generate(args) -> int:
    doc = generate_problem(GeneratorSpec(preset=args.preset, seed=args.seed))
    if args.out:
        doc.save(args.out)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(doc.to_canonical_json())
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(args.data), host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="regretkit",
        description="Minimax-regret decision support over GAI utility models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="validate a problem document")
    p.add_argument("problem")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="print the regret-minimizing configuration")
    p.add_argument("problem")
    p.add_argument("--space", help="JSON list of extra constraints to assert")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("elicit", help="run an elicitation session (CSV trace)")
    p.add_argument("problem")
    p.add_argument("--strategy", default="AB+LB")
    p.add_argument("--simulate", action="store_true",
                   help="answer from a sampled hidden utility instead of stdin")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--max-queries", type=int, default=50)
    p.set_defaults(func=cmd_elicit)

    p = sub.add_parser("experiment", help="run a strategy-comparison experiment")
    p.add_argument("spec", help="experiment spec JSON file")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("generate", help="emit a synthetic problem document")
    p.add_argument("--preset", default="trend-10x5")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("serve", help="start the HTTP session API")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--data", default=None, help="data directory (default $REGRETKIT_DATA)")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print("error: invalid document:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 1
    except (RegretkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
