"""Command-line workbench: ``pfml {validate,eval,dist,synth,check,transform}``.

Exit codes: 0 success, 1 domain failure (invalid model, invalid certificate,
failing suite), 2 usage or parse error.  Every number printed is an exact
rational.  ``--json`` switches to the versioned report schema ``pfml/1``.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

from . import __version__
from .checks import SUITES, run_suites
from .errors import ModelError, ParseError, PfmlError
from .game import game_chain
from .metrics import (
    GAME,
    KANTOROVICH,
    LOGICAL_LB,
    LOGICAL_WITNESS,
    WASSERSTEIN,
    describe_witness,
    kantorovich_chain,
    logical_lb_table,
    stabilized,
    wasserstein_chain,
)
from .model import DEFAULT_ROLE, disjoint_union, find_violations, fmt, load_model, random_models, restrict, save_model, unravel
from .semantics import eval_concept, eval_formula
from .synthesis import Synthesizer
from .syntax import free_vars, parse_concept, parse_formula, to_text

SCHEMA = "pfml/1"
EXACT_METHODS = (WASSERSTEIN, KANTOROVICH, GAME, LOGICAL_WITNESS)


class Usage(Exception):
    pass


def _pair(text: str) -> tuple[str, str]:
    parts = text.split(",")
    if len(parts) != 2 or not all(parts):
        raise argparse.ArgumentTypeError(f"expected a,b but got {text!r}")
    return parts[0], parts[1]


def _state_radius(text: str) -> tuple[str, int]:
    state, _, k = text.rpartition(",")
    if not state or not k.isdigit():
        raise argparse.ArgumentTypeError(f"expected state,k but got {text!r}")
    return state, int(k)


def _nonneg(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pfml", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"pfml {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the JSON report")
    common.add_argument("--role", default=DEFAULT_ROLE, help="role used by distances and games")
    common.add_argument("--timing", action="store_true", help="include wall-clock timing (breaks byte-identity)")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("validate", parents=[common], help="validate a model file")
    s.add_argument("model")

    s = sub.add_parser("eval", parents=[common], help="evaluate a concept or formula")
    s.add_argument("model")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--concept")
    g.add_argument("--formula")
    s.add_argument("--state")
    s.add_argument("--env", action="append", default=[], help="var=state (repeatable or comma separated)")
    s.add_argument("--all-states", action="store_true")

    s = sub.add_parser("dist", parents=[common], help="depth-n distance tables")
    s.add_argument("model")
    s.add_argument("--depth", type=_nonneg, required=True)
    s.add_argument(
        "--method",
        default=WASSERSTEIN,
        choices=[WASSERSTEIN, KANTOROVICH, GAME, "logical", LOGICAL_LB, "all"],
    )
    s.add_argument("--pair", type=_pair)
    s.add_argument("--budget", type=int, default=2000, help="concept budget for logical-lb")

    s = sub.add_parser("synth", parents=[common], help="synthesize a distinguishing concept")
    s.add_argument("model")
    s.add_argument("--depth", type=_nonneg, required=True)
    s.add_argument("--pair", type=_pair, required=True)

    s = sub.add_parser("check", parents=[common], help="run invariant suites")
    s.add_argument("model", nargs="?")
    s.add_argument("--random", nargs=3, type=int, metavar=("COUNT", "SIZE", "DENOM"))
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--suite", required=True, help=f"comma separated: {','.join(SUITES)}")
    s.add_argument("--depth", type=_nonneg, default=2)

    s = sub.add_parser("transform", parents=[common], help="restrict, unravel or union a model")
    s.add_argument("model")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--restrict", type=_state_radius, metavar="STATE,K")
    g.add_argument("--unravel", type=_state_radius, metavar="STATE,K")
    g.add_argument("--union", metavar="OTHER")
    s.add_argument("-o", "--output")
    return p


# -- commands ---------------------------------------------------------------------
# Each returns (exit code, report dict, text lines).


def cmd_validate(args):
    with open(args.model, encoding="utf-8") as fh:
        text = fh.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc.msg} (line {exc.lineno}, column {exc.colno})", exc.pos)
    violations, _ = find_violations(raw)
    result = {
        "valid": not violations,
        "violations": [
            {"kind": v.kind, "location": v.location, "message": v.message} for v in violations
        ],
    }
    lines = ["valid"] if not violations else ["invalid"] + [f"  {v}" for v in violations]
    return (0 if not violations else 1), result, lines


def _env(items) -> dict:
    env = {}
    for item in items:
        for part in item.split(","):
            var, sep, state = part.partition("=")
            if not sep:
                raise Usage(f"--env expects var=state, got {part!r}")
            env[var.strip()] = state.strip()
    return env


def cmd_eval(args):
    model = load_model(args.model)
    if args.concept is not None:
        c = parse_concept(args.concept)
        val = eval_concept(model, c)
        if args.state and not args.all_states:
            model.check_state(args.state)
            return 0, {"expression": to_text(c), "state": args.state, "value": fmt(val[args.state])}, [fmt(val[args.state])]
        payload = {"expression": to_text(c), "valuation": {s: fmt(val[s]) for s in model.states}}
        return 0, payload, [f"{s}\t{fmt(val[s])}" for s in model.states]
    phi = parse_formula(args.formula)
    env = _env(args.env)
    if args.state:
        fv = sorted(free_vars(phi) - set(env))
        if len(fv) != 1:
            raise Usage("--state needs exactly one free variable not bound by --env")
        env[fv[0]] = args.state
    if args.all_states:
        fv = sorted(free_vars(phi) - set(env))
        if len(fv) != 1:
            raise Usage("--all-states needs exactly one free variable not bound by --env")
        vals = {s: eval_formula(model, phi, {**env, fv[0]: s}) for s in model.states}
        payload = {"expression": to_text(phi), "variable": fv[0], "valuation": {s: fmt(v) for s, v in vals.items()}}
        return 0, payload, [f"{s}\t{fmt(v)}" for s, v in vals.items()]
    v = eval_formula(model, phi, env)
    return 0, {"expression": to_text(phi), "env": env, "value": fmt(v)}, [fmt(v)]


def _chain_for(model, method, depth, role, budget, synth):
    if method == WASSERSTEIN:
        return wasserstein_chain(model, depth, role)
    if method == KANTOROVICH:
        return kantorovich_chain(model, depth, role)
    if method == GAME:
        return game_chain(model, depth, role)
    if method == LOGICAL_WITNESS:
        return [synth.table(n) for n in range(depth + 1)]
    return [logical_lb_table(model, depth, budget=budget, role=role)]


def cmd_dist(args):
    model = load_model(args.model)
    method = LOGICAL_WITNESS if args.method == "logical" else args.method
    methods = list(EXACT_METHODS) if method == "all" else [method]
    if args.pair:
        for s in args.pair:
            model.check_state(s)
        pairs = [args.pair]
    else:
        pairs = [(a, b) for i, a in enumerate(model.states) for b in model.states[i + 1:]]
    synth = Synthesizer(model, args.role)
    tables = {}
    chains = {}
    for m in methods:
        chain = _chain_for(model, m, args.depth, args.role, args.budget, synth)
        chains[m] = chain
        tables[m] = chain[-1]
    entries = []
    lines = []
    for a, b in pairs:
        for m in methods:
            t = tables[m]
            entries.append(
                {
                    "pair": [a, b],
                    "depth": args.depth,
                    "method": m,
                    "value": fmt(t[a, b]),
                    "witness": describe_witness(t.witnesses.get((a, b))),
                }
            )
        if len(methods) == 1:
            lines.append(f"d_{args.depth}({a},{b}) = {fmt(tables[methods[0]][a, b])}")
        else:
            vals = [tables[m][a, b] for m in methods]
            verdict = "EQUAL" if len(set(vals)) == 1 else "DIFFER"
            lines.append(
                f"d_{args.depth}({a},{b}): "
                + ", ".join(f"{m}={fmt(v)}" for m, v in zip(methods, vals))
                + f"  {verdict}"
            )
    payload = {"entries": entries}
    if method == "all":
        payload["coincidence"] = [
            {
                "pair": [a, b],
                "verdict": "EQUAL" if len({tables[m][a, b] for m in methods}) == 1 else "DIFFER",
            }
            for a, b in pairs
        ]
    if method != LOGICAL_LB:
        ref = chains[methods[0]]
        payload["chain"] = [
            {"depth": t.depth, "values": {f"{a},{b}": fmt(t[a, b]) for a, b in pairs}} for t in ref
        ]
        payload["stabilized"] = stabilized(ref)
        if payload["stabilized"]:
            lines.append(f"chain stabilized at depth {args.depth} (d_{args.depth - 1} = d_{args.depth}; heuristic)")
    code = 0
    if method == "all" and any(c["verdict"] != "EQUAL" for c in payload["coincidence"]):
        code = 1
    return code, payload, lines


def cmd_synth(args):
    model = load_model(args.model)
    a, b = args.pair
    cert = Synthesizer(model, args.role).certificate(args.depth, a, b)
    payload = cert.to_json()
    text = payload["concept"] if payload["concept"] is not None else f"<shared concept, {payload['tree_size']} tree nodes; see --json>"
    lines = [
        f"concept: {text}",
        f"achieved: {payload['achieved']}",
        f"target: {payload['target']}",
        "VALID" if cert.valid else "INVALID",
    ]
    return (0 if cert.valid else 1), payload, lines


def cmd_check(args):
    names = [s.strip() for s in args.suite.split(",") if s.strip()]
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise Usage(f"unknown suite(s): {', '.join(unknown)}")
    if args.random:
        count, size, denom = args.random
        models = random_models(count, size, denom, args.seed)
    elif args.model:
        models = [load_model(args.model)]
    else:
        raise Usage("check needs a model file or --random COUNT SIZE DENOM")
    results = run_suites(models, names, args.depth, args.seed)
    lines = []
    for r in results:
        status = "pass" if r.ok else "FAIL"
        line = f"{r.name}: {r.passed}/{r.total} {status}"
        if r.first_failure:
            line += f"  first counterexample: {r.first_failure}"
        lines.append(line)
    payload = {
        "models": len(models),
        "model_hashes": [m.digest() for m in models],
        "suites": [r.to_json() for r in results],
    }
    return (0 if all(r.ok for r in results) else 1), payload, lines


def cmd_transform(args):
    model = load_model(args.model)
    if args.restrict:
        state, k = args.restrict
        out = restrict(model, state, k)
        info = {"op": "restrict", "state": state, "radius": k}
    elif args.unravel:
        state, k = args.unravel
        out, root = unravel(model, state, k)
        info = {"op": "unravel", "state": state, "depth": k, "root": root}
    else:
        other = load_model(args.union)
        out, inj = disjoint_union([model, other])
        info = {"op": "union", "injections": inj}
    if args.output:
        save_model(out, args.output)
        info["output"] = args.output
        lines = [f"wrote {args.output} ({len(out.states)} states)"]
    else:
        lines = [out.to_json()]
    info["model"] = out.to_raw()
    info["states"] = len(out.states)
    return 0, info, lines


COMMANDS = {
    "validate": cmd_validate,
    "eval": cmd_eval,
    "dist": cmd_dist,
    "synth": cmd_synth,
    "check": cmd_check,
    "transform": cmd_transform,
}


def _echo(args) -> dict:
    return {k: (list(v) if isinstance(v, tuple) else v) for k, v in sorted(vars(args).items()) if k not in ("json", "timing")}


def _model_hash(args) -> str | None:
    path = getattr(args, "model", None)
    if not path:
        return None
    try:
        return load_model(path).digest()
    except (PfmlError, OSError):
        return None


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    start = time.perf_counter()
    report = {"schema": SCHEMA, "command": args.command, "args": _echo(args)}
    try:
        code, payload, lines = COMMANDS[args.command](args)
    except (ParseError, Usage, OSError) as exc:
        code, payload, lines = 2, {"error": type(exc).__name__, "message": str(exc)}, [f"error: {exc}"]
    except ModelError as exc:
        payload = {
            "error": type(exc).__name__,
            "message": str(exc),
            "violations": [str(v) for v in exc.violations],
        }
        code, lines = 1, [f"error: {exc}"]
    except PfmlError as exc:
        code, payload, lines = 1, {"error": type(exc).__name__, "message": str(exc)}, [f"error: {exc}"]
    report["model_hash"] = _model_hash(args)
    report["results"] = payload
    report["exit_code"] = code
    if args.timing:
        report["seconds"] = round(time.perf_counter() - start, 3)
    if args.json:
        print(json.dumps(report, indent=2))
    else:
        stream = sys.stdout if code == 0 else sys.stderr
        for line in lines:
            print(line, file=stream if "error" in payload else sys.stdout)
    return code


if __name__ == "__main__":
    sys.exit(main())
