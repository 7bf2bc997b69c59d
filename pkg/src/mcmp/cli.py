"""Command-line front end.

Exit codes: 0 when the command succeeds / the property holds, 1 when a
checked property fails (a witness is reported), 2 on usage or parse errors,
3 when a resource bound truncated the analysis.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import encode as enc_mod
from . import lcmv, ltypes, patterns, semantics, syntax, typecheck

OK, FAIL, USAGE, TRUNCATED = 0, 1, 2, 3


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if not hasattr(args, "run"):
        parser.print_help()
        return USAGE
    try:
        return args.run(args)
    except (syntax.ParseError, FileNotFoundError) as e:
        _emit(args, {"error": str(e)}, str(e))
        return USAGE
    except semantics.TruncatedError as e:
        _emit(args, {"error": str(e), "truncated": True}, f"truncated: {e}")
        return TRUNCATED
    except (syntax.McmpError, ValueError) as e:
        _emit(args, {"error": str(e)}, f"error: {e}")
        return USAGE


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # the copy attached to subparsers must not re-apply defaults, or it would
    # clobber flags given before the subcommand
    default = argparse.SUPPRESS if suppress else None
    shared = argparse.ArgumentParser(add_help=False, argument_default=default)
    shared.add_argument("--json", action="store_true", help="machine-readable output")
    shared.add_argument("--max-states", type=int, **({} if suppress else {"default": semantics.DEFAULT_MAX_STATES}))
    shared.add_argument("--max-depth", type=int, **({} if suppress else {"default": semantics.DEFAULT_MAX_DEPTH}))
    shared.add_argument("--dot", metavar="PATH", help="write the explored state graph as DOT")
    return shared


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcmp", description=__doc__, parents=[_global_flags(False)])
    shared = _global_flags(True)
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("check", parents=[shared], help="type-check a session against its declared context")
    p.add_argument("file")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("safety", parents=[shared], help="check the declared context is safe")
    p.add_argument("file")
    p.set_defaults(run=cmd_safety)

    p = sub.add_parser("df", parents=[shared], help="check the declared context is deadlock-free")
    p.add_argument("file")
    p.set_defaults(run=cmd_df)

    p = sub.add_parser("simulate", parents=[shared], help="run reductions, first enabled step each time")
    p.add_argument("file")
    p.add_argument("--max-steps", type=int, default=64)
    p.add_argument("--trace", action="store_true")
    p.set_defaults(run=cmd_simulate)

    p = sub.add_parser("encode", parents=[shared], help="translate a session by one of the encodings")
    p.add_argument("file")
    p.add_argument("--via", required=True, choices=sorted(enc_mod.ENCODINGS))
    p.set_defaults(run=cmd_encode)

    p = sub.add_parser("verify-encoding", parents=[shared], help="run the good-encoding harness")
    p.add_argument("file")
    p.add_argument("--via", required=True, choices=sorted(enc_mod.ENCODINGS))
    p.set_defaults(run=cmd_verify)

    p = sub.add_parser("detect", parents=[shared], help="search for a synchronisation pattern")
    p.add_argument("file")
    p.add_argument("--pattern", required=True, choices=["m", "star"])
    p.set_defaults(run=cmd_detect)

    p = sub.add_parser("classify", parents=[shared], help="list the subcalculi a session belongs to")
    p.add_argument("file")
    p.set_defaults(run=cmd_classify)

    p = sub.add_parser("electoral", parents=[shared], help="check every maximal execution elects one leader")
    p.add_argument("file")
    p.add_argument("--station", required=True)
    p.add_argument("--label", required=True)
    p.set_defaults(run=cmd_electoral)

    p = sub.add_parser("cmv", help="linear mixed-sessions front end")
    cmv_sub = p.add_subparsers(dest="cmv_command")
    q = cmv_sub.add_parser("check", parents=[shared], help="classify choices as internal/external")
    q.add_argument("file")
    q.set_defaults(run=cmd_cmv_check)
    q = cmv_sub.add_parser("encode", parents=[shared], help="translate into mixed-choice binary sessions")
    q.add_argument("file")
    q.set_defaults(run=cmd_cmv_encode)

    return parser


def _read(path: str) -> str:
    with open(path, "r", encoding="utf-8") as handle:
        return handle.read()


def _emit(args, payload: dict, human: str) -> None:
    if getattr(args, "json", False):
        print(json.dumps(payload, sort_keys=True, indent=2))
    else:
        print(human)


def _load_session(args, need_types: bool = False):
    session, context = syntax.parse_source(_read(args.file))
    if need_types and context is None:
        raise syntax.McmpError("this command needs a types { ... } block in the input")
    return session, context


def _write_dot(args, graph) -> None:
    if args.dot:
        with open(args.dot, "w", encoding="utf-8") as handle:
            handle.write(graph.to_dot())


def cmd_check(args) -> int:
    session, context = _load_session(args, need_types=True)
    errors = typecheck.check_session(session, context)
    payload = {"ok": not errors, "errors": [e.to_json() for e in errors]}
    if errors:
        lines = "\n".join(f"  {e.kind} at {e.location}: {e.message}" for e in errors)
        _emit(args, payload, f"ill-typed:\n{lines}")
        return FAIL
    _emit(args, payload, "well-typed")
    return OK


def cmd_safety(args) -> int:
    _, context = _load_session(args, need_types=True)
    ok, witness = ltypes.is_safe(context)
    _emit(args, {"safe": ok, "witness": witness}, "safe" if ok else f"not safe: {witness}")
    return OK if ok else FAIL


def cmd_df(args) -> int:
    _, context = _load_session(args, need_types=True)
    ok, witness = ltypes.is_deadlock_free(context)
    _emit(args, {"deadlock_free": ok, "witness": witness}, "deadlock-free" if ok else f"not deadlock-free: {witness}")
    return OK if ok else FAIL


def cmd_simulate(args) -> int:
    session, _ = _load_session(args)
    trace = []
    current = session
    for _ in range(args.max_steps):
        steps = semantics.enabled_steps(current)
        if not steps:
            break
        step = steps[0]
        trace.append(step.describe())
        if args.trace:
            print(f"-> {step.describe()}")
            print(syntax.render_session(semantics.resolve(current)), end="")
        current = semantics.apply_step(current, step)
    stuck = not semantics.enabled_steps(current)
    if args.dot:
        graph = semantics.explore(session, max_states=args.max_states, max_depth=args.max_depth)
        _write_dot(args, graph)
    payload = {
        "trace": trace,
        "stuck": stuck,
        "final": {n: syntax.render_process(p) for n, p in current.parts},
        "success": semantics.has_success(current),
    }
    _emit(args, payload, f"{len(trace)} step(s); final:\n{syntax.render_session(current)}")
    return OK


def cmd_encode(args) -> int:
    session, context = _load_session(args)
    order = enc_mod.build_order(session)
    target = enc_mod.encode(session, args.via, order=order)
    target_context = None
    if context is not None:
        try:
            target_context = enc_mod.encode_types(context, args.via, order=order)
        except syntax.McmpError:
            target_context = None
    text = syntax.render_session(target, target_context)
    payload = {
        "target": text,
        "via": args.via,
        "order": {p: sorted(f"{a}<{b}" for a, b in pairs) for p, pairs in order.items()},
        "reserved_labels": list(syntax.RESERVED_LABELS),
    }
    _emit(args, payload, text + "# order: " + json.dumps(payload["order"], sort_keys=True))
    return OK


def cmd_verify(args) -> int:
    if args.via == "lcmv-mcbs":
        program = lcmv.parse_cmv(_read(args.file))
        report = lcmv_correspondence(program, max_states=args.max_states, max_depth=args.max_depth)
    else:
        session, _ = _load_session(args)
        report = enc_mod.verify_correspondence(
            session, args.via, max_states=args.max_states, max_depth=args.max_depth
        )
    _emit(args, json.loads(report.to_json()), report.to_json())
    return OK if report.passed() else FAIL


def cmd_detect(args) -> int:
    session, _ = _load_session(args)
    witness = patterns.detect_m(session) if args.pattern == "m" else patterns.detect_star(session)
    graph = semantics.explore(session, max_states=args.max_states, max_depth=args.max_depth)
    _write_dot(args, graph)
    if witness is None:
        _emit(args, {"found": False}, f"no {args.pattern} pattern")
        return FAIL
    _emit(args, {"found": True, "witness": json.loads(witness.to_json())}, witness.to_json())
    return OK


def cmd_classify(args) -> int:
    session, _ = _load_session(args)
    members = sorted(syntax.classify(session))
    _emit(args, {"subcalculi": members}, " ".join(members))
    return OK


def cmd_electoral(args) -> int:
    session, _ = _load_session(args)
    ok, witness = patterns.is_electoral(
        session, args.station, args.label, max_states=args.max_states, max_depth=args.max_depth
    )
    graph = semantics.explore(session, max_states=args.max_states, max_depth=args.max_depth)
    _write_dot(args, graph)
    _emit(args, {"electoral": ok, "witness": witness}, "electoral" if ok else f"not electoral: {witness}")
    return OK if ok else FAIL


def cmd_cmv_check(args) -> int:
    program = lcmv.parse_cmv(_read(args.file))
    try:
        classes = lcmv.check_cmv(program)
    except lcmv.CmvTypeError as e:
        _emit(args, {"ok": False, "error": str(e)}, f"untypable: {e}")
        return FAIL
    payload = {"ok": True, "choices": {str(c): v for c, v in sorted(classes.items())}}
    _emit(args, payload, "linear and classifiable: " + json.dumps(payload["choices"], sort_keys=True))
    return OK


def cmd_cmv_encode(args) -> int:
    program = lcmv.parse_cmv(_read(args.file))
    classes = lcmv.check_cmv(program)
    target = lcmv.encode_lcmv_to_mcbs(program, classes)
    text = syntax.render_session(target)
    _emit(args, {"target": text, "via": "lcmv-mcbs"}, text)
    return OK


def lcmv_correspondence(program, max_states: int, max_depth: int) -> enc_mod.CorrespondenceReport:
    """Good-encoding harness for the lcmv translation: the source graph is
    the CMV reduction graph, targets are encoded per state."""
    source = lcmv.explore_cmv(program, max_states=max_states)
    if source.truncated:
        raise semantics.TruncatedError("source exploration truncated")
    encoded = [lcmv.encode_lcmv_to_mcbs(s, lcmv.check_cmv(s)) for s in source.states]
    joint = semantics.explore_many(encoded, max_states=max_states, max_depth=max_depth)
    if joint.truncated:
        raise semantics.TruncatedError("target exploration truncated")
    bisim = semantics.weak_bisim_classes(joint, frozenset({"success"}))
    canon = [syntax.canon_session(s) for s in joint.states]

    failures: list[dict] = []
    completeness, max_factor = True, 0
    for i in range(len(source.states)):
        for step, j in source.successors(i):
            dist = enc_mod._bfs_distance(joint, joint.roots[i], lambda n: canon[n] == canon[joint.roots[j]])
            if dist is None:
                want = bisim[joint.roots[j]]
                dist = enc_mod._bfs_distance(joint, joint.roots[i], lambda n: bisim[n] == want)
            if dist is None:
                completeness = False
                failures.append({"criterion": "completeness", "source_step": step.describe()})
            else:
                max_factor = max(max_factor, dist)
    done = {bisim[joint.roots[i]] for i in range(len(encoded))}
    soundness = True
    for n in joint.reachable_from(joint.roots[source.root]):
        if not any(bisim[k] in done for k in joint.reachable_from(n)):
            soundness = False
            failures.append({"criterion": "soundness", "stranded_target_state": n})
            break
    src_succ = any(lcmv.cmv_has_success(source.states[i]) for i in _cmv_reachable(source, source.root))
    tgt_succ = semantics.may_succeed(joint, joint.roots[source.root])
    success_ok = src_succ == tgt_succ
    if not success_ok:
        failures.append({"criterion": "success", "source": src_succ, "target": tgt_succ})
    src_cycle = _cmv_has_cycle(source)
    tgt_cycle = enc_mod._has_cycle_from(joint, joint.roots[source.root])
    divergence_ok = (not tgt_cycle) or src_cycle
    if not divergence_ok:
        failures.append({"criterion": "divergence"})
    # per-component compositionality: translating each parallel component on
    # its own (same classification) reproduces its slice of the target
    distributability = True
    root_classes = lcmv.check_cmv(program)
    by_name = dict(encoded[source.root].parts)
    for comp in lcmv._components(program.body):
        if isinstance(comp, lcmv.CSuccess):
            continue  # success components get a generated participant name
        for name, proc in lcmv._encode_component(comp, program.x, program.y, root_classes):
            if name not in by_name or not syntax.alpha_equal(proc, by_name[name]):
                distributability = False
                failures.append({"criterion": "distributability", "participant": name})
    return enc_mod.CorrespondenceReport(
        encoding="lcmv-mcbs",
        completeness=completeness,
        soundness=soundness,
        success_sensitive=success_ok,
        divergence_reflected_to_bound=divergence_ok,
        distributability_preserved=distributability,
        max_emulation_factor=max_factor,
        step_bound=enc_mod.ENCODINGS["lcmv-mcbs"].step_bound,
        failures=failures,
    )


def _cmv_has_cycle(graph) -> bool:
    color: dict[int, int] = {}
    stack = [(graph.root, 0)]
    color[graph.root] = 1
    while stack:
        node, idx = stack.pop()
        succs = [j for _, j in graph.successors(node)]
        if idx < len(succs):
            stack.append((node, idx + 1))
            d = succs[idx]
            if color.get(d) == 1:
                return True
            if color.get(d, 0) == 0:
                color[d] = 1
                stack.append((d, 0))
        else:
            color[node] = 2
    return False


def _cmv_reachable(graph, root: int) -> set[int]:
    seen = {root}
    todo = [root]
    while todo:
        i = todo.pop()
        for _, j in graph.successors(i):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    return seen


if __name__ == "__main__":
    sys.exit(main())
