"""Command line entry point.

Exit codes: 0 success or Yes, 1 property failure or No, 2 Unknown or
inconclusive, 3 usage or parse error.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from ..config import Bounds
from ..core import Sort, role_sets
from .lexer import ParseError
from .parser import parse_context, parse_global, parse_local, parse_process, parse_queue, parse_type
from .printer import print_context, print_process, print_queue, print_type

EXIT_OK, EXIT_NO, EXIT_UNKNOWN, EXIT_USAGE = 0, 1, 2, 3

_KINDS = {".gt": "global", ".lt": "local", ".ctx": "context", ".proc": "process", ".q": "queue",
          ".yaml": "manifest", ".yml": "manifest"}


class UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from e


def _kind_of(path: str, forced: str | None = None) -> str:
    if forced and forced != "auto":
        return forced
    kind = _KINDS.get(Path(path).suffix)
    if kind is None:
        raise UsageError(f"cannot tell what {path} contains; pass --kind")
    return kind


def load(path: str, kind: str):
    src = _read(path)
    fn = {"global": parse_global, "local": parse_local, "context": parse_context,
          "process": parse_process, "queue": parse_queue, "type": parse_type}[kind]
    return fn(src, path)


def load_manifest(path: str):
    """YAML manifest: ``global`` (file or inline text), ``processes`` and ``queues``."""
    import yaml

    from ..process import Session
    from ..process_syntax import UNIT, RMsg

    try:
        doc = yaml.safe_load(_read(path)) or {}
    except yaml.YAMLError as e:
        raise UsageError(f"{path}: invalid YAML: {e}") from e
    if not isinstance(doc, dict) or "global" not in doc or "processes" not in doc:
        raise UsageError(f"{path}: a manifest needs 'global' and 'processes'")
    base = Path(path).parent
    gsrc = str(doc["global"])
    gpath = base / gsrc
    if "\n" not in gsrc and gpath.suffix == ".gt" and gpath.exists():
        g = parse_global(gpath.read_text(), str(gpath))
    else:
        g = parse_global(gsrc, f"{path}#global")
    parts = {}
    queues = doc.get("queues") or {}
    for role, src in (doc["processes"] or {}).items():
        proc = parse_process(str(src), f"{path}#{role}")
        h = []
        for item in queues.get(role) or []:
            if not isinstance(item, (list, tuple)) or len(item) not in (2, 3):
                raise UsageError(f"{path}: queue entries are [dest, label, value]")
            value = item[2] if len(item) == 3 else UNIT
            h.append(RMsg(str(item[0]), str(item[1]), UNIT if value is None else value))
        parts[str(role)] = (proc, tuple(h))
    return g, Session.of(parts)


def _emit(args, obj: dict, text: str) -> None:
    if args.json:
        print(json.dumps(obj, sort_keys=True))
    else:
        print(text)


def _verdict_code(v) -> int:
    from ..subtyping import NO, YES

    return EXIT_OK if v == YES else EXIT_NO if v == NO else EXIT_UNKNOWN


# -- subcommands ----------------------------------------------------------------


def cmd_parse(args, bounds) -> int:
    kind = _kind_of(args.file, args.kind)
    if kind == "manifest":
        g, m = load_manifest(args.file)
        text = print_type(g) + "\n" + str(m)
        _emit(args, {"command": "parse", "kind": kind, "text": text}, text)
        return EXIT_OK
    ast = load(args.file, kind)
    if kind in ("global", "local", "type"):
        text = print_type(ast)
    elif kind == "context":
        text = print_context(ast)
    elif kind == "queue":
        text = print_queue(ast)
    else:
        text = print_process(ast)
    _emit(args, {"command": "parse", "kind": kind, "text": text}, text)
    return EXIT_OK


def cmd_check_wf(args, bounds) -> int:
    from ..wellformed import check_balanced_plus

    g = load(args.file, "global")
    rep = check_balanced_plus(g)
    lines = [f"balanced: {rep.balanced}", f"balanced+: {rep.balanced_plus}"]
    lines += [f"  {f.reason} at path {'.'.join(f.path) or '<root>'}" for f in rep.failures]
    _emit(args, {"command": "check-wf", **rep.to_json()}, "\n".join(lines))
    return EXIT_OK if rep.balanced_plus else EXIT_NO


def cmd_project(args, bounds) -> int:
    from ..projection import NotBalancedError, explain_projection

    g = load(args.file, "global")
    roles = [args.role] if args.role else sorted(role_sets(g).roles)
    out, lines, code = [], [], EXIT_OK
    for r in roles:
        try:
            pr, why = explain_projection(g, r)
        except NotBalancedError as e:
            _emit(args, {"command": "project", "error": str(e), "projections": []}, f"error: {e}")
            return EXIT_NO
        if pr is None:
            code = EXIT_NO
            out.append({"role": r, "projectable": False, "reason": why})
            lines.append(f"{r}: not projectable ({why})")
            continue
        out.append({"role": r, "projectable": True, "queue": print_queue(pr.queue),
                    "local": print_type(pr.local)})
        prefix = f"{r}: " if len(roles) > 1 else ""
        lines.append(prefix + print_type(pr.local))
        if pr.queue:
            lines.append(f"{prefix}queue {print_queue(pr.queue)}")
    _emit(args, {"command": "project", "projections": out}, "\n".join(lines))
    return code


def cmd_subtype(args, bounds) -> int:
    from ..subtyping import NO, YES, async_subtype_check, sync_subtype

    t1 = load(args.sub, "local")
    t2 = load(args.sup, "local")
    k = bounds.subtype_k if args.bound is None else args.bound
    if args.mode == "sync":
        v = YES if sync_subtype(t1, t2) else NO
        trace, reason = [], ""
    else:
        res = async_subtype_check(t1, t2, k)
        v, trace, reason = res.verdict, res.trace, res.reason
    text = str(v)
    if v == YES and trace:
        text += "\n" + "\n".join(f"  {s}" for s in trace)
    elif reason:
        text += f"\n  {reason}"
    _emit(args, {"command": "subtype", "mode": args.mode, "bound": k, "verdict": str(v),
                 "trace": trace, "reason": reason}, text)
    return _verdict_code(v)


def cmd_step(args, bounds) -> int:
    from ..semantics import context_transitions, global_transitions, local_transitions

    depth = bounds.depth if args.bound is None else args.bound
    kind = args.kind
    if kind == "global":
        succ = sorted(global_transitions(load(args.file, "global"), depth, args.all_subsets), key=str)
        rows = [{"label": l.to_json(), "text": str(l), "successor": print_type(s)} for l, s in succ]
    elif kind == "context":
        succ = context_transitions(load(args.file, "context"))
        rows = [{"label": l.to_json(), "text": str(l), "successor": print_context(c)} for l, c in succ]
    else:
        succ = local_transitions(load(args.file, "local"))
        rows = [{"label": {"peer": a.peer, "direction": a.direction, "label": a.label,
                           "sort": Sort(a.sort).value},
                 "text": f"{a.peer}{'!' if a.direction == 'send' else '?'}{a.label}",
                 "successor": print_type(t)} for a, t in succ]
    text = "\n".join(f"{r['text']} -> {r['successor']}" for r in rows) or "(no transitions)"
    print(json.dumps({"command": "step", "kind": kind, "transitions": rows}, sort_keys=True)
          if args.json else text)
    return EXIT_OK


def _ctx_and_global(args):
    return load(args.context, "context"), load(args.glob, "global")


def cmd_assoc(args, bounds) -> int:
    from ..association import explain_association
    from ..projection import NotBalancedError

    ctx, g = _ctx_and_global(args)
    k = bounds.subtype_k if args.bound is None else args.bound
    try:
        v, why = explain_association(ctx, g, k)
    except NotBalancedError as e:
        _emit(args, {"command": "assoc", "verdict": "no", "reason": str(e), "bound": k}, f"no\n  {e}")
        return EXIT_NO
    _emit(args, {"command": "assoc", "verdict": str(v), "reason": why, "bound": k},
          str(v) + (f"\n  {why}" if why else ""))
    return _verdict_code(v)


def cmd_probe(args, bounds) -> int:
    from ..association import completeness_probe, soundness_probe

    ctx, g = _ctx_and_global(args)
    k = bounds.subtype_k if args.bound is None else args.bound
    fn = completeness_probe if args.direction == "completeness" else soundness_probe
    rep = fn(ctx, g, args.steps, k, args.seed)
    text = (f"{rep.verdict}: {rep.steps_checked} steps, {rep.states_explored} states, "
            f"regime {rep.regime}")
    text += "".join(f"\n  {v.label}: {v.reason}" for v in rep.violations)
    _emit(args, {"command": "probe", "direction": args.direction, **rep.to_json()}, text)
    return {"pass": EXIT_OK, "fail": EXIT_NO}.get(rep.verdict, EXIT_UNKNOWN)


def cmd_properties(args, bounds) -> int:
    from ..properties import check_all

    ctx = load(args.file, "context")
    qb = bounds.queue_bound if args.queue_bound is None else args.queue_bound
    res = check_all(ctx, qb)
    lines = []
    for name, v in res.items():
        state = "unknown" if v.holds is None else ("holds" if v.holds else "fails")
        lines.append(f"{name}: {state}" + (f" ({v.reason})" if v.reason else ""))
        if v.counterexample is not None:
            if v.loop_start is not None:
                lines.append(f"    (after step {v.loop_start} the trace repeats forever)")
            for i, (lab, c) in enumerate(v.counterexample, 1):
                lines.append(f"    {i:>3}. {lab}  {print_context(c)}")
    _emit(args, {"command": "properties", "queue_bound": qb,
                 **{k: v.to_json() for k, v in res.items()}}, "\n".join(lines))
    vals = [v.holds for v in res.values()]
    if False in vals:
        return EXIT_NO
    return EXIT_UNKNOWN if None in vals else EXIT_OK


def cmd_typecheck(args, bounds) -> int:
    from ..process import explain_session
    from ..projection import NotBalancedError

    g, m = load_manifest(args.manifest)
    k = bounds.subtype_k if args.bound is None else args.bound
    try:
        res = explain_session(m, g, k)
    except NotBalancedError as e:
        _emit(args, {"command": "typecheck", "verdict": "no", "roles": {}, "context": None,
                     "reason": str(e)}, f"no\n  {e}")
        return EXIT_NO
    lines = [str(res.verdict)] + [f"  {r}: {v}" + (f" ({why})" if why else "")
                                  for r, (v, why) in sorted(res.per_role.items())]
    _emit(args, {"command": "typecheck", **res.to_json()}, "\n".join(lines))
    return _verdict_code(res.verdict)


def cmd_run(args, bounds) -> int:
    from ..process import run_fair

    _, m = load_manifest(args.manifest)
    res = run_fair(m, args.steps, args.seed)
    for row in res.trace:
        if args.json:
            print(json.dumps({"kind": "step", **row}, sort_keys=True))
        else:
            print(f"{row['step']:>4} {row['role']:<6} {row['rule']:<9} {row['label'] or ''}")
    summary = {"kind": "summary", **res.to_json()}
    print(json.dumps(summary, sort_keys=True) if args.json else f"verdict: {res.verdict}")
    return EXIT_OK if res.verdict in ("ok", "terminated") else EXIT_NO


# -- argument parsing --------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="sessionforge", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--json", action="store_true", help="machine-readable output")
        p.set_defaults(fn=fn)
        return p

    p = add("parse", cmd_parse, "parse a file and pretty-print it")
    p.add_argument("file")
    p.add_argument("--kind", choices=["auto", "global", "local", "type", "context", "process", "queue",
                                      "manifest"], default="auto")
    p = add("check-wf", cmd_check_wf, "balanced+ check of a global type")
    p.add_argument("file")
    p = add("project", cmd_project, "project a global type")
    p.add_argument("file")
    p.add_argument("--role")
    p = add("subtype", cmd_subtype, "decide subtyping between two local types")
    p.add_argument("sub")
    p.add_argument("sup")
    p.add_argument("--mode", choices=["sync", "async"], default="async")
    p.add_argument("--bound", type=int)
    p = add("step", cmd_step, "one-step transitions")
    p.add_argument("file")
    p.add_argument("--kind", choices=["global", "context", "local"], default="global")
    p.add_argument("--bound", type=int)
    p.add_argument("--all-subsets", action="store_true")
    p = add("assoc", cmd_assoc, "association of a context with a global type")
    p.add_argument("context")
    p.add_argument("glob", metavar="global")
    p.add_argument("--bound", type=int)
    p = add("probe", cmd_probe, "bounded operational-correspondence probe")
    p.add_argument("context")
    p.add_argument("glob", metavar="global")
    p.add_argument("--direction", choices=["completeness", "soundness"], default="completeness")
    p.add_argument("--steps", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--bound", type=int)
    p = add("properties", cmd_properties, "safety, deadlock-freedom and liveness of a context")
    p.add_argument("file")
    p.add_argument("--queue-bound", type=int)
    p = add("typecheck", cmd_typecheck, "type a session manifest against its global type")
    p.add_argument("manifest")
    p.add_argument("--bound", type=int)
    p = add("run", cmd_run, "simulate a session manifest under a fair scheduler")
    p.add_argument("manifest")
    p.add_argument("--steps", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_USAGE
    try:
        bounds = Bounds.from_env()
        return args.fn(args, bounds)
    except ParseError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (UsageError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
