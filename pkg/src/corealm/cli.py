"""Command-line front end.

Exit codes: 0 success, 1 domain error (syntax, validation, inconsistency,
no plan), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

from .alm.model import AlmError, validate
from .alm.parser import (AlmSyntaxError, parse_module, parse_system_description, parse_theory,
                         print_alm)
from .asp.ground import GroundingError, format_atom, ground
from .asp.solve import ResourceLimit, solve
from .asp.syntax import AspSyntaxError, emit_text, format_value, parse_program
from .compile import compile_sd, output_name
from .km.kb import KmError, lift_km
from .km.sexpr import UnbalancedParen, parse_sexprs
from .km_to_alm import (PrepositionMap, TranslationError, TranslationErrors, apply_patch,
                        load_patch, opposites_report, to_modules, translate_kb)
from . import library as libmod
from .reasoning import History, ReasoningError, parse_goal, plan, postdict, project

DOMAIN_ERRORS = (AlmError, KmError, TranslationError, AspSyntaxError, GroundingError,
                 ResourceLimit, UnbalancedParen, OSError, ValueError)


class _Out:
    def __init__(self, fmt: str):
        self.json = fmt == "json"

    def emit(self, text: str, data) -> None:
        if self.json:
            print(json.dumps(data, indent=2, sort_keys=True))
        else:
            sys.stdout.write(text if text.endswith("\n") or not text else text + "\n")


def _error_data(e: BaseException) -> dict:
    d = {"type": type(e).__name__, "message": getattr(e, "message", None) or str(e)}
    span = getattr(e, "span", None)
    if span is not None:
        d.update(file=span.file, line=span.line, column=span.column)
    elif getattr(e, "line", 0):
        d.update(line=e.line, column=e.column)
    if isinstance(e, TranslationErrors):
        d["errors"] = [_error_data(x) for x in e.errors]
    report = getattr(e, "report", None)
    if report is not None:
        d["diagnostics"] = [_diag(x) for x in report]
    return d


def _diag(d) -> dict:
    out = {"code": d.code, "message": d.message}
    if d.span is not None:
        out.update(file=d.span.file, line=d.span.line, column=d.span.column)
    return out


def _library(args):
    return libmod.load(args.lib_dir) if args.lib_dir else libmod.load()


def _read_sd(args, path: str):
    text = Path(path).read_text()
    sd = parse_system_description(text, path)
    if sd.imports:
        sd = libmod.resolve_imports(sd, _library(args), getattr(args, "with_optional", False))
    return sd


def _history(path: str | None) -> History:
    return History.parse(Path(path).read_text()) if path else History()


# -- subcommands -------------------------------------------------------------


def cmd_check(args, out: _Out) -> int:
    text = Path(args.file).read_text()
    head = next((ln.split() for ln in text.splitlines()
                 if ln.split() and not ln.lstrip().startswith("%")), [""])
    if head[0] in ("module", "optional"):
        report = validate(parse_module(text, args.file))
    elif head[0] == "theory":
        from .alm.model import SystemDescription
        name, modules = parse_theory(text, args.file)
        report = validate(SystemDescription(name, name, modules=modules))
    else:
        report = validate(_read_sd(args, args.file))
    lines = [str(d) for d in report] or [f"{args.file}: ok"]
    out.emit("\n".join(lines), {"ok": not report, "diagnostics": [_diag(d) for d in report]})
    return 1 if report else 0


def cmd_km2alm(args, out: _Out) -> int:
    kb = None
    for f in args.files:
        part = lift_km(parse_sexprs(Path(f).read_text()), strict=args.strict)
        kb = part if kb is None else kb.merge(part)
    preps = PrepositionMap.load(args.preps) if args.preps else PrepositionMap()
    outputs = translate_kb(kb, preps)
    if args.patch:
        outputs = apply_patch(outputs, load_patch(args.patch))
    main, opt = to_modules(outputs, args.name, tuple(args.depends_on))
    text = print_alm(main) + ("\n" + print_alm(opt) if opt else "")
    notes = [n for o in outputs for n in o.notes]
    if args.opposites:
        notes += opposites_report(outputs, json.loads(Path(args.opposites).read_text()))
    notes += [f"unsupported: {u}" for u in kb.unsupported]
    if args.output:
        Path(args.output).write_text(text)
        text = ""
    for n in notes:
        print(f"note: {n}", file=sys.stderr)
    out.emit(text, {"alm": print_alm(main), "optional": print_alm(opt) if opt else None,
                    "notes": notes})
    return 0


def cmd_compile(args, out: _Out) -> int:
    sd = _read_sd(args, args.file)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        prog = compile_sd(sd, args.horizon)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    text = emit_text(prog)
    target = args.output
    if target and Path(target).is_dir():
        target = str(Path(target) / output_name(sd, args.horizon))
    if target:
        Path(target).write_text(text)
        out.emit(f"wrote {target}", {"output": target, "rules": len(prog.rules),
                                     "facts": len(prog.facts)})
    else:
        out.emit(text, {"program": text})
    return 0


def cmd_solve(args, out: _Out) -> int:
    prog = parse_program(Path(args.file).read_text())
    models = solve(ground(prog, args.atom_limit), args.max_models or None)
    rows = [[format_atom(a) for a in m.sorted()] for m in models]
    lines = []
    for k, atoms in enumerate(rows, 1):
        lines += [f"Answer: {k}", " ".join(atoms)]
    lines.append("SATISFIABLE" if rows else "UNSATISFIABLE")
    out.emit("\n".join(lines), {"satisfiable": bool(rows), "models": rows})
    return 0 if rows else 1


def cmd_project(args, out: _Out) -> int:
    sd = _read_sd(args, args.file)
    p = project(sd, _history(args.history), args.horizon)
    lines, data = [], []
    for (f, i), vs in p.possible.items():
        if args.step is not None and i != args.step:
            continue
        name = format_value(f)
        if args.fluent and args.fluent not in name:
            continue
        vals = [format_value(v) for v in vs]
        if len(vals) == 1:
            lines.append(f"{name} = {vals[0]} @ {i}")
        else:
            lines.append(f"{name} in {{{', '.join(vals)}}} @ {i}")
        data.append({"fluent": name, "step": i, "values": vals, "certain": len(vals) == 1})
    out.emit("\n".join(lines), {"horizon": args.horizon, "values": data})
    return 0


def cmd_plan(args, out: _Out) -> int:
    sd = _read_sd(args, args.file)
    plans = plan(sd, _history(args.history), parse_goal(args.goal), args.max_horizon)
    lines = [f"plan {k}: " + (", ".join(f"{format_value(a)}@{i}" for i, a in p.steps) or "(empty)")
             for k, p in enumerate(plans, 1)]
    out.emit("\n".join(lines), {"plans": [[{"step": i, "action": format_value(a)}
                                           for i, a in p.steps] for p in plans]})
    return 0


def cmd_postdict(args, out: _Out) -> int:
    sd = _read_sd(args, args.file)
    fluents = [parse_goal(f"{f}=x")[0][0] for f in args.fluent] if args.fluent else None
    comps = postdict(sd, _history(args.history), args.horizon, fluents)
    lines = []
    data = []
    for k, c in enumerate(comps, 1):
        items = [f"{format_value(f)} = {format_value(v)}" for f, v in c.items()]
        lines.append(f"completion {k}: " + (", ".join(items) or "(no open fluents)"))
        data.append({format_value(f): format_value(v) for f, v in c.items()})
    out.emit("\n".join(lines), {"completions": data})
    return 0


def cmd_search(args, out: _Out) -> int:
    hits = libmod.search(_library(args), args.word, args.pos)
    rows = [(e.word, e.pos, str(e.sense), e.target_kind, e.target, e.module, e.gloss)
            for e in hits]
    header = ("word", "pos", "sense", "kind", "target", "module", "gloss")
    widths = [max(len(r[k]) for r in rows + [header]) for k in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
             for r in [header] + rows] if rows else ["no matches"]
    out.emit("\n".join(lines), {"entries": [e.__dict__ for e in hits]})
    return 0


def cmd_deps(args, out: _Out) -> int:
    names = libmod.deps(_library(args), args.module)
    out.emit("\n".join(names), {"module": args.module, "closure": names})
    return 0


def cmd_assemble(args, out: _Out) -> int:
    text = libmod.assemble(_library(args), args.modules, args.with_optional, args.name)
    if args.output:
        Path(args.output).write_text(text)
        out.emit(f"wrote {args.output}", {"output": args.output})
    else:
        out.emit(text, {"theory": text})
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="corealm", description="coreALM library tools: ALM "
                                "checking, KM translation, ASP compilation and reasoning.")
    p.add_argument("--format", choices=("text", "json"), default="text",
                   help="output format (json gives machine-readable diagnostics)")
    p.add_argument("--lib-dir", help="library directory (default: $COREALM_LIB_DIR or bundled)")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    s = sub.add_parser("check", help="parse and validate an ALM file")
    s.add_argument("file")
    s.set_defaults(fn=cmd_check)

    s = sub.add_parser("km2alm", help="translate KM declarations into an ALM module")
    s.add_argument("files", nargs="+")
    s.add_argument("--preps", help="JSON preposition map")
    s.add_argument("--patch", help="JSON patch with curated axioms and renames")
    s.add_argument("--opposites", help="JSON list of opposite class pairs to report on")
    s.add_argument("--name", default="translated", help="module name")
    s.add_argument("--depends-on", action="append", default=[])
    s.add_argument("--strict", action="store_true", help="fail on unsupported KM constructs")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_km2alm)

    s = sub.add_parser("compile", help="compile a system description to ASP text")
    s.add_argument("file")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--with-optional", action="store_true", help="import optional leaf modules")
    s.add_argument("-o", "--output", help="file or directory (<sd>.h<N>.lp)")
    s.set_defaults(fn=cmd_compile)

    s = sub.add_parser("solve", help="compute answer sets of an ASP program")
    s.add_argument("file")
    s.add_argument("--max-models", type=int, default=0, help="0 means all")
    s.add_argument("--atom-limit", type=int, default=None)
    s.set_defaults(fn=cmd_solve)

    s = sub.add_parser("project", help="temporal projection from a history")
    s.add_argument("file")
    s.add_argument("--history")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--step", type=int, help="only report this step")
    s.add_argument("--fluent", help="only report fluents containing this text")
    s.add_argument("--with-optional", action="store_true")
    s.set_defaults(fn=cmd_project)

    s = sub.add_parser("plan", help="find shortest plans achieving a goal")
    s.add_argument("file")
    s.add_argument("--history")
    s.add_argument("--goal", required=True, help="comma-separated fluent(args)=value items")
    s.add_argument("--max-horizon", type=int, required=True)
    s.add_argument("--with-optional", action="store_true")
    s.set_defaults(fn=cmd_plan)

    s = sub.add_parser("postdict", help="initial states consistent with later observations")
    s.add_argument("file")
    s.add_argument("--history")
    s.add_argument("--horizon", type=int, required=True)
    s.add_argument("--fluent", action="append", help="step-0 fluent to report (repeatable)")
    s.add_argument("--with-optional", action="store_true")
    s.set_defaults(fn=cmd_postdict)

    s = sub.add_parser("search", help="look up library entries by verb or adjective")
    s.add_argument("word")
    s.add_argument("--pos", choices=("v", "a"))
    s.set_defaults(fn=cmd_search)

    s = sub.add_parser("deps", help="dependency closure of a library module")
    s.add_argument("module")
    s.set_defaults(fn=cmd_deps)

    s = sub.add_parser("assemble", help="print a theory made of library modules")
    s.add_argument("modules", nargs="*")
    s.add_argument("--with-optional", action="store_true")
    s.add_argument("--name", default="assembled")
    s.add_argument("-o", "--output")
    s.set_defaults(fn=cmd_assemble)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    out = _Out(args.format)
    try:
        return args.fn(args, out)
    except (ReasoningError, *DOMAIN_ERRORS) as e:
        if out.json:
            print(json.dumps({"ok": False, "error": _error_data(e)}, indent=2, sort_keys=True))
        else:
            print(f"error: {_error_data(e)['message']}", file=sys.stderr)
            for d in getattr(e, "report", None) or ():
                print(f"  {d}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
