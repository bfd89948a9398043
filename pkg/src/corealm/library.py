"""The shipped coreALM module subset: loading, lookup and assembly.

A library directory holds ``manifest.json``, ``modules/*.alm`` and
``lookup.jsonl``.  The bundled copy lives in ``corealm/data/corealm`` and is
regenerated from its ``km/`` sources by :func:`build`.
"""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .alm.model import (AlmError, DependencyCycle, ModuleDecl, SystemDescription, UnknownModule,
                        module_closure)
from .alm.parser import parse_module, print_alm, print_theory

LIBRARY_NAME = "coreALMlib"


class LibraryError(AlmError):
    pass


@dataclass(frozen=True)
class LookupEntry:
    word: str
    pos: str  # 'v' or 'a'
    sense: int
    gloss: str
    target_kind: str  # 'action-class' or 'fluent'
    target: str
    module: str


@dataclass(frozen=True)
class ModuleInfo:
    name: str
    file: str
    depends_on: tuple = ()
    optional: bool = False


def default_path() -> Path:
    env = os.environ.get("COREALM_LIB_DIR")
    if env:
        return Path(env)
    return Path(__file__).parent / "data" / "corealm"


class Library:
    def __init__(self, root: Path, info: dict[str, ModuleInfo], lookup: list[LookupEntry]):
        self.root = root
        self.info = info
        self.lookup = lookup
        self._parsed: dict[str, ModuleDecl] = {}

    @property
    def dag(self) -> dict[str, tuple]:
        return {n: i.depends_on for n, i in self.info.items()}

    def names(self) -> list[str]:
        return list(self.info)

    def module(self, name: str) -> ModuleDecl:
        if name not in self.info:
            raise UnknownModule(name)
        if name not in self._parsed:
            path = self.root / self.info[name].file
            m = parse_module(path.read_text(), str(path))
            if m.name != name or m.depends_on != self.info[name].depends_on:
                raise LibraryError(f"{path}: module header disagrees with the manifest")
            self._parsed[name] = m
        return self._parsed[name]

    def modules(self) -> dict[str, ModuleDecl]:
        return {n: self.module(n) for n in self.info}

    def optional_leaves(self, names) -> list[str]:
        names = set(names)
        return [n for n, i in self.info.items()
                if i.optional and n not in names and set(i.depends_on) <= names]


def load(path=None) -> Library:
    root = Path(path) if path is not None else default_path()
    manifest = root / "manifest.json"
    if not manifest.is_file():
        raise LibraryError(f"{root}: no manifest.json")
    try:
        data = json.loads(manifest.read_text())
        info = {}
        for m in data["modules"]:
            mi = ModuleInfo(m["name"], m["file"], tuple(m.get("depends_on", ())),
                            bool(m.get("optional", False)))
            if mi.name in info:
                raise LibraryError(f"duplicate module {mi.name} in manifest")
            info[mi.name] = mi
    except (ValueError, KeyError, TypeError) as e:
        raise LibraryError(f"{manifest}: corrupt manifest ({e})") from None
    for mi in info.values():
        if not (root / mi.file).is_file():
            raise LibraryError(f"{mi.name}: missing file {mi.file}")
        for d in mi.depends_on:
            if d not in info:
                raise LibraryError(f"{mi.name}: dangling dependency {d}")
        if mi.optional and (len(mi.depends_on) != 1 or info[mi.depends_on[0]].optional):
            raise LibraryError(f"{mi.name}: optional modules depend on exactly one regular module")
    try:
        for n in info:
            module_closure({k: _Stub(v.depends_on) for k, v in info.items()}, n)
    except DependencyCycle as e:
        raise LibraryError(str(e)) from None
    lookup = []
    lookup_file = root / "lookup.jsonl"
    if lookup_file.is_file():
        for k, line in enumerate(lookup_file.read_text().splitlines(), 1):
            if line.strip():
                try:
                    lookup.append(LookupEntry(**json.loads(line)))
                except (ValueError, TypeError) as e:
                    raise LibraryError(f"lookup.jsonl:{k}: {e}") from None
    lib = Library(root, info, lookup)
    seen = set()
    for e in lookup:
        key = (e.word, e.pos, e.sense)
        if key in seen:
            raise LibraryError(f"duplicate lookup entry {key}")
        seen.add(key)
        if e.module not in info:
            raise LibraryError(f"lookup entry {e.word}: unknown module {e.module}")
        if e.target not in _symbols(lib.module(e.module)):
            raise LibraryError(f"lookup entry {e.word}: {e.target} is not declared in {e.module}")
    return lib


@dataclass
class _Stub:
    depends_on: tuple


def _symbols(m: ModuleDecl) -> set:
    out = {f.name for f in m.functions}
    for s in m.sorts:
        out.update(s.names)
    return out


def search(lib: Library, query: str, pos: str | None = None) -> list[LookupEntry]:
    """Entries whose word or gloss contains ``query``; exact word matches first."""
    q = query.lower()
    hits = []
    for e in lib.lookup:
        if pos and e.pos != pos:
            continue
        word = e.word.lower()
        if word == q:
            rank = 0
        elif word.startswith(q):
            rank = 1
        elif q in word:
            rank = 2
        elif q in e.gloss.lower():
            rank = 3
        else:
            continue
        hits.append((rank, e.word, e.pos, e.sense, e))
    return [h[-1] for h in sorted(hits, key=lambda h: h[:4])]


def deps(lib: Library, module: str) -> list[str]:
    """Ancestors of ``module`` in dependency order, root first, ending with it."""
    if module not in lib.info:
        raise UnknownModule(module)
    return module_closure({k: _Stub(v.depends_on) for k, v in lib.info.items()}, module)


def closure(lib: Library, modules, include_optional: bool = False) -> list[ModuleDecl]:
    names: list[str] = []
    for m in modules:
        names += [n for n in deps(lib, m) if n not in names]
    if include_optional:
        names += lib.optional_leaves(names)
    return [lib.module(n) for n in names]


def assemble(lib: Library, modules, include_optional: bool = False,
             name: str = "assembled") -> str:
    return print_theory(name, closure(lib, modules, include_optional))


def resolve_imports(sd: SystemDescription, lib: Library | None = None,
                    include_optional: bool = False) -> SystemDescription:
    """Copy imported modules and their ancestors into the theory of ``sd``."""
    if not sd.imports:
        return sd
    lib = lib or load()
    for i in sd.imports:
        if i.library != LIBRARY_NAME:
            raise LibraryError(f"unknown library {i.library}")
    imported = closure(lib, [i.module for i in sd.imports], include_optional)
    own = {m.name for m in sd.modules}
    modules = tuple(m for m in imported if m.name not in own) + sd.modules
    return replace(sd, modules=modules)


# -- regeneration ------------------------------------------------------------


def build(root=None) -> None:
    """Regenerate modules, manifest and lookup table from ``root/km``."""
    from .km.kb import lift_km
    from .km.sexpr import parse_sexprs
    from .km_to_alm import (PrepositionMap, alm_name, apply_patch, load_patch, state_base,
                            to_modules, translate_kb)

    root = Path(root) if root is not None else default_path()
    grouping = json.loads((root / "grouping.json").read_text())
    glosses = json.loads((root / "glosses.json").read_text())
    preps = PrepositionMap.load(root / "preps.json")
    patch = load_patch(root / "patch.json")
    kb = None
    for f in grouping["km_files"]:
        part = lift_km(parse_sexprs((root / "km" / f).read_text()))
        kb = part if kb is None else kb.merge(part)
    outputs = apply_patch(translate_kb(kb, preps), patch)
    by_source = {o.source: o for o in outputs}
    rename = patch.get("rename", {})

    (root / "modules").mkdir(exist_ok=True)
    manifest = []
    home: dict[str, str] = {}
    for g in grouping["modules"]:
        missing = [s for s in g["sources"] if s not in by_source]
        if missing:
            raise LibraryError(f"{g['name']}: no translation for {', '.join(missing)}")
        main, opt = to_modules([by_source[s] for s in g["sources"]], g["name"],
                               tuple(g["depends_on"]))
        for m in (main, opt):
            if m is None:
                continue
            file = f"modules/{m.name}.alm"
            (root / file).write_text(print_alm(m))
            manifest.append({"name": m.name, "file": file, "depends_on": list(m.depends_on),
                             "optional": m.optional})
        for s in g["sources"]:
            home[s] = g["name"]
    (root / "manifest.json").write_text(json.dumps({"library": LIBRARY_NAME,
                                                    "modules": manifest}, indent=2) + "\n")

    entries = []
    for c in kb.classes.values():
        if c.name not in home or c.kind == "entity":
            continue
        if c.kind == "state":
            target = "is_" + state_base(preps.negations.get(c.name, c.name))
            kind = "fluent"
        else:
            target = alm_name(c.name)
            kind = "action-class"
        target = rename.get(target, target)
        for word, sense, pos in c.wn20_synset:
            gloss = glosses.get(f"{word}/{pos}/{sense}", "")
            entries.append(LookupEntry(word, pos, sense, gloss, kind, target, home[c.name]))
    entries.sort(key=lambda e: (e.word, e.pos, e.sense))
    (root / "lookup.jsonl").write_text(
        "".join(json.dumps(asdict(e), sort_keys=True) + "\n" for e in entries))


if __name__ == "__main__":
    build()
