"""The wrestler and the opponent, end to end through the Python API.

Run from anywhere:  python3 walkthroughs/wrestler.py
"""

from pathlib import Path

from corealm import library
from corealm.alm.parser import parse_system_description
from corealm.reasoning import History, plan, postdict, project

HERE = Path(__file__).parent
lib = library.load()


def load(name):
    sd = parse_system_description((HERE / name).read_text(), name)
    return library.resolve_imports(sd, lib)


# What does the library know about restraining?
for e in library.search(lib, "restrain"):
    print(f"{e.word}/{e.pos}: {e.target} in {e.module}")
print("imports:", ", ".join(library.deps(lib, "unrestraining_and_restraining")))

# The wrestler restrains the opponent at step 0.
sd = load("wrestler.alm")
history = History.parse((HERE / "wrestler.hist").read_text())
p = project(sd, history, horizon=1)
for who in ("opponent", "wrestler"):
    print(f"is_restrained({who}) at 1:", p.value(("is_restrained", who), 1))

# With motion and unrestrain available, how can the opponent get free?
ext = load("wrestler_ext.alm")
for k, pl in enumerate(plan(ext, history, [(("is_restrained", "opponent"), "false")], 2), 1):
    print(f"plan {k}:", pl)

# Seen restrained at step 1 -- what could step 0 have looked like?
late = History.parse((HERE / "wrestler_late.hist").read_text())
for c in postdict(sd, late, horizon=1):
    print("completion:", c)
