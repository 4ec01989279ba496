"""Bundled example theories.

Each entry is a ``.hx`` file shipped inside the package; ``load_example``
parses one by name.  The CLI accepts the same names with a ``corpus:``
prefix in place of a file path.
"""

from __future__ import annotations

from importlib import resources

from ..theory import ParseResult, parse_theory

_PACKAGE = "hornxor.corpus"

CORPUS_PREFIX = "corpus:"


def list_examples() -> list[str]:
    """Names of all bundled theories, sorted."""
    names = []
    for entry in resources.files(_PACKAGE).iterdir():
        if entry.name.endswith(".hx"):
            names.append(entry.name[: -len(".hx")])
    return sorted(names)


def example_source(name: str) -> str:
    """Raw text of a bundled theory."""
    path = resources.files(_PACKAGE).joinpath(name + ".hx")
    if not path.is_file():
        known = ", ".join(list_examples())
        raise KeyError(f"no bundled theory {name!r} (have: {known})")
    return path.read_text(encoding="utf-8")


def load_example(name: str) -> ParseResult:
    """Parse a bundled theory by name."""
    return parse_theory(example_source(name))
