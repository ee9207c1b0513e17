"""Shipped map-definition fixtures in the DSL."""

from __future__ import annotations

from importlib import resources

from .. import dsl


def names():
    """Available fixture names, without the .germ suffix."""
    out = []
    for entry in resources.files(__package__).iterdir():
        if entry.name.endswith(".germ"):
            out.append(entry.name[:-5])
    return sorted(out)


def source(name):
    """Raw DSL text of a shipped fixture."""
    return resources.files(__package__).joinpath(f"{name}.germ").read_text("utf-8")


def load(name, degree=None):
    """Parse a shipped fixture into (ast, germ)."""
    ast = dsl.parse(source(name))
    return ast, dsl.to_germ(ast, degree)


def path(name):
    """Filesystem path of a shipped fixture (for CLI invocations)."""
    return str(resources.files(__package__).joinpath(f"{name}.germ"))
