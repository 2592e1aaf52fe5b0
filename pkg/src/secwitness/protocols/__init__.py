"""Bundled protocol descriptions."""

from importlib import resources

from ..roles import Protocol, parse_protocol


def bundled(name: str) -> str:
    """Text of a bundled description, e.g. bundled('ns')."""
    return (resources.files(__package__) / f"{name}.proto").read_text(encoding="utf-8")


def load_bundled(name: str) -> Protocol:
    return parse_protocol(bundled(name))
