"""Bundled reference plugins for the external matcher protocol."""

from importlib import resources
from pathlib import Path


def plugin_path(name: str) -> Path:
    """Filesystem path of a bundled plugin script (e.g. "echo_name_edit.py")."""
    return Path(str(resources.files(__package__).joinpath(name)))
