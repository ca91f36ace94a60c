"""Bundled reference corpus: a road-sweeper perception stack.

The documents in this package describe a low-speed street-sweeper with a
camera (pedestrian/cyclist recognition) and a LiDAR (curb and obstacle
detection), together with the triggering-source ontology, compatibility
matrix, effect knowledge and description templates used to generate its
triggering-condition catalog. They serve as a worked example and as the
fixture corpus for the test suite.
"""

from __future__ import annotations

from importlib import resources
from pathlib import Path

__all__ = [
    "data_path",
    "reference_config",
    "REFERENCE_DOCUMENTS",
]

REFERENCE_DOCUMENTS = (
    "source_ontology.yaml",
    "sweeper_system.yaml",
    "compatibility_matrix.yaml",
    "effects.yaml",
    "condition_templates.yaml",
    "hazardous_events.yaml",
    "compose_policy.yaml",
    "project.yaml",
)


def data_path(name: str) -> Path:
    """Absolute path of a bundled document; raises if it does not exist."""
    path = Path(resources.files(__package__) / name)
    if not path.is_file():
        raise FileNotFoundError(f"no bundled document named {name!r}")
    return path


def reference_config() -> Path:
    """Path of the bundled project configuration."""
    return data_path("project.yaml")
