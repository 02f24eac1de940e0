"""Preset library for discovering built-in and user growth-spec files.

A preset is a YAML file::

    meta:
      name: doubly b2 c2
      description: ...
      tags: [doubly, critical]
    spec:
      family: doubly
      b: 2
      c: 2
      alpha: 1
      beta: 1
    construction:      # optional
      N: 2
      depth: 3
      mode: log_only
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from cfextremes.core.errors import DomainError
from cfextremes.core.growth import GrowthSpec


@dataclass
class PresetMetadata:
    """Metadata extracted from preset YAML."""

    name: str
    description: str = ""
    tags: list[str] = field(default_factory=list)


@dataclass
class PresetEntry:
    """A preset file with metadata and source info."""

    path: Path
    metadata: PresetMetadata
    is_builtin: bool

    @property
    def name(self) -> str:
        return self.metadata.name

    def load(self) -> PresetConfig:
        return load_config(self.path)


@dataclass(frozen=True)
class PresetConfig:
    """Parsed preset: a growth spec plus optional construction settings."""

    spec: GrowthSpec
    construction: dict[str, Any] = field(default_factory=dict)
    metadata: PresetMetadata | None = None


def get_user_presets_dir() -> Path:
    """Get platform-appropriate user presets directory."""
    if os.name == "nt":  # Windows
        base = os.environ.get("APPDATA", os.path.expanduser("~"))
        return Path(base) / "cfextremes" / "presets"
    else:  # macOS, Linux
        return Path.home() / ".config" / "cfextremes" / "presets"


def get_builtin_presets_dir() -> Path:
    """Get built-in presets directory."""
    return Path(__file__).parent.parent / "presets" / "builtin"


def _metadata_from(data: dict[str, Any], path: Path) -> PresetMetadata:
    meta = data.get("meta") or {}
    return PresetMetadata(
        name=meta.get("name", path.stem.replace("_", " ")),
        description=meta.get("description", ""),
        tags=list(meta.get("tags", [])),
    )


def _read_yaml(path: Path) -> dict[str, Any]:
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    except (OSError, yaml.YAMLError) as e:
        raise DomainError(f"cannot read preset {path}: {e}") from e
    if not isinstance(data, dict):
        raise DomainError(f"preset {path} is not a mapping")
    return data


def parse_preset_metadata(path: Path) -> PresetMetadata:
    """Parse metadata from a preset file, falling back to the file name."""
    try:
        return _metadata_from(_read_yaml(path), path)
    except DomainError:
        return PresetMetadata(name=path.stem.replace("_", " "))


def load_config(path: Path | str) -> PresetConfig:
    """Load a preset or ``--config`` file.

    Raises:
        DomainError: unreadable file, missing ``spec`` section or invalid
            parameters.
    """
    path = Path(path)
    data = _read_yaml(path)
    spec_data = data.get("spec")
    if not isinstance(spec_data, dict):
        raise DomainError(f"{path}: missing 'spec' section")
    construction = data.get("construction") or {}
    if not isinstance(construction, dict):
        raise DomainError(f"{path}: 'construction' must be a mapping")
    return PresetConfig(
        spec=GrowthSpec.from_dict(spec_data),
        construction=dict(construction),
        metadata=_metadata_from(data, path),
    )


def discover_presets() -> tuple[list[PresetEntry], list[PresetEntry]]:
    """Discover all available presets.

    Returns:
        Tuple of (builtin_presets, user_presets)
    """
    found: dict[bool, list[PresetEntry]] = {True: [], False: []}
    for is_builtin, directory in (
        (True, get_builtin_presets_dir()),
        (False, get_user_presets_dir()),
    ):
        if not directory.exists():
            continue
        for yaml_file in sorted(directory.glob("*.yaml")):
            metadata = parse_preset_metadata(yaml_file)
            found[is_builtin].append(
                PresetEntry(path=yaml_file, metadata=metadata, is_builtin=is_builtin)
            )
    return found[True], found[False]


def find_preset(name: str) -> PresetEntry | None:
    """Look a preset up by file stem or meta name; user presets win."""
    builtin, user = discover_presets()
    key = name.strip().lower()
    for entry in user + builtin:
        if key in (entry.path.stem.lower(), entry.name.lower()):
            return entry
    return None


def search_presets(presets: list[PresetEntry], query: str) -> list[PresetEntry]:
    """Filter presets by a query matched against name, description and tags."""
    if not query.strip():
        return presets
    q = query.lower()
    return [
        p
        for p in presets
        if q in p.metadata.name.lower()
        or q in p.metadata.description.lower()
        or any(q in tag.lower() for tag in p.metadata.tags)
    ]
