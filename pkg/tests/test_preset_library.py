"""Tests for preset library functionality."""

from __future__ import annotations

from pathlib import Path

import pytest


def _write_user_preset(user_dir: Path, stem: str, name: str, alpha: float = 2.0) -> Path:
    user_dir.mkdir(parents=True, exist_ok=True)
    path = user_dir / f"{stem}.yaml"
    path.write_text(
        f"""meta:
  name: {name}
  description: A test preset
  tags: [test, steep]

spec:
  family: doubly
  b: 3
  c: 2
  alpha: {alpha}
"""
    )
    return path


def test_discover_presets_finds_builtin() -> None:
    """Built-in presets ship with the package."""
    from cfextremes.core.preset_library import discover_presets, get_builtin_presets_dir

    assert get_builtin_presets_dir().exists(), "Built-in presets directory should exist"
    builtin, _ = discover_presets()
    names = {p.name for p in builtin}
    assert {"desk surrogate", "doubly b2 c2"} <= names
    assert all(p.is_builtin for p in builtin), "All should be marked as built-in"


def test_discover_presets_finds_user(tmp_path: Path, monkeypatch) -> None:
    """User presets are read from the user directory."""
    from cfextremes.core.preset_library import discover_presets

    user_dir = tmp_path / "presets"
    _write_user_preset(user_dir, "steep", "Steep Doubly")
    monkeypatch.setattr("cfextremes.core.preset_library.get_user_presets_dir", lambda: user_dir)

    _, user = discover_presets()

    assert len(user) == 1, "Should find one user preset"
    assert user[0].metadata.name == "Steep Doubly"
    assert user[0].metadata.tags == ["test", "steep"]
    assert not user[0].is_builtin


def test_load_builtin_preset() -> None:
    """Loading the surrogate preset yields its spec and construction settings."""
    from cfextremes.core.growth import Family
    from cfextremes.core.preset_library import find_preset

    entry = find_preset("desk surrogate")
    assert entry is not None
    config = entry.load()
    assert config.spec.family is Family.SINGLE_EXP
    assert config.spec.base == 2.0
    assert config.construction["depth"] == 4
    assert find_preset("DOUBLY_B2_C2") is not None
    assert find_preset("no such preset") is None


def test_user_preset_shadows_builtin(tmp_path: Path, monkeypatch) -> None:
    """A user preset with a built-in's name wins the lookup."""
    from cfextremes.core.preset_library import find_preset

    user_dir = tmp_path / "presets"
    _write_user_preset(user_dir, "doubly_b2_c2", "doubly b2 c2", alpha=0.5)
    monkeypatch.setattr("cfextremes.core.preset_library.get_user_presets_dir", lambda: user_dir)

    entry = find_preset("doubly b2 c2")
    assert entry is not None and not entry.is_builtin
    assert entry.load().spec.alpha == 0.5


def test_parse_metadata_falls_back_to_file_name(tmp_path: Path) -> None:
    """Files without a meta section are named after their stem."""
    from cfextremes.core.preset_library import parse_preset_metadata

    path = tmp_path / "bare_spec.yaml"
    path.write_text("spec:\n  family: polynomial\n  p: 2\n")
    assert parse_preset_metadata(path).name == "bare spec"

    broken = tmp_path / "broken_file.yaml"
    broken.write_text("meta: [unclosed\n")
    assert parse_preset_metadata(broken).name == "broken file"


def test_load_config_requires_spec(tmp_path: Path) -> None:
    """A config without a spec section is rejected."""
    from cfextremes.core.errors import DomainError
    from cfextremes.core.preset_library import load_config

    path = tmp_path / "nospec.yaml"
    path.write_text("meta:\n  name: empty\n")
    with pytest.raises(DomainError):
        load_config(path)

    path.write_text("spec:\n  family: doubly\n  b: 0.5\n  c: 2\n  alpha: 1\n")
    with pytest.raises(DomainError):
        load_config(path)


def test_search_presets() -> None:
    """Search matches name, description and tags."""
    from cfextremes.core.preset_library import discover_presets, search_presets

    builtin, _ = discover_presets()
    assert {p.name for p in search_presets(builtin, "critical")} == {"single critical"}
    assert len(search_presets(builtin, "  ")) == len(builtin)
    assert search_presets(builtin, "zzz") == []
