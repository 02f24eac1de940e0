"""Run manifests: enough to re-run a command and check its output.

Every CLI run records its subcommand, argv, parameters, seed, tool version
and a SHA-256 of the bytes it wrote. ``cfextremes replay`` re-runs the argv
and compares checksums.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from cfextremes import __version__
from cfextremes.core.errors import DomainError


def output_checksum(data: str | bytes) -> str:
    """SHA-256 hex digest of the output (text is UTF-8 encoded)."""
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """Record of one CLI run.

    Attributes:
        command: Subcommand name
        argv: Full argument vector (without the program name)
        params: Resolved parameters
        seed: Root seed, if the command is random
        version: cfextremes version that produced the output
        checksum: SHA-256 of the output bytes
        created_at: Unix timestamp (not part of the reproducibility contract)
    """

    command: str
    argv: tuple[str, ...]
    params: dict[str, Any] = field(default_factory=dict)
    seed: int | None = None
    version: str = __version__
    checksum: str = ""
    created_at: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "command": self.command,
            "argv": list(self.argv),
            "params": self.params,
            "seed": self.seed,
            "version": self.version,
            "checksum": self.checksum,
            "created_at": self.created_at,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> RunManifest:
        try:
            return cls(
                command=data["command"],
                argv=tuple(data["argv"]),
                params=dict(data.get("params", {})),
                seed=data.get("seed"),
                version=data.get("version", ""),
                checksum=data.get("checksum", ""),
                created_at=float(data.get("created_at", 0.0)),
            )
        except (KeyError, TypeError) as e:
            raise DomainError(f"malformed manifest: {e}") from e

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"), default=str)

    def matches(self, output: str | bytes) -> bool:
        return self.checksum == output_checksum(output)


def create_run_manifest(
    command: str,
    argv: list[str],
    params: dict[str, Any],
    output: str | bytes,
    seed: int | None = None,
) -> RunManifest:
    """Create a manifest for a finished run."""
    return RunManifest(
        command=command,
        argv=tuple(argv),
        params=params,
        seed=seed,
        checksum=output_checksum(output),
        created_at=time.time(),
    )


def write_manifest(manifest: RunManifest, path: Path | str) -> None:
    Path(path).write_text(manifest.to_json() + "\n", encoding="utf-8")


def load_manifest(path: Path | str) -> RunManifest:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as e:
        raise DomainError(f"cannot read manifest {path}: {e}") from e
    return RunManifest.from_dict(data)
