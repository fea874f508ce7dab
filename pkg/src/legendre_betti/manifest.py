"""Run manifests: enough metadata to replay a CLI invocation and compare its output."""
from __future__ import annotations

import hashlib
import json
import platform
from dataclasses import asdict, dataclass, field
from importlib import metadata
from typing import Any

_TRACKED = ("python-flint", "numpy", "mpmath", "gmpy2")


def library_versions() -> dict[str, str]:
    out = {"python": platform.python_version()}
    for name in _TRACKED:
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = "missing"
    try:
        out["legendre-betti"] = metadata.version("legendre-betti")
    except metadata.PackageNotFoundError:
        out["legendre-betti"] = "source"
    return out


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)


def digest(obj: Any) -> str:
    """SHA-256 of the canonical JSON rendering (text payloads are hashed verbatim)."""
    data = obj if isinstance(obj, str) else canonical_json(obj)
    return hashlib.sha256(data.encode()).hexdigest()


@dataclass
class RunManifest:
    command: str
    argv: list[str]
    parameters: dict[str, Any]
    precision: dict[str, Any]
    threads: int
    versions: dict[str, str] = field(default_factory=library_versions)
    wall_time: float = 0.0
    outputs_digest: str = ""
    exit_code: int = 0

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, data: dict) -> "RunManifest":
        missing = {"command", "argv", "parameters", "precision", "threads"} - set(data)
        if missing:
            raise ValueError(f"manifest lacks {sorted(missing)}")
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        return cls(**known)

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        with open(path) as fh:
            return cls.from_json(json.load(fh))

    def write(self, path: str) -> None:
        with open(path, "w") as fh:
            fh.write(self.dumps() + "\n")


def replay(manifest: RunManifest) -> tuple[int, bool]:
    """Re-run the recorded argv; returns (exit code, whether the outputs digest matches)."""
    from .cli import run

    code, _, rerun, _ = run(manifest.argv)
    return code, rerun.outputs_digest == manifest.outputs_digest
