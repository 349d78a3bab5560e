"""Run manifests with SHA256 integrity records for every output file"""

import hashlib
import json
import logging
import os
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional

from qdpulse import __version__

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


def compute_sha256(file_path: str, chunk_size: int = 8192) -> str:
    """Compute SHA256 hash of a file

    Args:
        file_path: Path to file
        chunk_size: Chunk size for reading (default: 8KB)

    Returns:
        SHA256 hash as hex string
    """
    sha256_hash = hashlib.sha256()
    try:
        with open(file_path, "rb") as f:
            for chunk in iter(lambda: f.read(chunk_size), b""):
                sha256_hash.update(chunk)
        return sha256_hash.hexdigest()
    except OSError as e:
        logger.error(f"Failed to compute SHA256 for {file_path}: {e}")
        raise


class RunManifest:
    """Provenance record written next to the outputs of a run"""

    def __init__(self, command: str, resolved_config: Dict[str, Any],
                 seeds: Optional[Dict[str, Any]] = None):
        """Start a manifest; the wall clock starts now

        Args:
            command: CLI command name
            resolved_config: Full config with defaults materialized
            seeds: Seeds used by the run, keyed by role
        """
        self.command = command
        self.resolved_config = resolved_config
        self.seeds = dict(seeds or {})
        self.outputs: Dict[str, Dict[str, Any]] = {}
        self.summary: Dict[str, Any] = {}
        self.version = __version__
        self.created = datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
        self.duration_s: Optional[float] = None
        self._started = time.monotonic()

    def add_output(self, run_dir: str, file_path: str) -> None:
        """Record an output file by its path relative to ``run_dir``"""
        relative = os.path.relpath(file_path, run_dir)
        self.outputs[relative] = {
            "sha256": compute_sha256(file_path),
            "file_size": os.path.getsize(file_path),
        }
        logger.debug(f"Recorded {relative} (SHA256: {self.outputs[relative]['sha256'][:16]}...)")

    def to_dict(self) -> Dict[str, Any]:
        """Serialize for JSON

        Returns:
            Dictionary with command, version, timing, seeds, summary, outputs
            and the resolved config
        """
        return {
            "command": self.command,
            "version": self.version,
            "created": self.created,
            "duration_s": self.duration_s,
            "seeds": self.seeds,
            "summary": self.summary,
            "outputs": self.outputs,
            "resolved_config": self.resolved_config,
        }

    def write(self, run_dir: str) -> str:
        """Stop the clock and write ``manifest.json`` into ``run_dir``

        Returns:
            Path of the manifest file
        """
        self.duration_s = round(time.monotonic() - self._started, 3)
        path = Path(run_dir) / MANIFEST_NAME
        with open(path, "w") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        logger.info(f"Wrote manifest {path} ({len(self.outputs)} output(s))")
        return str(path)

    @classmethod
    def load(cls, path: str) -> "RunManifest":
        """Read a manifest file or the manifest inside a run directory

        Args:
            path: Manifest path or run directory

        Returns:
            RunManifest with outputs, summary and timing restored
        """
        if os.path.isdir(path):
            path = os.path.join(path, MANIFEST_NAME)
        with open(path, "r") as f:
            data = json.load(f)
        manifest = cls(data["command"], data["resolved_config"], data.get("seeds"))
        manifest.outputs = data.get("outputs", {})
        manifest.summary = data.get("summary", {})
        manifest.version = data.get("version", "")
        manifest.created = data.get("created", "")
        manifest.duration_s = data.get("duration_s")
        return manifest


def verify_outputs(run_dir: str) -> List[str]:
    """Re-hash every output listed in the run's manifest

    Returns:
        Relative paths of outputs that are missing or whose SHA256 differs
    """
    manifest = RunManifest.load(run_dir)
    problems = []
    for relative, info in sorted(manifest.outputs.items()):
        path = os.path.join(run_dir, relative)
        if not os.path.exists(path):
            logger.warning(f"Output missing: {path}")
            problems.append(relative)
            continue
        if compute_sha256(path) != info.get("sha256"):
            logger.warning(f"SHA256 mismatch for {path}")
            problems.append(relative)
    if not problems:
        logger.info(f"All {len(manifest.outputs)} output(s) in {run_dir} verified")
    return problems
