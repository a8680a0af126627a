"""Run directory layout and artifact writers; every artifact carries the config hash."""

import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Optional

import pandas as pd

from engine.rough_paths.serialization import write_table

logger = logging.getLogger(__name__)


def canonical_json(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)


def config_hash(payload: dict) -> str:
    """sha256 of the canonical JSON of the resolved config."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()


class ArtifactWriter:
    """Writes tables, JSON documents and plots into one run directory."""

    def __init__(self, run_dir: Path, digest: str, tool_version: str):
        self.run_dir = Path(run_dir)
        self.digest = digest
        self.tool_version = tool_version
        self.written: List[Path] = []
        self.run_dir.mkdir(parents=True, exist_ok=True)

    def _record(self, path: Path) -> Path:
        self.written.append(path)
        logger.info(f"✓ Artifact written: {path}")
        return path

    def table(self, name: str, frame: pd.DataFrame, header: Optional[Dict] = None) -> Path:
        """CSV with a `# key=value` header block including the config hash."""
        full_header = {"config_hash": self.digest, "tool_version": self.tool_version}
        full_header.update(header or {})
        return self._record(write_table(self.run_dir / f"{name}.csv", frame, full_header))

    def json(self, name: str, payload: dict) -> Path:
        path = self.run_dir / f"{name}.json"
        document = {"config_hash": self.digest, "tool_version": self.tool_version, **payload}
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True, default=str)
        return self._record(path)

    def plot(self, name: str, figure) -> List[Path]:
        """HTML always, SVG when a static image engine is available; never raises."""
        paths = []
        html = self.run_dir / f"{name}.html"
        try:
            figure.write_html(str(html), include_plotlyjs="cdn")
            paths.append(self._record(html))
        except (OSError, ValueError) as e:
            logger.warning(f"Plot {name} not written: {str(e)}")
            return paths
        svg = self.run_dir / f"{name}.svg"
        try:
            figure.write_image(str(svg))
            paths.append(self._record(svg))
        except Exception as e:  # static export engine missing or broken
            logger.warning(f"SVG export skipped for {name}: {str(e)}")
        return paths
