"""Formatter for persisting run and campaign summaries as JSON files on disk.

Writes with sorted keys and a trailing newline so reruns with the same seed
produce byte-identical files.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any


class SummaryJsonWriter:
    """Write a summary mapping as JSON under the output directory."""

    def __init__(self, filename: str = "summary.json") -> None:
        self.filename = filename

    def write(self, summary: dict[str, Any], out_dir: str | Path) -> str:
        """Persist `summary` in `out_dir/<filename>`.

        Args:
            summary: JSON-serializable mapping.
            out_dir: Base output directory (created when missing).

        Returns:
            Absolute path of the written JSON file.
        """
        out = Path(out_dir).expanduser().resolve()
        out.mkdir(parents=True, exist_ok=True)
        target = out / self.filename
        target.write_text(
            json.dumps(summary, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )
        return str(target)
