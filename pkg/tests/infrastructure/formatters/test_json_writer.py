from __future__ import annotations

import json
from pathlib import Path

from core.infrastructure.formatters.json_writer import SummaryJsonWriter


def test_writer_creates_summary_file(tmp_out_dir: str):
    writer = SummaryJsonWriter()
    target = writer.write({"violations": 0, "metrics": {"commits": 20}}, tmp_out_dir)
    p = Path(target)
    assert p.exists() and p.name == "summary.json"
    assert json.loads(p.read_text(encoding="utf-8"))["metrics"] == {"commits": 20}


def test_writer_output_is_stable(tmp_path: Path):
    writer = SummaryJsonWriter("campaign.json")
    a = Path(writer.write({"b": 1, "a": [1, 2]}, tmp_path / "a")).read_bytes()
    b = Path(writer.write({"a": [1, 2], "b": 1}, tmp_path / "b")).read_bytes()
    assert a == b
    assert a.endswith(b"}\n")
