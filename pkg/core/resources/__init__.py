from __future__ import annotations

from pathlib import Path

"""Static resources for poe-sim (templates, schemas).

Exposes constants to deterministically locate artifacts on disk.
"""

SCENARIO_SCHEMA_PATH: str = str(
    Path(__file__).resolve().parent / "schemas" / "scenario.schema.json"
)
