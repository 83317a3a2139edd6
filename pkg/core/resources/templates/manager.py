"""Jinja2 rendering for poe CLI messages, run summaries and sample files.

Every template poe renders is named below; callers pass these names, never
file paths. Output is plain text or YAML.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import Any

from jinja2 import Environment, FileSystemLoader, StrictUndefined

from core.domain.errors import TemplateMissing

_TEMPLATES_DIR = Path(__file__).parent

CONFIG_SET = "config_set.j2"
ERROR = "error.j2"
CONFIG_SAMPLE = "config_apply.yaml.j2"
SCENARIO_SAMPLE = "scenario_template.yaml.j2"
RUN_SUMMARY = "cli/run_summary.j2"
CAMPAIGN_SUMMARY = "cli/campaign_summary.j2"
LATENCY_SUMMARY = "cli/latency_summary.j2"
CHECK_SUMMARY = "cli/check_summary.j2"

TEMPLATES = frozenset(
    {
        CONFIG_SET,
        ERROR,
        CONFIG_SAMPLE,
        SCENARIO_SAMPLE,
        RUN_SUMMARY,
        CAMPAIGN_SUMMARY,
        LATENCY_SUMMARY,
        CHECK_SUMMARY,
    }
)


@lru_cache(maxsize=1)
def _environment() -> Environment:
    return Environment(
        loader=FileSystemLoader(str(_TEMPLATES_DIR)),
        autoescape=False,  # nosec B701 - text and YAML only
        undefined=StrictUndefined,
        trim_blocks=True,
        lstrip_blocks=True,
    )


def render_template(name: str, **values: Any) -> str:
    """Render one of the poe templates.

    Raises:
        TemplateMissing: `name` is not one of `TEMPLATES`.
        jinja2.UndefinedError: a placeholder was left without a value.
    """
    if name not in TEMPLATES:
        raise TemplateMissing(f"unknown template {name!r}")
    return _environment().get_template(name).render(**values)
