"""Templates package public API.

This module should not contain implementations, only re-exports. The
rendering implementation lives in ``templates.manager``.
"""

from .manager import (
    CAMPAIGN_SUMMARY,
    CHECK_SUMMARY,
    CONFIG_SAMPLE,
    CONFIG_SET,
    ERROR,
    LATENCY_SUMMARY,
    RUN_SUMMARY,
    SCENARIO_SAMPLE,
    TEMPLATES,
    render_template,
)

__all__ = [
    "CAMPAIGN_SUMMARY",
    "CHECK_SUMMARY",
    "CONFIG_SAMPLE",
    "CONFIG_SET",
    "ERROR",
    "LATENCY_SUMMARY",
    "RUN_SUMMARY",
    "SCENARIO_SAMPLE",
    "TEMPLATES",
    "render_template",
]
