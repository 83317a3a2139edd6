"""Safety campaign: seeds x adversary programs x schemes x replica counts.

Each cell is an independent run, so cells may execute on a process pool;
rows are sorted by (scheme, n, adversary, seed) before aggregation, which
makes the summary independent of worker scheduling.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any

from core.domain.errors import ConfigInvalid
from core.domain.types import Scheme
from core.simulation.adversary import CAMPAIGN_PROGRAMS, PROGRAMS
from core.simulation.checker import VIOLATION_KINDS, check_trace
from core.simulation.engine import Simulation
from core.simulation.scenario import AdversarySpec, Scenario

DEFAULT_SIZES = (4, 7, 10)
CAMPAIGN_COLUMNS = (
    "scheme",
    "n",
    "adversary",
    "seed",
    "violations",
    *VIOLATION_KINDS,
    "submitted",
    "commits",
    "decisions",
    "view_changes",
    "max_view",
    "virtual_time",
    "live",
)


@dataclass(frozen=True, slots=True)
class CampaignSpec:
    seeds: tuple[int, ...]
    adversaries: tuple[str, ...] = CAMPAIGN_PROGRAMS
    schemes: tuple[Scheme, ...] = (Scheme.TS, Scheme.MAC)
    sizes: tuple[int, ...] = DEFAULT_SIZES
    base: Scenario = field(default_factory=Scenario)

    def validate(self) -> None:
        unknown = sorted(set(self.adversaries) - set(PROGRAMS))
        if unknown:
            raise ConfigInvalid(f"unknown adversary program(s): {', '.join(unknown)}")
        if not self.seeds or not self.adversaries or not self.schemes or not self.sizes:
            raise ConfigInvalid("campaign needs at least one seed, adversary, scheme and size")
        for n in self.sizes:
            if n < 4:
                raise ConfigInvalid(f"campaign size n={n} leaves no room for a fault")


@dataclass(slots=True)
class CampaignSummary:
    rows: list[dict[str, Any]]

    @property
    def runs(self) -> int:
        return len(self.rows)

    @property
    def violations(self) -> int:
        return sum(row["violations"] for row in self.rows)

    def totals(self) -> dict[str, Any]:
        by_kind = {kind: sum(row[kind] for row in self.rows) for kind in VIOLATION_KINDS}
        return {
            "runs": self.runs,
            "violations": self.violations,
            "violations_by_kind": by_kind,
            "live_runs": sum(1 for row in self.rows if row["live"]),
            "commits": sum(row["commits"] for row in self.rows),
            "submitted": sum(row["submitted"] for row in self.rows),
            "view_changes": sum(row["view_changes"] for row in self.rows),
        }

    def to_dict(self) -> dict[str, Any]:
        return {"totals": self.totals(), "rows": self.rows}


def campaign_scenarios(spec: CampaignSpec) -> list[Scenario]:
    """Expand the grid; f is the largest tolerated value for each n."""
    spec.validate()
    cells: list[Scenario] = []
    for scheme in spec.schemes:
        for n in spec.sizes:
            for program in spec.adversaries:
                for seed in spec.seeds:
                    cells.append(
                        replace(
                            spec.base,
                            n=n,
                            f=(n - 1) // 3,
                            scheme=scheme,
                            seed=seed,
                            adversary=AdversarySpec.of(program),
                            record_messages=False,
                        )
                    )
    return cells


def run_cell(scenario: Scenario) -> dict[str, Any]:
    """Run and check one campaign cell; returns its CSV row."""
    result = Simulation(scenario).run()
    report = check_trace(result.trace)
    metrics = result.metrics
    row: dict[str, Any] = {
        "scheme": scenario.scheme.value,
        "n": scenario.n,
        "adversary": scenario.adversary.program,
        "seed": scenario.seed,
        "violations": len(report.violations),
        **report.counts(),
        "submitted": metrics.submitted,
        "commits": metrics.commits,
        "decisions": metrics.decisions,
        "view_changes": metrics.view_changes,
        "max_view": metrics.max_view,
        "virtual_time": metrics.virtual_time,
        "live": result.all_committed,
    }
    return row


def _sort_key(row: dict[str, Any]) -> tuple:
    return (row["scheme"], row["n"], row["adversary"], row["seed"])


def run_campaign(
    spec: CampaignSpec,
    workers: int = 1,
    on_row: Callable[[dict[str, Any]], None] | None = None,
) -> CampaignSummary:
    """Run every cell of `spec`.

    Args:
        spec: Campaign grid.
        workers: Process count; 1 runs inline.
        on_row: Called after each finished cell (progress reporting).
    """
    cells = campaign_scenarios(spec)
    rows: list[dict[str, Any]] = []
    if workers <= 1:
        for cell in cells:
            rows.append(run_cell(cell))
            if on_row is not None:
                on_row(rows[-1])
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for row in pool.map(run_cell, cells, chunksize=max(1, len(cells) // (workers * 8))):
                rows.append(row)
                if on_row is not None:
                    on_row(row)
    rows.sort(key=_sort_key)
    return CampaignSummary(rows=rows)


def parse_seed_range(text: str) -> tuple[int, ...]:
    """'7' -> (7,); '0..99' or '0-99' -> (0, ..., 99); '1,5,9' -> (1, 5, 9)."""
    text = text.strip()
    try:
        for sep in ("..", "-"):
            if sep in text:
                low, high = (int(p) for p in text.split(sep, 1))
                if high < low:
                    raise ConfigInvalid(f"empty seed range {text!r}")
                return tuple(range(low, high + 1))
        return tuple(int(p) for p in text.split(",") if p.strip())
    except ValueError as exc:
        raise ConfigInvalid(f"invalid seed range {text!r}") from exc


def parse_csv_list(text: str | None, default: Sequence[str]) -> tuple[str, ...]:
    if not text:
        return tuple(default)
    return tuple(part.strip() for part in text.split(",") if part.strip())
