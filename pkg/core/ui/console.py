from __future__ import annotations

from collections.abc import Iterator
from contextlib import contextmanager

from rich.console import Console
from rich.panel import Panel
from rich.progress import (
    BarColumn,
    MofNCompleteColumn,
    Progress,
    SpinnerColumn,
    TextColumn,
    TimeElapsedColumn,
)
from rich.rule import Rule

_console = Console()


def line(text: str) -> None:
    _console.print(text, highlight=False)


def rule(text: str) -> None:
    _console.print(Rule(text))



def summary_panel(title: str, body: str) -> None:
    _console.print(
        Panel.fit(body.rstrip(), title=title, border_style="green", padding=(0, 1)),
        highlight=False,
    )


@contextmanager
def progress_bar(description: str, total: int) -> Iterator[Progress]:
    """Single counted task; advance with `prog.advance(prog.task_ids[0])`."""
    columns = (
        SpinnerColumn(style="cyan"),
        TextColumn("{task.description}"),
        BarColumn(bar_width=None),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
    )
    with Progress(*columns, console=_console, transient=False) as prog:
        prog.add_task(description, total=total)
        yield prog
