"""
henondyn display

Run configuration panels, result tables and scan/render progress. Everything
goes to stderr; stdout is reserved for JSON written with ``--out -``.
"""

import platform
import sys
import time
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

from rich.console import Console, Group
from rich.panel import Panel
from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn, TimeRemainingColumn
from rich.table import Table
from rich.theme import Theme

from .singleton import ConfiguredSingleton, LazyProxy

MAX_VALUE_WIDTH = 50
PLAIN_RULE = "=" * 60

# plain-mode progress prints at most this many updates per run
PLAIN_PROGRESS_STEPS = 20


@dataclass(frozen=True)
class ConfigSection:
    title: str
    color: str
    fields: Tuple[Tuple[str, str, Optional[Callable]], ...]
    subcommands: Optional[Tuple[str, ...]] = None

    def applies_to(self, config) -> bool:
        return self.subcommands is None or getattr(config, "subcommand", None) in self.subcommands


def _join_moduli(moduli):
    return ", ".join(f"{m:g}" for m in moduli)


CONFIG_SECTIONS = (
    ConfigSection("Input", "bright_blue", (
        ("map_path", "Map File", None),
        ("other_path", "Compared Map", None),
        ("family", "Family", None),
        ("param", "Parameter", None),
    )),
    ConfigSection("Numerics", "bright_blue", (
        ("period", "Period", None),
        ("max_period", "Max Period", None),
        ("tol", "Tolerance", None),
        ("budget", "Budget d^n", None),
        ("seed", "Random Seed", None),
    )),
    ConfigSection("Isospectral Search", "bright_magenta", (
        ("mode", "Mode", None),
        ("box_radius", "Box Radius", None),
        ("grid", "Grid", None),
    ), subcommands=("isospectral",)),
    ConfigSection("Orbit Iteration", "purple", (
        ("moduli", "Moduli", _join_moduli),
        ("angles", "Angles per Modulus", None),
        ("inits", "Initial Points", None),
        ("max_iter", "Max Iterations", None),
        ("image", "Image", None),
    ), subcommands=("scan", "slice")),
    ConfigSection("System Configuration", "bright_green", (
        ("workers", "Workers", None),
        ("device", "Device", None),
        ("plain_output", "Plain Output", None),
        ("out", "Output", None),
    )),
)


def format_value(value) -> str:
    """Text for one table cell; complex numbers print as a+bi"""
    if isinstance(value, bool):
        return "✓" if value else "✗"
    if isinstance(value, complex):
        return f"{value.real:.6g}{value.imag:+.6g}i"
    if isinstance(value, float):
        return f"{value:.6g}"
    text = str(value)
    if len(text) > MAX_VALUE_WIDTH:
        text = text[:MAX_VALUE_WIDTH - 5] + "..."
    return text


def system_rows():
    import numpy
    import torch

    rows = [("OS", f"{platform.system()} {platform.release()}"),
            ("Python", platform.python_version()),
            ("NumPy", numpy.__version__),
            ("PyTorch", torch.__version__.split("+")[0])]
    rows.append(("GPU", torch.cuda.get_device_name(0) if torch.cuda.is_available() else "Not Available"))
    return rows


class Display(ConfiguredSingleton):
    """Console output of the command-line front end; configure(use_plain_mode) before first use"""

    def _setup(self, use_plain_mode=False):
        self.use_plain_mode = use_plain_mode
        self.console = None if use_plain_mode else Console(stderr=True, theme=Theme({
            "success": "bold green",
            "warning": "bold yellow",
            "error": "bold red",
            "info": "cyan",
        }))

    def _print(self, text=""):
        if self.console is None:
            print(text, file=sys.stderr)
        else:
            self.console.print(text)

    def render_config(self, config, title="Configuration"):
        """Panels for every config section with at least one value set"""
        sections = [("System Information", system_rows(), "yellow")]
        for section in CONFIG_SECTIONS:
            if not section.applies_to(config):
                continue
            rows = []
            for field_name, label, transform in section.fields:
                value = getattr(config, field_name, None)
                if value is not None:
                    rows.append((label, transform(value) if transform else value))
            if rows:
                sections.append((section.title, rows, section.color))

        if self.console is None:
            self._print(f"\n{PLAIN_RULE}\n {title}\n{PLAIN_RULE}")
            for section_title, rows, _ in sections:
                self._print(f"\n--- {section_title} ---")
                for label, value in rows:
                    self._print(f"{label}: {format_value(value)}")
            self._print(f"\n{PLAIN_RULE}\n")
            return
        panels = [self._panel(self._table(rows, "cyan"), section_title, color)
                  for section_title, rows, color in sections]
        self.console.print(Panel(Group(*panels), title=f"[bold blue]{title}[/bold blue]",
                                 border_style="blue", padding=(1, 2)))
        self.console.print()

    def render_results(self, rows: Sequence[tuple], title="Results", color="green"):
        """Summary of a finished computation as (key, value, unit) rows"""
        if self.console is None:
            self._print(f"\n--- {title} ---")
            for key, value, unit in rows:
                self._print(f"{key}: {format_value(value)} {unit or ''}".rstrip())
            return
        self.console.print(self._panel(self._table(rows, color, units=True), title, color))
        self.console.print()

    def _table(self, rows, value_style, units=False):
        table = Table(show_header=False, box=None, padding=(0, 1))
        table.add_column(style="bold white", min_width=18)
        table.add_column(style=value_style, justify="right")
        if units:
            table.add_column(style="dim white")
        for row in rows:
            cells = [f"{row[0]}:", format_value(row[1])]
            if units:
                cells.append(str(row[2] or ""))
            table.add_row(*cells)
        return table

    @staticmethod
    def _panel(content, title, color):
        return Panel(content, title=f"[bold {color}]{title}[/bold {color}]", border_style=color)

    def create_progress(self, total, label="Scanning"):
        return DisplayProgress(self, total, label)


class DisplayProgress:
    """Progress of a scan or render; advance(completed) is the library's progress callback"""

    def __init__(self, display, total, label="Scanning"):
        self.display = display
        self.total = max(int(total), 1)
        self.label = label
        self.start_time = None
        self.bar = None
        self.task_id = None
        self._plain_stride = max(self.total // PLAIN_PROGRESS_STEPS, 1)

    def __enter__(self):
        self.start_time = time.time()
        if self.display.console is None:
            print(f"{self.label}: 0/{self.total}", file=sys.stderr, flush=True)
        else:
            self.bar = Progress(SpinnerColumn(), TextColumn(f"[bold blue]{self.label}"), BarColumn(bar_width=40),
                                MofNCompleteColumn(), TextColumn("•"), TimeRemainingColumn(),
                                console=self.display.console, expand=False)
            self.task_id = self.bar.add_task(self.label, total=self.total)
            self.bar.start()
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        elapsed = time.time() - self.start_time
        if self.bar is not None:
            if exc_type is None:
                self.bar.update(self.task_id, completed=self.total)
            self.bar.stop()
        elif exc_type is None:
            print(f"{self.label}: {self.total}/{self.total} - Complete! ({elapsed:.1f}s)", file=sys.stderr)
        self.start_time = None
        return False

    def advance(self, completed):
        if self.start_time is None:
            return
        if self.bar is not None:
            self.bar.update(self.task_id, completed=completed)
        elif completed % self._plain_stride == 0 and completed < self.total:
            print(f"{self.label}: {completed}/{self.total}", file=sys.stderr, flush=True)


display = LazyProxy(Display)
