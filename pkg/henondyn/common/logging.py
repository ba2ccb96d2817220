"""
henondyn logging

A single ``henondyn`` logger on stderr with two extra levels: STAGE opens a
timed computation, SUCCESS closes it. Library code logs progress at INFO and
recoverable numerical trouble at WARNING.
"""

import logging
import sys
import time
from contextlib import contextmanager

from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.theme import Theme

from .singleton import ConfiguredSingleton, LazyProxy

SUCCESS = 25
STAGE = 26
logging.addLevelName(SUCCESS, "SUCCESS")
logging.addLevelName(STAGE, "STAGE")

PLAIN_FORMAT = "[%(asctime)s] %(levelname)-8s %(message)s"

LEVEL_STYLES = {
    "logging.level.success": "bold green",
    "logging.level.stage": "bold blue",
    "logging.level.info": "cyan",
    "logging.level.debug": "dim white",
    "logging.level.warning": "yellow",
    "logging.level.error": "bold red",
}


def _plain_handler() -> logging.Handler:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(fmt=PLAIN_FORMAT, datefmt="%H:%M:%S"))
    return handler


def _rich_handler() -> logging.Handler:
    console = Console(stderr=True, theme=Theme(LEVEL_STYLES))
    return RichHandler(console=console, show_time=True, show_path=False, rich_tracebacks=True,
                       markup=True, keywords=[], log_time_format="[%H:%M:%S]")


class Logger(ConfiguredSingleton):
    """Wrapper around the ``henondyn`` logger; configure(use_plain_mode, level) before first use"""

    def _setup(self, use_plain_mode=False, level=logging.INFO):
        self.use_plain_mode = use_plain_mode
        self.logger = logging.getLogger("henondyn")
        self.logger.setLevel(level)
        self.logger.handlers.clear()
        self.logger.addHandler(_plain_handler() if use_plain_mode else _rich_handler())
        self.logger.propagate = False
        self.current_stage = None

    def _emit(self, level, message, args, escape_markup, kwargs):
        # markup escaping only matters to the rich handler
        if escape_markup and not self.use_plain_mode:
            message = escape(str(message))
        self.logger.log(level, message, *args, **kwargs)

    def debug(self, message, *args, escape=False, **kwargs):
        self._emit(logging.DEBUG, message, args, escape, kwargs)

    def info(self, message, *args, escape=False, **kwargs):
        self._emit(logging.INFO, message, args, escape, kwargs)

    def success(self, message, *args, escape=False, **kwargs):
        self._emit(SUCCESS, message, args, escape, kwargs)

    def warning(self, message, *args, escape=False, **kwargs):
        self._emit(logging.WARNING, message, args, escape, kwargs)

    def error(self, message, *args, escape=False, **kwargs):
        self._emit(logging.ERROR, message, args, escape, kwargs)

    def stage(self, message, *args, escape=False, **kwargs):
        self._emit(STAGE, message, args, escape, kwargs)
        self.current_stage = message

    @contextmanager
    def stage_context(self, stage_name):
        """Log a stage, then its elapsed time on success or failure"""
        self.stage(stage_name)
        start_time = time.time()
        try:
            yield self
        except Exception as e:
            self.error(f"{stage_name} failed ({time.time() - start_time:.2f}s): {e}", escape=True)
            raise
        else:
            self.success(f"{stage_name} ({time.time() - start_time:.2f}s)")
        finally:
            self.current_stage = None


logger = LazyProxy(Logger)
