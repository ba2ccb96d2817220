#!/usr/bin/env python3
"""
henondyn Utility Functions

Environment defaults, device selection and JSON input/output helpers.
"""

import json
import os
import sys
from pathlib import Path
from typing import Optional

from pydantic import BaseModel, ValidationError

from .logging import logger

ENV_WORKERS = "HENONDYN_WORKERS"
ENV_DEVICE = "HENONDYN_DEVICE"
ENV_PLAIN_OUTPUT = "HENONDYN_PLAIN_OUTPUT"


def env_flag(name, default=False):
    value = os.environ.get(name)
    if value is None:
        return default
    return value.strip().lower() in ("1", "yes", "true", "t", "y", "on")


def resolve_workers(workers: Optional[int] = None) -> int:
    """Worker-pool size: explicit value, then HENONDYN_WORKERS, then 1"""
    if workers is None:
        raw = os.environ.get(ENV_WORKERS)
        if raw is None:
            return 1
        try:
            workers = int(raw)
        except ValueError:
            raise ValueError(f"{ENV_WORKERS} must be an integer, got {raw!r}") from None
    if workers < 1:
        raise ValueError(f"worker count must be >= 1, got {workers}")
    return workers


def resolve_device(device: Optional[str] = None) -> str:
    """Torch device name: explicit value, then HENONDYN_DEVICE, then cpu"""
    import torch

    device = device or os.environ.get(ENV_DEVICE, "cpu")
    if device not in ("cpu", "cuda"):
        raise ValueError(f"device must be 'cpu' or 'cuda', got {device!r}")
    if device == "cuda" and not torch.cuda.is_available():
        logger.warning("CUDA requested but not available, falling back to cpu")
        return "cpu"
    return device


def load_json(path) -> dict:
    """Read a JSON file, reporting line and column of syntax errors"""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Input file not found: {path}")
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: malformed JSON at line {e.lineno}, column {e.colno}: {e.msg}") from None


def parse_model(model_cls, data, source="input"):
    """Validate data against a pydantic model, naming the first failing location"""
    try:
        return model_cls.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        loc = ".".join(str(part) for part in first.get("loc", ()))
        raise ValueError(f"{source}: invalid value at '{loc}': {first.get('msg')}") from None


def write_output(model: BaseModel, out: Optional[str]):
    """Write a model as JSON to a file, or to stdout when out is '-'"""
    if out is None:
        return
    text = model.model_dump_json(indent=2)
    if out == "-":
        sys.stdout.write(text + "\n")
        sys.stdout.flush()
        return
    path = Path(out)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text + "\n", encoding="utf-8")
    logger.info(f"Wrote [cyan]{path}[/cyan]")
