"""Worker-count policy for the independent checks in the estimate battery."""

from __future__ import annotations

import os

ENV_VAR = "DEGEN_LAB_THREADS"


def worker_count() -> int:
    """Workers for independent checks: DEGEN_LAB_THREADS if set, else all cores."""
    raw = os.environ.get(ENV_VAR)
    if raw is None:
        return os.cpu_count() or 1
    try:
        value = int(raw)
    except ValueError as err:
        raise ValueError(f"{ENV_VAR} must be an integer, got {raw!r}") from err
    if value < 1:
        raise ValueError(f"{ENV_VAR} must be positive, got {value}")
    return value
