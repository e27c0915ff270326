"""Run configuration: seeds, caps, budgets and thread count from a TOML file."""
from __future__ import annotations

import os
import sys
from dataclasses import fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .spectrum import ScanOptions

ENV_THREADS = "CONFIGURA_THREADS"


def load_config(path: str | Path | None = None) -> dict:
    """Read a TOML file (missing path means defaults) and apply the thread override."""
    cfg: dict = {}
    if path:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    env = os.environ.get(ENV_THREADS)
    if env:
        try:
            cfg.setdefault("scan", {})["workers"] = max(1, int(env))
        except ValueError:
            raise ValueError(f"{ENV_THREADS}={env!r} is not an integer") from None
    return cfg


def scan_options(cfg: dict | None = None, **overrides) -> ScanOptions:
    """ScanOptions from the [scan] table; unknown keys are rejected."""
    section = dict((cfg or {}).get("scan", {}))
    section.update({k: v for k, v in overrides.items() if v is not None})
    known = {f.name for f in fields(ScanOptions)}
    bad = sorted(set(section) - known)
    if bad:
        raise ValueError(f"unknown scan options: {', '.join(bad)}")
    return ScanOptions(**section)
