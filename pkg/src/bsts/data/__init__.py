"""Bundled synthetic fixtures (see scripts/make_fixtures.py for how they were generated)."""
from pathlib import Path

DATA_DIR = Path(__file__).resolve().parent


def path(name: str) -> Path:
    p = DATA_DIR / name
    if not p.exists():
        raise FileNotFoundError(f"no bundled fixture named {name!r}")
    return p
