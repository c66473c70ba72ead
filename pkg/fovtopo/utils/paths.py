from __future__ import annotations

from pathlib import Path


def make_output_dir(base_dir: str | Path) -> Path:
    out = Path(base_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def seed_dir(base_dir: str | Path, seed: int) -> Path:
    # Fixed name per seed so reruns overwrite instead of piling up
    out = make_output_dir(base_dir) / f"seed_{seed}"
    out.mkdir(parents=True, exist_ok=True)
    return out
