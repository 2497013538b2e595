from __future__ import annotations

import os
from dataclasses import dataclass, fields, replace
from functools import lru_cache
from typing import Mapping, Optional

from dotenv import load_dotenv

from app.constants import (
    DEFAULT_CHAIN_GUARD,
    DEFAULT_FIBRE_GUARD,
    DEFAULT_ISO_NODE_CAP,
    DEFAULT_LATTICE_ORDER_GUARD,
    DEFAULT_LIE_GUARD,
    DEFAULT_LOG_LEVEL,
    DEFAULT_MAP_RANK_FACES,
    DEFAULT_PARTITION_GUARD,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_SIMPLEX_GUARD,
    DEFAULT_SUBGROUP_GUARD,
    DEFAULT_TREE_GUARD,
    DEFAULT_TREE_MODULE_GUARD,
    DEFAULT_WEYL_GUARD,
    DEFAULT_WORKERS,
    DEFAULT_ZIGZAG_GUARD,
)


load_dotenv()


@dataclass(frozen=True)
class Config:
    log_level: str = DEFAULT_LOG_LEVEL
    subgroups: int = DEFAULT_SUBGROUP_GUARD
    chains: int = DEFAULT_CHAIN_GUARD
    partition_points: int = DEFAULT_PARTITION_GUARD
    tree_points: int = DEFAULT_TREE_GUARD
    lie_degree: int = DEFAULT_LIE_GUARD
    tree_module_points: int = DEFAULT_TREE_MODULE_GUARD
    weyl_points: int = DEFAULT_WEYL_GUARD
    iso_nodes: int = DEFAULT_ISO_NODE_CAP
    zigzag_points: int = DEFAULT_ZIGZAG_GUARD
    fibre_points: int = DEFAULT_FIBRE_GUARD
    simplices: int = DEFAULT_SIMPLEX_GUARD
    map_rank_faces: int = DEFAULT_MAP_RANK_FACES
    lattice_order: int = DEFAULT_LATTICE_ORDER_GUARD
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS


GUARD_KEYS = tuple(f.name for f in fields(Config) if f.name != "log_level")

_ENV_NAMES = {
    "subgroups": "GUARD_SUBGROUPS",
    "chains": "GUARD_CHAINS",
    "partition_points": "GUARD_PARTITION_POINTS",
    "tree_points": "GUARD_TREE_POINTS",
    "lie_degree": "GUARD_LIE_DEGREE",
    "tree_module_points": "GUARD_TREE_MODULE_POINTS",
    "weyl_points": "GUARD_WEYL_POINTS",
    "iso_nodes": "GUARD_ISO_NODES",
    "zigzag_points": "GUARD_ZIGZAG_POINTS",
    "fibre_points": "GUARD_FIBRE_POINTS",
    "simplices": "GUARD_SIMPLICES",
    "map_rank_faces": "GUARD_MAP_RANK_FACES",
    "lattice_order": "GUARD_LATTICE_ORDER",
    "samples": "VERIFY_SAMPLES",
    "seed": "VERIFY_SEED",
    "workers": "VERIFY_WORKERS",
}


def _optional_int(name: str) -> Optional[int]:
    value = os.getenv(name)
    if not value:
        return None
    try:
        return int(value)
    except ValueError as exc:
        raise RuntimeError(f"Invalid integer in environment variable {name}: {value!r}") from exc


@lru_cache(maxsize=1)
def get_config() -> Config:
    values = {}
    for key, env_name in _ENV_NAMES.items():
        parsed = _optional_int(env_name)
        if parsed is not None:
            values[key] = parsed
    return Config(log_level=os.getenv("LOG_LEVEL", DEFAULT_LOG_LEVEL), **values)


def with_guards(config: Config, overrides: Mapping[str, object]) -> Config:
    updates = {}
    for key, raw in overrides.items():
        name = key.strip().lower().replace("-", "_")
        if name not in GUARD_KEYS:
            raise ValueError(f"Unknown guard {key!r}; expected one of {', '.join(GUARD_KEYS)}")
        try:
            value = int(str(raw).strip())
        except ValueError as exc:
            raise ValueError(f"Guard {key!r} needs an integer value, got {raw!r}") from exc
        if value < 0:
            raise ValueError(f"Guard {key!r} must be non-negative, got {value}")
        updates[name] = value
    return replace(config, **updates)
