"""On-disk cache of vertex-operator modes.

One JSON file per mode, named by a hash of its descriptor.  Writes go to a
temporary file in the same directory followed by ``os.replace``, so readers
never observe a partial file and racing writers simply leave one complete
copy behind.
"""
from __future__ import annotations

import hashlib
import json
import logging
import os
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

from . import mutations
from .exactlin import fraction_str, to_fraction
from .vertex import CACHE_FORMAT_VERSION, ModeMatrix, vertex_mode

log = logging.getLogger(__name__)

ENV_VAR = "CHIRALFORGE_CACHE"


class CacheWarning(UserWarning):
    """A cache entry was unusable and has been rebuilt."""


def default_cache_dir() -> Path:
    return Path(os.environ.get("XDG_CACHE_HOME", Path.home() / ".cache")) / "chiralforge"


def resolve_cache_dir(explicit=None) -> Path:
    """Explicit argument, else ``$CHIRALFORGE_CACHE``, else the user cache directory."""
    if explicit:
        return Path(explicit)
    env = os.environ.get(ENV_VAR)
    return Path(env) if env else default_cache_dir()


@dataclass
class CacheStats:
    hits: int = 0
    builds: int = 0
    rebuilds: int = 0


STATS = CacheStats()


def mode_key(alpha, s, beta, cutoff: int) -> str:
    desc = {
        "version": CACHE_FORMAT_VERSION,
        "alpha": fraction_str(to_fraction(alpha)),
        "s": fraction_str(to_fraction(s)),
        "beta": fraction_str(to_fraction(beta)),
        "cutoff": int(cutoff),
    }
    return hashlib.sha256(json.dumps(desc, sort_keys=True).encode()).hexdigest()[:32]


def _write_atomic(path: Path, payload: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=path.name + ".", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(payload)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _load(path: Path, alpha, s, beta, cutoff: int) -> ModeMatrix | None:
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        return None
    except (OSError, json.JSONDecodeError) as exc:
        warnings.warn(f"corrupt cache entry {path.name} ({exc}); rebuilding", CacheWarning, stacklevel=3)
        return None
    if not isinstance(data, dict) or data.get("version") != CACHE_FORMAT_VERSION:
        log.info("cache entry %s has another format version; rebuilding", path.name)
        return None
    try:
        mm = ModeMatrix.from_json(data)
    except (KeyError, TypeError, ValueError, ZeroDivisionError) as exc:
        warnings.warn(f"corrupt cache entry {path.name} ({exc}); rebuilding", CacheWarning, stacklevel=3)
        return None
    if (mm.alpha, mm.s, mm.source_charge, mm.cutoff) != (alpha, s, beta, cutoff):
        warnings.warn(f"cache entry {path.name} describes another mode; rebuilding", CacheWarning, stacklevel=3)
        return None
    return mm


def cache_get_or_build(alpha, s, beta, cutoff: int, cache_dir=None) -> ModeMatrix:
    """Return ``Y_{alpha,s}`` on ``H_beta`` from the cache, building it if needed.

    Mutated builds bypass the cache so that they never poison it.
    """
    alpha, s, beta = to_fraction(alpha), to_fraction(s), to_fraction(beta)
    if mutations.active():
        return vertex_mode(alpha, s, beta, cutoff)
    path = resolve_cache_dir(cache_dir) / f"mode-{mode_key(alpha, s, beta, cutoff)}.json"
    existed = path.exists()
    mm = _load(path, alpha, s, beta, cutoff)
    if mm is not None:
        STATS.hits += 1
        return mm
    mm = vertex_mode(alpha, s, beta, cutoff)
    _write_atomic(path, json.dumps(mm.to_json(), sort_keys=True))
    STATS.builds += 1
    if existed:
        STATS.rebuilds += 1
    return mm
