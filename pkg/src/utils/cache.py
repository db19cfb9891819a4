"""
Content-keyed on-disk cache for expensive artifacts (effective Hamiltonian tables)

Keys are MD5 digests of a canonical JSON rendering of the inputs, so the same
force descriptor and numerical parameters always map to the same file name.
"""
import hashlib
import json
import logging
import shutil
from pathlib import Path
from typing import Any, Optional

import numpy as np

logger = logging.getLogger(__name__)


def _canonical(value: Any) -> Any:
    """JSON-ready view of numpy scalars, arrays and tuples"""
    if isinstance(value, np.ndarray):
        return [_canonical(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return _canonical(value.item())
    if isinstance(value, (list, tuple)):
        return [_canonical(v) for v in value]
    if isinstance(value, dict):
        return {str(k): _canonical(v) for k, v in value.items()}
    if isinstance(value, float):
        # repr keeps every digit; 0.1 and 0.1000000001 must not collide
        return repr(value)
    return value


def get_cache_key(*args, **kwargs) -> str:
    """
    MD5 digest of the canonical JSON form of the arguments.

    Args:
        *args: Positional parts of the key
        **kwargs: Named parts of the key (order does not matter)

    Returns:
        32-character hex string
    """
    document = {"args": _canonical(list(args)), "kwargs": _canonical(kwargs)}
    payload = json.dumps(document, sort_keys=True, separators=(",", ":"))
    return hashlib.md5(payload.encode("utf-8")).hexdigest()


def get_cached_file(cache_dir: Path, cache_key: str, extension: str = "") -> Optional[Path]:
    """Path of `<cache_key><extension>` in cache_dir when it exists"""
    cached = Path(cache_dir) / f"{cache_key}{extension}"
    return cached if cached.is_file() else None


def cache_file(source_path: Path, cache_dir: Path, cache_key: str, extension: str = "") -> Path:
    """
    Copy a freshly written artifact into the cache.

    Args:
        source_path: File to copy
        cache_dir: Cache directory, created on demand
        cache_key: Key from get_cache_key
        extension: Suffix such as ".csv"

    Returns:
        Path of the cached copy
    """
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    cached = cache_dir / f"{cache_key}{extension}"
    shutil.copy2(source_path, cached)
    logger.debug(f"cached {Path(source_path).name} as {cached.name}")
    return cached


def cleanup_cache(cache_dir: Path, keep_latest: int = 50) -> int:
    """
    Delete all but the newest `keep_latest` cached files.

    Returns:
        Number of files deleted
    """
    cache_dir = Path(cache_dir)
    if not cache_dir.exists():
        return 0

    # Newest first; ties broken by name
    files = sorted(
        (p for p in cache_dir.iterdir() if p.is_file()),
        key=lambda p: (-p.stat().st_mtime, p.name),
    )

    deleted = 0
    for stale in files[keep_latest:]:
        try:
            stale.unlink()
            deleted += 1
        except OSError as e:
            logger.warning(f"could not remove cached file {stale.name}: {e}")
    if deleted:
        logger.info(f"cache cleanup removed {deleted} files from {cache_dir}")
    return deleted
