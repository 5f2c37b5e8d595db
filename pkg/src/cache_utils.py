"""Simple caching utilities for enumerated frames.

Provides file-based caching to avoid re-enumerating identical frame classes.
"""

import os
import json
import hashlib
import logging
from typing import List, Optional

from src import config
from src.frame import TwoFrame
from src.io_utils import frame_from_dict, frame_to_dict

logger = logging.getLogger(__name__)


def _get_cache_dir() -> str:
    """Get the cache directory, creating it if needed."""
    cache_dir = config.CACHE_DIR
    if not os.path.exists(cache_dir):
        os.makedirs(cache_dir, exist_ok=True)
    return cache_dir


def _build_cache_key(logic: str, size: int, modulo_iso: bool) -> str:
    """Build a stable cache key from the enumeration request.

    Args:
        logic: Logic id as text, e.g. "MGrzB[2]"
        size: Carrier size
        modulo_iso: Whether isomorphic duplicates were dropped

    Returns:
        Stable cache key string
    """
    raw = f"{logic}|{size}|{'iso' if modulo_iso else 'labelled'}"
    digest = hashlib.md5(raw.encode('utf-8')).hexdigest()
    return f"frames_{digest}"


def _get_cache_path(cache_key: str) -> str:
    """Get the full file path for a cache key."""
    cache_dir = _get_cache_dir()
    return os.path.join(cache_dir, f"{cache_key}.json")


def get_cached_frames(logic: str, size: int, modulo_iso: bool) -> Optional[List[TwoFrame]]:
    """Retrieve cached frames if available.

    Returns:
        Cached frame list or None if not found/disabled
    """
    if not config.CACHE_ENABLED:
        return None

    try:
        cache_key = _build_cache_key(logic, size, modulo_iso)
        cache_path = _get_cache_path(cache_key)

        if not os.path.exists(cache_path):
            return None

        with open(cache_path, 'r', encoding='utf-8') as f:
            cached_data = json.load(f)

        if not isinstance(cached_data, dict) or not isinstance(cached_data.get('frames'), list):
            logger.warning("[cache] Invalid cache structure for key %s", cache_key)
            return None

        frames = [frame_from_dict(item) for item in cached_data['frames']]
        logger.info("[cache] Cache hit for key %s – returning %d cached frames", cache_key, len(frames))
        return frames

    except Exception as e:
        logger.warning("[cache] Error reading cache: %s", e)
        return None


def save_frames_to_cache(frames: List[TwoFrame], logic: str, size: int, modulo_iso: bool) -> None:
    """Save an enumeration result to cache."""
    if not config.CACHE_ENABLED:
        return

    try:
        cache_key = _build_cache_key(logic, size, modulo_iso)
        cache_path = _get_cache_path(cache_key)

        cache_data = {
            'cache_key': cache_key,
            'logic': logic,
            'size': size,
            'modulo_iso': modulo_iso,
            'frames_count': len(frames),
            'frames': [frame_to_dict(frame) for frame in frames],
        }

        with open(cache_path, 'w', encoding='utf-8') as f:
            json.dump(cache_data, f, indent=2, ensure_ascii=False)

        logger.info("[cache] Saved %d frames to cache with key %s", len(frames), cache_key)

    except Exception as e:
        logger.warning("[cache] Error saving to cache: %s", e)


def clear_cache() -> None:
    """Clear all cached files."""
    try:
        cache_dir = _get_cache_dir()
        cache_files = [f for f in os.listdir(cache_dir) if f.endswith('.json')]

        for cache_file in cache_files:
            os.remove(os.path.join(cache_dir, cache_file))

        logger.info("[cache] Cleared %d cache files", len(cache_files))

    except Exception as e:
        logger.warning("[cache] Error clearing cache: %s", e)
