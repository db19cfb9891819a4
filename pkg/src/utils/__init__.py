"""
Utility modules for the homogenization lab
"""
from .formatting import format_duration, format_eps, format_float, format_vector
from .cache import get_cache_key, get_cached_file, cache_file, cleanup_cache

__all__ = [
    "format_duration",
    "format_eps",
    "format_float",
    "format_vector",
    "get_cache_key",
    "get_cached_file",
    "cache_file",
    "cleanup_cache",
]
