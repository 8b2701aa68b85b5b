"""
Caching Utilities for PhiGamma

This module wraps cachetools LRU caches behind a decorator so pure kernel
functions with hashable arguments can be memoized and reset as a group.
"""
import functools
import logging
from typing import Callable, Dict, TypeVar

from cachetools import LRUCache

# Import configuration
from config.settings import CACHE_SIZE, ENABLE_CACHE

# Set up logging
logger = logging.getLogger(__name__)

# Type variables for generics
R = TypeVar('R')

_registry: Dict[str, LRUCache] = {}


def memoized(name: str) -> Callable[[Callable[..., R]], Callable[..., R]]:
    """
    Decorator to memoize a pure function in a named LRU cache.

    Args:
        name (str): Registry name of the cache

    Returns:
        Callable: Decorated function
    """
    def decorator(func: Callable[..., R]) -> Callable[..., R]:
        if not ENABLE_CACHE:
            return func

        cache = _registry.setdefault(name, LRUCache(maxsize=CACHE_SIZE))

        @functools.wraps(func)
        def wrapper(*args, **kwargs) -> R:
            key = (args, tuple(sorted(kwargs.items())))
            try:
                return cache[key]
            except KeyError:
                logger.debug(f"cache miss in {name}")
            value = func(*args, **kwargs)
            cache[key] = value
            return value

        return wrapper

    return decorator


def clear_caches() -> None:
    """Empty every registered cache."""
    for cache in _registry.values():
        cache.clear()


def cache_sizes() -> Dict[str, int]:
    """Return the number of stored entries per cache."""
    return {name: len(cache) for name, cache in _registry.items()}
