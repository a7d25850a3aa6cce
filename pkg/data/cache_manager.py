import json
import logging
from functools import lru_cache
from typing import Any

import redis

from config import settings


class CacheManager:
    """Redis-backed cache for computed survey data.

    Without a URL the manager is disabled: every lookup misses and nothing is
    stored. Redis errors never fail a computation; they are logged, counted,
    and the value is recomputed by the caller.
    """

    def __init__(self, url: str | None = None, client: redis.Redis | None = None):
        self.logger = logging.getLogger(__name__)
        self._stats = {'hits': 0, 'misses': 0, 'errors': 0}
        if client is not None:
            self._client = client
        else:
            url = settings.REDIS_URL if url is None else url
            self._client = redis.from_url(url, decode_responses=True) if url else None

    @property
    def enabled(self) -> bool:
        return self._client is not None

    def get(self, key: str) -> Any | None:
        """Get a value from cache.

        Args:
            key: Cache key

        Returns:
            Cached value or None if not found, expired, disabled or unreachable
        """
        if not self.enabled:
            return None
        try:
            value = self._client.get(key)
        except redis.RedisError as e:
            self._stats['errors'] += 1
            self.logger.warning(f"Cache read failed for {key}: {e}")
            return None
        if value is None:
            self._stats['misses'] += 1
            return None
        self._stats['hits'] += 1
        try:
            return json.loads(value)
        except json.JSONDecodeError:
            return value

    def set(self, key: str, value: Any, ttl: int) -> bool:
        """Set a value in cache with expiration.

        Args:
            key: Cache key
            value: Value to cache (will be JSON serialized)
            ttl: Time to live in seconds

        Returns:
            True if stored
        """
        if not self.enabled:
            return False
        serialized = json.dumps(value) if not isinstance(value, str) else value
        try:
            return bool(self._client.setex(key, ttl, serialized))
        except redis.RedisError as e:
            self._stats['errors'] += 1
            self.logger.warning(f"Cache write failed for {key}: {e}")
            return False

    def get_stats(self) -> dict:
        """Get cache statistics.

        Returns:
            Dictionary with enabled, hits, misses, errors and hit_rate
        """
        total = self._stats['hits'] + self._stats['misses']
        hit_rate = self._stats['hits'] / total if total > 0 else 0.0
        return {
            'enabled': self.enabled,
            'hits': self._stats['hits'],
            'misses': self._stats['misses'],
            'errors': self._stats['errors'],
            'hit_rate': hit_rate,
        }

    def health_check(self) -> bool:
        """Check if Redis connection is healthy.

        Returns:
            True if Redis is responding, False if unreachable or disabled
        """
        if not self.enabled:
            return False
        try:
            return bool(self._client.ping())
        except redis.RedisError:
            return False


def record_key(p: int, g: int) -> str:
    return f"expcycle:record:{p}:{g}"


# Lazy singleton - don't instantiate at import time
@lru_cache(maxsize=1)
def get_cache() -> CacheManager:
    """Get the shared CacheManager instance."""
    return CacheManager()
