"""
Tests for formatting helpers and the table cache
"""
import os

import numpy as np
import pytest

from src.utils import (
    cache_file,
    cleanup_cache,
    format_duration,
    format_eps,
    format_float,
    format_vector,
    get_cache_key,
    get_cached_file,
)


@pytest.mark.parametrize("eps, expected", [
    (1 / 64, "1/64"),
    (0.25, "1/4"),
    (0.3, "0.3"),
    (1.0, "1"),
])
def test_format_eps(eps, expected):
    assert format_eps(eps) == expected


def test_format_float():
    assert format_float(0) == "0"
    assert format_float(0.5) == "0.5"
    assert format_float(1.23456e-5) == "1.23456e-05"
    assert format_vector([0.5, 1.0]) == "(0.5, 1)"


@pytest.mark.parametrize("seconds, expected", [
    (42.3, "42.3s"),
    (135, "2m 15s"),
    (3725, "1h 02m"),
])
def test_format_duration(seconds, expected):
    assert format_duration(seconds) == expected


class TestCacheKey:
    def test_deterministic(self):
        a = get_cache_key("sinusoid", P=3.0, samples=13, lambdas=[0.01, 0.005])
        b = get_cache_key("sinusoid", lambdas=[0.01, 0.005], samples=13, P=3.0)
        assert a == b
        assert len(a) == 32

    def test_numpy_values_match_python_values(self):
        assert get_cache_key(np.float64(0.5), np.array([1.0, 2.0])) == get_cache_key(0.5, [1.0, 2.0])

    def test_close_floats_differ(self):
        assert get_cache_key(0.1) != get_cache_key(0.1000000001)
        assert get_cache_key(P=3.0) != get_cache_key(P=3.5)


def test_cache_roundtrip(tmp_path):
    source = tmp_path / "table.csv"
    source.write_text("p,F_bar\n0,1\n")
    cache_dir = tmp_path / "cache"
    key = get_cache_key("table")

    assert get_cached_file(cache_dir, key, ".csv") is None
    cached = cache_file(source, cache_dir, key, ".csv")
    assert get_cached_file(cache_dir, key, ".csv") == cached
    assert cached.read_text() == source.read_text()


def test_cleanup_keeps_newest(tmp_path):
    for i in range(5):
        path = tmp_path / f"entry{i}.csv"
        path.write_text(str(i))
        os.utime(path, (1_000_000 + i, 1_000_000 + i))

    assert cleanup_cache(tmp_path, keep_latest=2) == 3
    assert sorted(p.name for p in tmp_path.iterdir()) == ["entry3.csv", "entry4.csv"]
    assert cleanup_cache(tmp_path / "missing") == 0
