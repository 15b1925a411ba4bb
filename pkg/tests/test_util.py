import pytest

from gevrey_evp.util import ordered_map, worker_count


def test_worker_count_default_serial(monkeypatch):
    monkeypatch.delenv("GEVREY_EVP_THREADS", raising=False)
    assert worker_count() == 1


def test_worker_count_auto_and_explicit(monkeypatch):
    monkeypatch.setenv("GEVREY_EVP_THREADS", "0")
    assert worker_count() >= 1
    monkeypatch.setenv("GEVREY_EVP_THREADS", "3")
    assert worker_count() == 3
    monkeypatch.setenv("GEVREY_EVP_THREADS", "soon")
    with pytest.raises(ValueError):
        worker_count()
    monkeypatch.setenv("GEVREY_EVP_THREADS", "-1")
    with pytest.raises(ValueError):
        worker_count()


def test_ordered_map_pool_size_does_not_change_results(monkeypatch):
    items = list(range(40))
    fn = lambda x: x * x - 1.5
    monkeypatch.delenv("GEVREY_EVP_THREADS", raising=False)
    serial = ordered_map(fn, items)
    monkeypatch.setenv("GEVREY_EVP_THREADS", "4")
    threaded = ordered_map(fn, items)
    assert serial == threaded
