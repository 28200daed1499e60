import time

from abelint.chebyshev import region_scan
from abelint.parallel import map_ordered, thread_count


def test_thread_count_from_env(monkeypatch):
    monkeypatch.setenv("ABELINT_THREADS", "3")
    assert thread_count() == 3
    monkeypatch.setenv("ABELINT_THREADS", "0")
    assert thread_count() == 1
    monkeypatch.setenv("ABELINT_THREADS", "lots")
    assert thread_count() >= 1


def test_map_keeps_order():
    def slow(x):
        time.sleep(0.001 * (5 - x % 5))
        return x * x

    assert map_ordered(slow, range(20), threads=4) == [x * x for x in range(20)]


def test_scan_independent_of_thread_count(monkeypatch):
    rows = []
    for n in ("1", "4"):
        monkeypatch.setenv("ABELINT_THREADS", n)
        rows.append([r.csv_row() for r in region_scan("omega_1", 3, seed=11, grid_size=150).rows])
    assert rows[0] == rows[1]
