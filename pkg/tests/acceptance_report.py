"""Collects one pass/fail line per acceptance criterion for the terminal summary."""
import functools
import time

LINES = {}


def criterion(number: int, title: str, budget: float):
    """Time the wrapped test, record a pass/fail line and enforce the time budget."""
    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kwargs):
            t0 = time.perf_counter()
            try:
                detail = fn(*args, **kwargs)
            except BaseException as e:
                _record(number, title, False, f"{type(e).__name__}: {str(e).splitlines()[0] if str(e) else ''}")
                raise
            elapsed = time.perf_counter() - t0
            ok = elapsed < budget
            _record(number, title, ok, f"{detail}; {elapsed:.1f}s of {budget:g}s")
            assert ok, f"{title} took {elapsed:.1f}s, budget {budget:g}s"
        return wrapper
    return deco


def _record(number, title, ok, detail):
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    LINES[number] = line
    print(line)
