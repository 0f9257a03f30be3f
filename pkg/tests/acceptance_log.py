"""Collects one pass/fail line per acceptance criterion for the terminal summary."""

import functools

LINES = []


def criterion(number, title):
    """Decorate a test returning (passed, detail); records and prints its verdict line."""

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kw):
            try:
                passed, detail = fn(*args, **kw)
            except Exception as exc:
                passed, detail = False, f"{type(exc).__name__}: {exc}"
                _emit(number, title, passed, detail)
                raise
            _emit(number, title, passed, detail)
            assert passed, detail

        return run

    return wrap


def _emit(number, title, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} {title}: {detail}"
    LINES.append((number, line))
    print(line)
