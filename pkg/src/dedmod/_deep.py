"""Run deeply recursive kernel code on a thread with a large stack."""

from __future__ import annotations

import sys
import threading
from functools import wraps

_STACK = 512 * 1024 * 1024
_LIMIT = 400_000
_local = threading.local()


def run_deep(fn, *args, **kwargs):
    if getattr(_local, "deep", False):
        return fn(*args, **kwargs)
    box: dict = {}

    def target():
        _local.deep = True
        try:
            box["value"] = fn(*args, **kwargs)
        except BaseException as e:  # re-raised in the caller
            box["error"] = e

    old_stack = threading.stack_size()
    old_limit = sys.getrecursionlimit()
    threading.stack_size(_STACK)
    sys.setrecursionlimit(max(old_limit, _LIMIT))
    try:
        t = threading.Thread(target=target, name="dedmod-deep")
        t.start()
        t.join()
    finally:
        threading.stack_size(old_stack)
        sys.setrecursionlimit(old_limit)
    if "error" in box:
        raise box["error"]
    return box["value"]


def deep(fn):
    """Decorator form of :func:`run_deep`."""

    @wraps(fn)
    def wrapper(*args, **kwargs):
        return run_deep(fn, *args, **kwargs)

    return wrapper
