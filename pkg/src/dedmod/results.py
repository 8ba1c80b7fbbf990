"""Outcome values shared by the term, proposition and proof normalizers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class Normal:
    value: Any
    steps: int = 0
    trace: tuple = field(default=(), repr=False)

    normal = True


@dataclass(frozen=True)
class FuelExhausted:
    value: Any
    steps: int = 0
    trace: tuple = field(default=(), repr=False)

    normal = False


class OutOfFuel(Exception):
    pass


class Fuel:
    """Mutable step budget threaded through one normalization call."""

    __slots__ = ("limit", "used")

    def __init__(self, limit: int):
        self.limit = limit
        self.used = 0

    def spend(self, n: int = 1):
        self.used += n
        if self.used > self.limit:
            raise OutOfFuel()
