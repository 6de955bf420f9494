"""Exact k-generalized Fibonacci numbers and decimal concatenation."""

from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache


class SequenceIndexError(IndexError):
    pass


class KSequence:
    """F_n^{(k)} for one k, extended on demand.

    Terms are stored from index 2-k upward, so ``self._terms[n + k - 2]``
    holds F_n. A running window sum keeps each extension O(1) big-int ops.
    """

    def __init__(self, k: int):
        if k < 2:
            raise ValueError(f"k must be >= 2, got {k}")
        self.k = k
        self._terms: list[int] = [0] * (k - 1) + [1]
        self._window = 1
        self._lock = threading.Lock()

    @property
    def top(self) -> int:
        return len(self._terms) - self.k + 1

    def _extend_to(self, n: int) -> None:
        with self._lock:
            terms, k = self._terms, self.k
            while self.top < n:
                nxt = self._window
                self._window += nxt - terms[-k]
                terms.append(nxt)

    def __getitem__(self, n: int) -> int:
        if n < 2 - self.k:
            raise SequenceIndexError(f"index {n} below 2-k={2 - self.k}")
        if n > self.top:
            self._extend_to(n)
        return self._terms[n + self.k - 2]

    def upto(self, n: int) -> list[int]:
        """[F_0, F_1, ..., F_n]."""
        self[n]
        return self._terms[self.k - 2 : n + self.k - 1]

    def index_of(self, v: int) -> int | None:
        if v < 1:
            raise ValueError("index_of expects v >= 1")
        n = 1
        while True:
            t = self[n]
            if t == v:
                return n
            if t > v:
                return None
            n += 1


@lru_cache(maxsize=None)
def sequence(k: int) -> KSequence:
    return KSequence(k)


def term(k: int, n: int) -> int:
    return sequence(k)[n]


def index_of(k: int, v: int) -> int | None:
    """Smallest n >= 1 with F_n^{(k)} == v, or None."""
    return sequence(k).index_of(v)


def digits10(x: int) -> int:
    if x <= 0:
        raise ValueError(f"digits10 expects a positive integer, got {x}")
    return len(str(x))


def concat_value(a: int, b: int) -> int:
    if a < 1 or b < 1:
        raise ValueError("concat_value expects positive integers")
    return a * 10 ** digits10(b) + b


@dataclass(frozen=True, order=True)
class ConcatSolution:
    """F_n = F_m * 10**d + F_l for one k."""

    k: int
    n: int
    m: int
    l: int  # noqa: E741
    d: int
    value: int
    canonical: bool = True

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (self.k, self.n, self.m, self.l)

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "n": self.n,
            "m": self.m,
            "l": self.l,
            "d": self.d,
            "value": str(self.value),
            "canonical": self.canonical,
        }
