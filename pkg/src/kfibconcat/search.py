"""Exhaustive search for F_n = F_m * 10**d + F_l with d = digits(F_l)."""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

from .kfib import ConcatSolution, digits10, sequence

# n - (m + l) lies strictly between these offsets for every solution.
WINDOW_LOW = -3
WINDOW_HIGH = 6


@dataclass(frozen=True)
class SearchRange:
    k_min: int = 3
    k_max: int = 420
    m_max: int = 199
    l_max: int = 199
    m_min: int = 1
    l_min: int = 1

    def __post_init__(self) -> None:
        if self.k_min < 2:
            raise ValueError("k_min must be >= 2")
        if self.k_max < self.k_min:
            raise ValueError("k_max < k_min")
        if self.m_min < 1 or self.l_min < 1:
            raise ValueError("m and l start at 1 (F_0 = 0 has no digits)")
        if self.m_max < self.m_min or self.l_max < self.l_min:
            raise ValueError("empty m or l range")

    @property
    def ks(self) -> range:
        return range(self.k_min, self.k_max + 1)


def _is_canonical(m: int, l: int) -> bool:  # noqa: E741
    # F_1 = F_2 = 1; index 2 is the duplicate spelling.
    return m != 2 and l != 2


def _search_k(k: int, m_lo: int, m_hi: int, l_lo: int, l_hi: int, exhaustive: bool) -> list[ConcatSolution]:
    seq = sequence(k)
    seq[m_hi + l_hi + WINDOW_HIGH]
    out = []
    for m in range(m_lo, m_hi + 1):
        fm = seq[m]
        for l in range(l_lo, l_hi + 1):  # noqa: E741
            fl = seq[l]
            d = digits10(fl)
            v = fm * 10**d + fl
            if exhaustive:
                n = seq.index_of(v)
                hits = [] if n is None else [n]
            else:
                hits = [n for n in range(max(1, m + l + WINDOW_LOW + 1), m + l + WINDOW_HIGH) if seq[n] == v]
            for n in hits:
                out.append(ConcatSolution(k, n, m, l, d, v, _is_canonical(m, l)))
    return out


def _search_k_args(args) -> list[ConcatSolution]:
    return _search_k(*args)


def brute_force(rng: SearchRange, *, exhaustive: bool = False, workers: int = 1) -> list[ConcatSolution]:
    """All solutions with k, m, l in range, sorted by (k, n, m, l).

    The default mode only tests n in the index window around m + l; with
    ``exhaustive`` the concatenation is located by walking the sequence.
    """
    jobs = [(k, rng.m_min, rng.m_max, rng.l_min, rng.l_max, exhaustive) for k in rng.ks]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_search_k_args, jobs))
    else:
        parts = [_search_k_args(j) for j in jobs]
    found = [s for part in parts for s in part]
    return sorted(found, key=lambda s: (s.k, s.n, s.m, s.l))


def windowed_search(k: int, m_max: int, n_max: int) -> list[ConcatSolution]:
    """Solutions at one k with m <= m_max and n <= n_max (so l < n_max)."""
    found = _search_k(k, 1, m_max, 1, max(1, n_max - 1), exhaustive=False)
    return sorted((s for s in found if s.n <= n_max), key=lambda s: (s.n, s.m, s.l))


class Verdict(NamedTuple):
    ok: bool
    reason: str

    def __bool__(self) -> bool:
        return self.ok


def verify_solution(s: ConcatSolution) -> Verdict:
    """Exact check of the identity plus the digit and index windows."""
    if s.k < 2 or min(s.n, s.m, s.l) < 1:
        return Verdict(False, "index_out_of_range")
    seq = sequence(s.k)
    fn, fm, fl = seq[s.n], seq[s.m], seq[s.l]
    if s.d != digits10(fl):
        return Verdict(False, "digit_count_mismatch")
    if fn != fm * 10**s.d + fl:
        return Verdict(False, "identity_fails")
    if s.value != fn:
        return Verdict(False, "value_mismatch")
    if not (s.m + s.l + WINDOW_LOW < s.n < s.m + s.l + WINDOW_HIGH):
        return Verdict(False, "index_window_fails")
    if s.l >= 3 and not (5 * s.d > s.l - 2 and 3 * s.d < s.l + 2):
        return Verdict(False, "digit_window_fails")
    return Verdict(True, "ok")


def power_case_impossible(a_max: int, d_max: int) -> bool:
    """2^a - 1 = 5^d has no solution with a <= a_max, d <= d_max, and the
    other power-of-two branch fails on parity.

    Both are finite exact scans; the unbounded statement rests on the
    primitive-divisor theorem for 2^a - 1.
    """
    if a_max < 1 or d_max < 1:
        raise ValueError("a_max and d_max must be >= 1")
    mersenne = {(1 << a) - 1 for a in range(1, a_max + 1)}
    fives = {5**d for d in range(1, d_max + 1)}
    if mersenne & fives:
        return False
    # 2^e = 2^f 10^d + 1 with e >= 1: left side even, right side odd.
    left = {pow(2, e, 2) for e in range(1, a_max + 1)}
    right = {(pow(2, f, 2) * pow(10, d, 2) + 1) % 2 for f in range(0, a_max + 1) for d in range(1, d_max + 1)}
    return not (left & right)
