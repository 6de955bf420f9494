"""Continued fractions of high-precision reals.

Partial quotients are extracted from an enclosure [x - r, x + r]: the
Euclidean expansions of both rational endpoints are run in lockstep and only
their common prefix is emitted, so every quotient holds for every real in the
enclosure. A second expansion at doubled precision must reproduce the prefix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import mpmath
from mpmath import mp, mpf

from .precision import DEFAULT_PRECISION, ULP_SLACK, PrecisionError, RealValue

# digits -> (value, enclosure radius)
Source = Callable[[int], "tuple[mpf, mpf]"]


def constant(fn: Callable[[], mpf]) -> Source:
    """Wrap an mpmath expression whose only error is rounding."""

    def source(digits: int) -> tuple[mpf, mpf]:
        with mp.workdps(digits):
            x = +fn()
            return x, ULP_SLACK * abs(x) * mpf(10) ** (-digits) + mpf(10) ** (-digits)

    return source


def _fraction_bounds(x: mpf, r: mpf) -> tuple[tuple[int, int], tuple[int, int]]:
    lo, hi = mpmath.fsub(x, r, exact=True), mpmath.fadd(x, r, exact=True)
    out = []
    for v in (lo, hi):
        man, exp = v.man_exp
        man, exp = int(man), int(exp)
        out.append((man << exp, 1) if exp >= 0 else (man, 1 << -exp))
    return out[0], out[1]


def _euclid(num: int, den: int):
    while den:
        a, rem = divmod(num, den)
        yield a, rem != 0
        num, den = den, rem


def _common_quotients(x: mpf, r: mpf) -> list[int]:
    (n1, d1), (n2, d2) = _fraction_bounds(x, r)
    quotients = []
    for (a1, more1), (a2, more2) in zip(_euclid(n1, d1), _euclid(n2, d2)):
        if a1 != a2 or not (more1 and more2):
            break
        quotients.append(int(a1))
    return quotients


def convergents(a: list[int]) -> tuple[list[int], list[int]]:
    p, q = [], []
    p1, p2, q1, q2 = 1, 0, 0, 1
    for ai in a:
        p1, p2 = ai * p1 + p2, p1
        q1, q2 = ai * q1 + q2, q1
        p.append(p1)
        q.append(q1)
    return p, q


@dataclass(frozen=True)
class CFExpansion:
    x: RealValue
    a: tuple[int, ...]
    p: tuple[int, ...]
    q: tuple[int, ...]
    certified: bool
    source: Source | None = field(default=None, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.a)

    def convergent(self, i: int) -> tuple[int, int]:
        return self.p[i], self.q[i]

    def last_index_at_most(self, q_cap: int) -> int:
        """Largest i with q_i <= q_cap."""
        idx = -1
        for i, qi in enumerate(self.q):
            if qi > q_cap:
                return idx
            idx = i
        raise PrecisionError(f"expansion ends before a denominator exceeds {q_cap}")


def _stop_index(a: list[int], q: list[int], n_terms: int | None, q_threshold: int | None, extra: int) -> int | None:
    """Number of quotients required, or None if the prefix is too short."""
    need = 0
    if n_terms is not None:
        need = n_terms
    if q_threshold is not None:
        hit = next((i for i, qi in enumerate(q) if qi > q_threshold), None)
        if hit is None:
            return None
        need = max(need, hit + 1 + extra)
    return need if need <= len(a) else None


def expand(
    source: Source,
    precision_digits: int = DEFAULT_PRECISION,
    *,
    n_terms: int | None = None,
    q_threshold: int | None = None,
    extra_terms: int = 0,
    certify: bool = True,
) -> CFExpansion:
    """Partial quotients of the real given by ``source``.

    Stops after ``n_terms`` quotients, or ``extra_terms`` past the first
    denominator exceeding ``q_threshold``, whichever needs more.
    """
    if n_terms is None and q_threshold is None:
        raise ValueError("expand needs n_terms or q_threshold")
    with mp.workdps(precision_digits):
        x, r = source(precision_digits)
        a = _common_quotients(x, r)
    p, q = convergents(a)
    need = _stop_index(a, q, n_terms, q_threshold, extra_terms)
    if need is None:
        raise PrecisionError(
            f"precision {precision_digits} exhausted after {len(a)} certified quotients"
        )
    a, p, q = a[:need], p[:need], q[:need]
    if certify:
        with mp.workdps(2 * precision_digits):
            x2, r2 = source(2 * precision_digits)
            a2 = _common_quotients(x2, r2)
        if a2[:need] != a:
            raise PrecisionError("partial quotients changed under doubled precision")
    return CFExpansion(
        RealValue(x, precision_digits), tuple(a), tuple(p), tuple(q), certify, source
    )


def max_partial_quotient(cf: CFExpansion, i_max: int) -> int:
    if i_max + 1 > len(cf.a):
        raise IndexError(f"expansion has {len(cf.a)} quotients, need {i_max + 1}")
    return max(cf.a[: i_max + 1])


def first_convergent_exceeding(cf: CFExpansion, threshold: int) -> tuple[int, int, int]:
    """(i, p_i, q_i) for the smallest i with q_i > threshold, extending if needed."""
    for i, qi in enumerate(cf.q):
        if qi > threshold:
            return i, cf.p[i], qi
    if cf.source is None:
        raise PrecisionError("expansion too short and no source to extend it")
    longer = expand(cf.source, cf.x.precision_digits, q_threshold=threshold, certify=cf.certified)
    return first_convergent_exceeding(longer, threshold)


@dataclass(frozen=True)
class LegendreBound:
    """base^X < max(coeff * (a_max + 2) * q_cap, 2 * coeff * q_cap)."""

    a_max: int
    index_range: tuple[int, int]
    convergent_branch: float
    complementary_branch: float

    @property
    def exponent_bound(self) -> float:
        return max(self.convergent_branch, self.complementary_branch)

    @property
    def cap(self) -> int:
        """Smallest integer strictly above the exponent bound."""
        return math.floor(self.exponent_bound) + 1


def legendre_bound(
    cf: CFExpansion,
    q_cap: int,
    rhs_coeff,
    base,
    a_max: int | None = None,
) -> LegendreBound:
    """Exponent bound from |x - p/q| < coeff / (q * base^X) with q <= q_cap.

    If coeff / (q base^X) < 1/(2 q^2), p/q is a convergent p_i/q_i and
    1/((a_{i+1} + 2) q^2) < |x - p/q|; otherwise base^X <= 2 coeff q.
    a_max defaults to the largest quotient up to one past the last q_i <= q_cap.
    """
    last = cf.last_index_at_most(q_cap)
    if a_max is None:
        a_max = max_partial_quotient(cf, last + 1)
    with mp.workdps(50):
        coeff = mpf(rhs_coeff.value if isinstance(rhs_coeff, RealValue) else rhs_coeff)
        lb = mpmath.log(mpf(base.value if isinstance(base, RealValue) else base))
        main = mpmath.log(coeff * (a_max + 2) * q_cap) / lb
        comp = mpmath.log(2 * coeff * q_cap) / lb
        return LegendreBound(a_max, (0, last + 1), float(main), float(comp))
