"""Dominant root of the k-bonacci characteristic polynomial and related values.

psi_k(t) = t^k - t^(k-1) - ... - 1. For t != 1,
(t - 1) * psi_k(t) = t^(k+1) - 2 t^k + 1 = t^k (t - 2) + 1, which is what
gets evaluated: it has the same sign as psi_k on (1, 2) and costs one power.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import mpmath
from mpmath import mp, mpf

from .kfib import sequence
from .precision import DEFAULT_PRECISION, PrecisionError, RealValue


class RootCertificationError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CharPoly:
    k: int

    @property
    def coefficients(self) -> tuple[int, ...]:
        """Leading coefficient first."""
        return (1,) + (-1,) * self.k

    def __call__(self, t):
        return sum(c * t ** (self.k - i) for i, c in enumerate(self.coefficients))


@dataclass(frozen=True)
class DominantRoot:
    k: int
    alpha: RealValue
    enclosure_radius: mpf

    @property
    def precision_digits(self) -> int:
        return self.alpha.precision_digits


@dataclass(frozen=True)
class FkValue:
    k: int
    value: RealValue
    enclosure_radius: mpf


def _guard_digits(k: int) -> int:
    # t^k near 2^k cancels against 1; keep enough digits to see the residue.
    return int(k * 0.30103) + 30


def _g(t: mpf, k: int) -> mpf:
    return t**k * (t - 2) + 1


@lru_cache(maxsize=None)
def dominant_root(k: int, precision_digits: int = DEFAULT_PRECISION) -> DominantRoot:
    """Certified enclosure of the unique root of psi_k in (2(1 - 2^-k), 2)."""
    if k < 2:
        raise ValueError("k must be >= 2")
    # alpha sits within 2^-k of 2; the enclosure must resolve that gap.
    precision_digits = max(precision_digits, int(k * 0.30103) + 20)
    work = precision_digits + _guard_digits(k)
    with mp.workdps(work):
        lo = 2 * (1 - mpf(2) ** (-k))
        hi = mpf(2)
        if not (_g(lo, k) < 0 < _g(hi, k)):
            raise RootCertificationError(f"no sign change on the seed interval for k={k}")
        # Bisection until Newton is safely in its quadratic basin.
        for _ in range(60):
            mid = (lo + hi) / 2
            if _g(mid, k) < 0:
                lo = mid
            else:
                hi = mid
        t = (lo + hi) / 2
        tol = mpf(10) ** (-(precision_digits + 5))
        for _ in range(200):
            gt = _g(t, k)
            dg = (k + 1) * t**k - 2 * k * t ** (k - 1)
            step = gt / dg
            t -= step
            if abs(step) < tol:
                break
        else:
            raise RootCertificationError(f"Newton did not converge for k={k}")
        radius = mpf(10) ** (-(precision_digits - 10))
        if not (_g(t - radius, k) < 0 < _g(t + radius, k)):
            raise RootCertificationError(f"sign bracket failed around alpha({k})")
        if not (2 * (1 - mpf(2) ** (-k)) < t - radius and t + radius < 2):
            raise RootCertificationError(f"alpha({k}) outside (2(1-2^-k), 2)")
    with mp.workdps(precision_digits):
        return DominantRoot(k, RealValue(+t, precision_digits), +radius)


@lru_cache(maxsize=None)
def log_alpha(k: int, precision_digits: int = DEFAULT_PRECISION) -> RealValue:
    root = dominant_root(k, precision_digits)
    digits = root.precision_digits
    with mp.workdps(digits):
        return RealValue(mpmath.log(root.alpha.value), digits)


def fk(t: mpf, k: int) -> mpf:
    return (t - 1) / (2 + (k + 1) * (t - 2))


@lru_cache(maxsize=None)
def fk_at_alpha(k: int, precision_digits: int = DEFAULT_PRECISION) -> FkValue:
    """f_k(alpha) with an enclosure, asserted to lie in (0.5, 0.75)."""
    digits = precision_digits
    for _ in range(2):
        root = dominant_root(k, digits)
        digits = root.precision_digits
        with mp.workdps(digits + 20):
            a, r = root.alpha.value, root.enclosure_radius
            # f_k is monotone on the enclosure (its pole sits at 2 - 2/(k+1) < alpha).
            ends = sorted([fk(a - r, k), fk(a + r, k)])
            value = fk(a, k)
            rad = max(value - ends[0], ends[1] - value)
            if ends[0] > mpf("0.5") and ends[1] < mpf("0.75"):
                with mp.workdps(digits):
                    return FkValue(k, RealValue(+value, digits), rad)
        digits *= 2
    raise PrecisionError(f"f_k(alpha) enclosure for k={k} straddles 0.5 or 0.75")


@dataclass(frozen=True)
class HeightBounds:
    h_alpha: RealValue
    h_fk_bound: RealValue


def height_bounds(k: int, precision_digits: int = DEFAULT_PRECISION) -> HeightBounds:
    """h(alpha) = log(alpha)/k (alpha is a unit of degree k) and the 3 log k bound on h(f_k(alpha))."""
    la = log_alpha(k, precision_digits)
    with mp.workdps(precision_digits):
        return HeightBounds(
            RealValue(la.value / k, precision_digits),
            RealValue(3 * mpmath.log(k), precision_digits),
        )


def _alpha_power_range(k: int, e: int, digits: int) -> tuple[mpf, mpf]:
    """(min, max) of alpha^e over the root enclosure, widened by rounding slack."""
    if e == 0:
        return mpf(1), mpf(1)
    root = dominant_root(k, digits)
    a, r = root.alpha.value, root.enclosure_radius
    lo, hi = sorted([(a - r) ** e, (a + r) ** e])
    slack = mpf(10) ** (-digits)
    return lo * (1 - slack), hi * (1 + slack)


def growth_check(k: int, n: int, precision_digits: int = 200) -> bool:
    """alpha^(n-2) <= F_n <= alpha^(n-1) for every alpha in the enclosure."""
    if n < 1:
        raise ValueError("growth_check needs n >= 1")
    f = sequence(k)[n]
    with mp.workdps(precision_digits + 10):
        _, lower_max = _alpha_power_range(k, n - 2, precision_digits)
        upper_min, _ = _alpha_power_range(k, n - 1, precision_digits)
        return bool(lower_max <= f <= upper_min)


def dominance_check(k: int, n_max: int, precision_digits: int = 200) -> bool:
    """|F_n - f_k(alpha) alpha^(n-1)| < 1/2 for every 1 <= n <= n_max."""
    if k < 2 or n_max < 2:
        raise ValueError("dominance_check needs k >= 2 and n_max >= 2")
    seq = sequence(k)
    digits = precision_digits
    f = fk_at_alpha(k, digits)
    root = dominant_root(k, digits)
    with mp.workdps(digits + 10):
        a, ra = root.alpha.value, root.enclosure_radius
        c, rc = f.value.value, f.enclosure_radius
        half = mpf(1) / 2
        power = mpf(1)
        for n in range(1, n_max + 1):
            if n > 1:
                power *= a
            # Enclosure of f_k(alpha) alpha^(n-1): first-order propagation plus rounding slack.
            approx = c * power
            err = rc * power + c * (n - 1) * ra * power / a + abs(approx) * mpf(10) ** (-digits)
            dev = abs(seq[n] - approx)
            if dev + err >= half:
                if dev - err < half:
                    raise PrecisionError(f"dominance undecided at k={k}, n={n}")
                return False
    return True


def nondominant_roots(k: int, digits: int = 30) -> list:
    """All roots of psi_k other than alpha (diagnostic, small k only)."""
    if k > 20:
        raise ValueError("nondominant_roots is a diagnostic for k <= 20")
    with mp.workdps(digits):
        roots = mpmath.polyroots(CharPoly(k).coefficients, maxsteps=200, extraprec=4 * digits)
        alpha = dominant_root(k, max(digits, 50)).alpha.value
        return [z for z in roots if abs(z - alpha) > mpf(10) ** (-digits // 2)]
