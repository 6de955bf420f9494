"""Matveev lower bounds and the explicit bound chain for n, n - l and k.

The chain is replayed twice over: ``strict=False`` pushes the printed
(rounded-up) constants forward step by step, ``strict=True`` pushes the
tightest values this module can derive. Every printed constant is paired with
the value re-derived from the step before it in a :class:`ConstantCheck`.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import mpmath
from mpmath import mp, mpf

from .kfib import digits10, sequence
from .precision import RealValue

CHAIN_DIGITS = 60


def _rv(x) -> RealValue:
    return RealValue(mpf(x), CHAIN_DIGITS)


@dataclass(frozen=True)
class ConstantCheck:
    """A printed upper-bound constant against the value re-derived for it."""

    name: str
    printed: float
    computed: float
    note: str = ""
    # "upper": the printed value bounds the computed one from above; "lower": from below.
    direction: str = "upper"

    @property
    def holds(self) -> bool:
        if self.direction == "lower":
            return self.computed >= self.printed
        return self.computed <= self.printed

    @property
    def ratio(self) -> float:
        return self.computed / self.printed

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "printed": mpmath.nstr(self.printed, 6),
            "computed": mpmath.nstr(self.computed, 8),
            "ratio": round(self.ratio, 6),
            "direction": self.direction,
            "holds": self.holds,
            "note": self.note,
        }


@dataclass(frozen=True)
class CheckedLemma:
    name: str
    holds: bool

    def to_json(self) -> dict:
        return {"name": self.name, "holds": self.holds}


@dataclass(frozen=True)
class MatveevInstance:
    t: int
    d_F: int
    B: RealValue
    A: tuple[RealValue, ...]

    def __post_init__(self) -> None:
        if self.t not in (2, 3) or len(self.A) != self.t:
            raise ValueError("t must be 2 or 3 with one A_i per logarithm")
        if self.d_F < 1:
            raise ValueError("d_F must be >= 1")
        if float(self.B) < 1:
            raise ValueError("B must be >= 1")
        if any(float(a) < 0.16 for a in self.A):
            raise ValueError("every A_i must be >= 0.16")


def matveev_constant(t: int) -> mpf:
    """C(t) = -1.4 * 30^(t+3) * t^4.5."""
    with mp.workdps(CHAIN_DIGITS):
        return -mpf("1.4") * mpf(30) ** (t + 3) * mpf(t) ** mpf("4.5")


def matveev_exponent(inst: MatveevInstance) -> RealValue:
    """E with |U| > exp(E)."""
    with mp.workdps(CHAIN_DIGITS):
        d = mpf(inst.d_F)
        e = matveev_constant(inst.t) * d**2 * (1 + mpmath.log(d)) * (1 + mpmath.log(inst.B.value))
        for a in inst.A:
            e *= a.value
        return _rv(e)


class GuzmanPreconditionError(ValueError):
    pass


def guzman_invert(e: int, H) -> RealValue:
    """Bound 2^e H (log H)^e on f whenever f / (log f)^e < H."""
    with mp.workdps(CHAIN_DIGITS):
        H = mpf(H.value if isinstance(H, RealValue) else H)
        if e < 1 or H <= (4 * e * e) ** e:
            raise GuzmanPreconditionError(f"need e >= 1 and H > (4e^2)^e, got e={e}, H={H}")
        return _rv(2**e * H * mpmath.log(H) ** e)


def invert_exact(e: int, H) -> mpf:
    """Smallest f* with f/(log f)^e >= H for all f >= f* (f > e^e branch)."""
    with mp.workdps(CHAIN_DIGITS):
        H = mpf(H)
        g = lambda f: f / mpmath.log(f) ** e - H  # noqa: E731
        lo = mpmath.e ** e
        hi = mpf(2) ** e * H * mpmath.log(H) ** e * 2
        while g(hi) < 0:
            hi *= 2
        for _ in range(400):
            mid = (lo + hi) / 2
            if g(mid) < 0:
                lo = mid
            else:
                hi = mid
        return hi


def guzman_scan(e: int, H: float) -> bool:
    """Exhaustive integer check of the Guzman implication for one (e, H).

    Every f in [2, 2B] with f/(log f)^e < H must satisfy f < B, where B is the
    Guzman bound; past 2B the left side is increasing (f > e^e) and already >= H.
    """
    import numpy as np

    # The formula is checked even where H <= (4e^2)^e puts it outside the lemma.
    bound = 2**e * H * np.log(H) ** e
    top = int(2 * bound) + 1
    f = np.arange(2, top + 1, dtype=np.float64)
    premise = f / np.log(f) ** e < H
    if np.any(f[premise] >= bound):
        return False
    return bool(top > np.e**e and top / np.log(top) ** e >= H)


def _log(x) -> mpf:
    return mpmath.log(mpf(x))


# ---------------------------------------------------------------------------
# Small-k chain


PRINTED_SMALL_K = {
    "nl_first_coeff": 7.1e9,
    "n1_coeff": 2.7e12,
    "nl_case_l_le_m": 4.98e11,
    "n_case_l_le_m": 1e12,
    "n1_case_m_lt_l_coeff": 2e22,
    "n_final_coeff": 5.2e26,
}


@dataclass(frozen=True)
class BoundChainResult:
    k: int
    bound_n_minus_l: RealValue
    bound_n: RealValue
    strict: bool
    steps: dict = field(default_factory=dict)
    large_k: dict | None = None

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "strict": self.strict,
            "bound_n_minus_l": self.bound_n_minus_l.nstr(12),
            "bound_n": self.bound_n.nstr(12),
            "steps": {name: mpmath.nstr(v, 12) for name, v in self.steps.items()},
        }


def small_k_coefficients() -> dict[str, mpf]:
    """Coefficients of the small-k chain re-derived from Matveev's constant."""
    with mp.workdps(CHAIN_DIGITS):
        c2, c3 = -matveev_constant(2), -matveev_constant(3)
        log10, log2 = _log(10), _log(2)
        phi = (1 + mpmath.sqrt(5)) / 2
        # n-l from U_1: (1+log k) < 2 log k and (1+log(n-m)) < 2 log(n-m);
        # the log 14 / log alpha term is absorbed at the smallest k=3, log(n-m) >= 1.
        nl_first = 4 * c2 * log10 + _log(14) / mpmath.log(phi) / (27 * _log(3))
        # n-1 from U_2: d_F = k, A_1 = log alpha < log 2, A_2 = k log 10, A_3 = 2k(...).
        n1 = 8 * c3 * log2 * log10 + _log(6) / mpmath.log(phi) / (81 * _log(3) ** 2)
        return {"nl_first_coeff": nl_first, "n1_coeff": n1}


def bound_chain(k: int, strict: bool = False) -> BoundChainResult:
    """Small-k chain: n - l and n bounds in terms of k (k >= 3)."""
    if k < 3:
        raise ValueError("bound_chain needs k >= 3")
    with mp.workdps(CHAIN_DIGITS):
        lk = _log(k)
        if strict:
            co = small_k_coefficients()
            c_nl, c_n1 = co["nl_first_coeff"], co["n1_coeff"]
            H1 = c_nl * k**3 * lk
            nl_le = guzman_invert(1, H1).value
            n_le = 2 * nl_le + 12
            # m < l: (n-l+3) log k absorbs the A_3 bracket; n-l+3 <= c_nl k^3 log k log(n-1) + 3.
            H2 = c_n1 * (c_nl + 3 / (27 * _log(3))) * mpf(k) ** 7 * lk**3
            n_lt = guzman_invert(2, H2).value + 1
        else:
            p = PRINTED_SMALL_K
            nl_le = p["nl_case_l_le_m"] * mpf(k) ** 3 * lk**2
            n_le = p["n_case_l_le_m"] * mpf(k) ** 3 * lk**2
            n_lt = p["n_final_coeff"] * mpf(k) ** 7 * lk**4
            c_nl = mpf(p["nl_first_coeff"])
        bound_n = max(n_le, n_lt)
        # m < l branch: n - l from the U_1 bound with log(n-m) <= log(bound_n).
        nl_lt = c_nl * mpf(k) ** 3 * lk * mpmath.log(bound_n)
        steps = {
            "nl_case_l_le_m": nl_le,
            "n_case_l_le_m": n_le,
            "nl_case_m_lt_l": nl_lt,
            "n_case_m_lt_l": n_lt,
        }
        return BoundChainResult(k, _rv(max(nl_le, nl_lt)), _rv(bound_n), strict, steps)


def n_bound(k, strict: bool = False) -> mpf:
    """Final n bound as a function of (possibly huge, real) k."""
    with mp.workdps(CHAIN_DIGITS):
        k = mpf(k)
        if strict:
            co = small_k_coefficients()
            H2 = co["n1_coeff"] * (co["nl_first_coeff"] + 1) * k**7 * _log(k) ** 3
            return guzman_invert(2, H2).value + 1
        return mpf(PRINTED_SMALL_K["n_final_coeff"]) * k**7 * _log(k) ** 4


def small_k_checks() -> list[ConstantCheck]:
    """Re-derive every printed small-k constant from the step before it."""
    out = []
    with mp.workdps(CHAIN_DIGITS):
        co = small_k_coefficients()
        p = PRINTED_SMALL_K
        out.append(ConstantCheck("nl_first_coeff", p["nl_first_coeff"], float(co["nl_first_coeff"]),
                                 "4 |C(2)| log 10 from U_1"))
        out.append(ConstantCheck("n1_coeff", p["n1_coeff"], float(co["n1_coeff"]),
                                 "8 |C(3)| log 2 log 10 from U_2"))
        # e = 1, H = 7.1e9 k^3 log k, log H < 35 log k.
        out.append(ConstantCheck("nl_case_l_le_m", p["nl_case_l_le_m"], float(2 * p["nl_first_coeff"] * 35),
                                 "Guzman e=1"))
        out.append(ConstantCheck("n_case_l_le_m", p["n_case_l_le_m"],
                                 float(2 * mpf(p["nl_case_l_le_m"]) + 12 / (27 * _log(3) ** 2)),
                                 "n < 2(n-l) + 12"))
        out.append(ConstantCheck("n1_case_m_lt_l_coeff", p["n1_case_m_lt_l_coeff"],
                                 float(mpf(p["n1_coeff"]) * (p["nl_first_coeff"] + 3 / (27 * _log(3)))),
                                 "2.7e12 * 7.1e9; the product carries log^3 k, printed as log^2 k"))
        out.append(ConstantCheck("n_final_coeff", p["n_final_coeff"],
                                 float(4 * mpf(p["n1_case_m_lt_l_coeff"]) * 80**2 + 1 / (3**7 * _log(3) ** 4)),
                                 "Guzman e=2 with log H < 80 log k"))
    return out


def small_k_lemmas(k_values=range(3, 501)) -> list[CheckedLemma]:
    """Auxiliary inequalities the chain relies on, checked before use."""
    from .algebraic import dominant_root, fk_at_alpha

    with mp.workdps(CHAIN_DIGITS):
        lemmas = [
            CheckedLemma("2 log k > 1 + log k (k >= 3)", all(2 * _log(k) > 1 + _log(k) for k in k_values)),
            CheckedLemma(
                "log 7.1 + 9 log 10 < 29 log k (k >= 3)",
                all(_log("7.1") < 2 * _log(k) and 9 * _log(10) < 27 * _log(k) for k in k_values),
            ),
            CheckedLemma(
                "log(7.1e9 k^3 log k) < 35 log k (k >= 3)",
                all(_log(mpf("7.1e9") * mpf(k) ** 3 * _log(k)) < 35 * _log(k) for k in k_values),
            ),
            CheckedLemma(
                "log(2e22 k^7 log^2 k) < 80 log k (k >= 3)",
                all(_log(mpf("2e22") * mpf(k) ** 7 * _log(k) ** 2) < 80 * _log(k) for k in k_values),
            ),
            CheckedLemma(
                "Guzman preconditions H > (4e^2)^e",
                mpf("7.1e9") * 27 * _log(3) > 4 and mpf("2e22") * 3**7 * _log(3) ** 2 > 256,
            ),
            CheckedLemma(
                "1/f_k(alpha) < 2 (k >= 3)",
                all(fk_at_alpha(k, 60).value.value > mpf("0.5") for k in k_values),
            ),
            CheckedLemma(
                "1/(1 - alpha^(l-n)) < 3 for n - l >= 1 (k >= 3)",
                1 / (1 - 1 / dominant_root(3, 60).alpha.value) < 3,
            ),
            CheckedLemma(
                "n - m < d forces l <= 5 and then d = 1, so n = m",
                all(digits10(sequence(kk)[ll]) == 1 for kk in range(2, 60) for ll in range(1, 6))
                and all(not (ll - 3 < (ll + 2) / 3) for ll in range(6, 400)),
            ),
        ]
    return lemmas


# ---------------------------------------------------------------------------
# Large-k chain


PRINTED_LARGE_K = {
    "lambda_coeff": 3.6e9,
    "log_nm_coeff": 26.0,
    "lambda_logk_coeff": 9.37e10,
    "k_branch_lambda": 1e15,
    "nl_branch_coeff": 9.4e10,
    "h_eta3_coeff": 6.6e10,
    "u4_numerator": 168.0,
    "k_coeff": 1.2e24,
    "k_final": 1e28,
    "n_final": 9e229,
}


def large_k_chain(k_assumed_min: int = 421, strict: bool = False) -> dict:
    """Replay the k > 420 argument down to the k < 1e28 and n < 9e229 bounds."""
    if k_assumed_min <= 420:
        raise ValueError("large_k_chain assumes k > 420")
    p = PRINTED_LARGE_K
    checks: list[ConstantCheck] = []
    with mp.workdps(CHAIN_DIGITS):
        c2, c3 = -matveev_constant(2), -matveev_constant(3)
        log2, log10 = _log(2), _log(10)
        k0 = mpf(k_assumed_min)
        lk0 = _log(k0)

        # U_3 with d_F = 1, A = (log 10, log 2): lambda log 2 < |C(2)| (1 + log(n-m)) log 10 log 2.
        lam_coeff = 2 * c2 * log10
        checks.append(ConstantCheck("lambda_coeff", p["lambda_coeff"], float(lam_coeff),
                                    "2 |C(2)| log 10, using 1 + log(n-m) < 2 log(n-m)"))
        # log(n - m) < log(5.2e26 k^7 log^4 k) < 26 log k for k > 420.
        log_nm = _log(n_bound(k0)) / lk0
        checks.append(ConstantCheck("log_nm_coeff", p["log_nm_coeff"], float(log_nm),
                                    "log(n bound)/log k, decreasing in k, taken at the smallest k"))
        lam_c = p["lambda_coeff"] if not strict else lam_coeff
        log_c = p["log_nm_coeff"] if not strict else log_nm
        lam_logk = mpf(lam_c) * log_c
        checks.append(ConstantCheck("lambda_logk_coeff", p["lambda_logk_coeff"], float(lam_logk),
                                    "lambda < 3.6e9 * 26 log k"))
        lam_logk_c = mpf(p["lambda_logk_coeff"]) if not strict else lam_logk
        # Branch lambda = k/2 - 8: k < 2 lam_logk_c log k + 16.
        k_branch = invert_exact(1, 2 * lam_logk_c + 16 / lk0)
        checks.append(ConstantCheck("k_branch_lambda", p["k_branch_lambda"], float(k_branch),
                                    "k/log k < 2 * 9.37e10 + 16/log k, inverted exactly"))
        # Branch lambda = n - l - 2.
        nl_c = lam_logk_c + 2 / lk0
        checks.append(ConstantCheck("nl_branch_coeff", p["nl_branch_coeff"], float(nl_c),
                                    "n - l < 9.37e10 log k + 2"))
        nl_c_used = mpf(p["nl_branch_coeff"]) if not strict else nl_c
        h3 = (nl_c_used + 1 / lk0) * log2
        checks.append(ConstantCheck("h_eta3_coeff", p["h_eta3_coeff"], float(h3),
                                    "h(eta_3) <= (n - l + 1) log 2"))
        # 1/(1 - 2^(l-n)) < 2 and 10 * 2^(m+l-n) + 1 + 1 < 5 * 8 + 2 = 42.
        u4 = 2 * 2 * (5 * 2**3 + 2)
        checks.append(ConstantCheck("u4_numerator", p["u4_numerator"], float(u4),
                                    "2 * (2 / 2^(k/2)) * 42"))
        h3_used = mpf(p["h_eta3_coeff"]) if not strict else h3
        # (k/2) log 2 < log 168 + |C(3)| (1 + log B) log 10 log 2 h3 log k with 1 + log B < 27 log k.
        k_coeff = 2 * c3 * log10 * h3_used * 27 + 2 * _log(168) / log2 / lk0**2
        checks.append(ConstantCheck("k_coeff", p["k_coeff"], float(k_coeff),
                                    "k < 2 |C(3)| log 10 * 6.6e10 * 27 log^2 k"))
        k_coeff_used = mpf(p["k_coeff"]) if not strict else k_coeff
        k_final_guzman = guzman_invert(2, k_coeff_used).value
        # One refinement of the Guzman bound: k < H log^2 k with k below it.
        k_final = k_coeff_used * _log(k_final_guzman) ** 2
        k_final_exact = invert_exact(2, k_coeff_used)
        checks.append(ConstantCheck("k_final", p["k_final"], float(k_final),
                                    "1.2e24 log^2(K) at the Guzman bound K = " + mpmath.nstr(k_final_guzman, 4)
                                    + "; exact inversion gives " + mpmath.nstr(k_final_exact, 4)))
        k_final_used = mpf(p["k_final"]) if not strict else k_final
        n_final = n_bound(k_final_used, strict=strict)
        checks.append(ConstantCheck("n_final", p["n_final"], float(n_final),
                                    "5.2e26 k^7 log^4 k at k = 1e28"))
        lemmas = [
            CheckedLemma("5.2e26 k^7 log^4 k < 2^(k/2) for k > 420",
                         all(n_bound(kk) < mpf(2) ** (mpf(kk) / 2) for kk in range(421, 2000))),
            CheckedLemma("log 5.2e26 < 14 log 420", _log("5.2e26") < 14 * _log(420)),
            CheckedLemma("log(n bound)/log k decreasing for k > 420",
                         all(_log(n_bound(a)) / _log(a) > _log(n_bound(b)) / _log(b)
                             for a, b in ((421, 422), (422, 10**4), (10**4, 10**28)))),
            CheckedLemma("4 log log k < 5 log k", all(4 * _log(_log(kk)) < 5 * _log(kk) for kk in (421, 10**6, 10**28))),
            CheckedLemma("1 + 26 log k <= 27 log k (k >= 3)", 1 + 26 * lk0 <= 27 * lk0),
        ]
        return {
            "k_assumed_min": k_assumed_min,
            "strict": strict,
            "checks": checks,
            "lemmas": lemmas,
            "lambda_bound_coeff": lam_logk_c,
            "k_bound": k_final_used,
            "k_bound_guzman": k_final_guzman,
            "k_bound_exact": k_final_exact,
            "n_bound": n_final,
        }
