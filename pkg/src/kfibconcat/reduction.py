"""Dujella-Pethő style reduction of huge exponent bounds.

For 0 < |s tau - t + mu| < K L^(-gamma) with s <= M, a convergent denominator
q > 6M of tau with eps = ||mu q|| - M ||tau q|| > 0 rules out every
gamma >= log(K q / eps) / log L.

The inner loops run in exact fixed-point: mu and tau are scaled by 2^bits and
rounded to integers once, so ||mu q|| and ||tau q|| are integer residues modulo
2^bits. Each decision compares against an explicit error budget built from
the enclosure radii of mu and tau.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import mpmath
from mpmath import mp, mpf

from . import baker
from .algebraic import dominant_root, fk
from .baker import ConstantCheck
from .contfrac import (
    CFExpansion,
    Source,
    constant,
    expand,
    first_convergent_exceeding,
    legendre_bound,
    max_partial_quotient,
)
from .kfib import sequence
from .precision import DEFAULT_PRECISION, PrecisionError, RealValue, to_fixed

MAX_ATTEMPTS = 25


class ReductionFailure(ArithmeticError):
    pass


class DegenerateReduction(ReductionFailure):
    pass


@dataclass(frozen=True)
class ReductionInstance:
    tau: RealValue
    mu: RealValue
    K: RealValue
    L: RealValue
    M: int
    label: str = ""

    def __post_init__(self) -> None:
        if float(self.K) <= 0 or float(self.L) <= 1 or self.M < 1:
            raise ValueError("reduction needs K > 0, L > 1, M >= 1")


@dataclass(frozen=True)
class ReductionOutcome:
    q_used: int
    q_index: int
    epsilon: RealValue
    gamma_bound: RealValue
    attempts: int
    label: str = ""

    def to_json(self) -> dict:
        return {
            "label": self.label,
            "q_index": self.q_index,
            "q_used": str(self.q_used),
            "epsilon": self.epsilon.nstr(8),
            "gamma_bound": self.gamma_bound.nstr(12),
            "attempts": self.attempts,
        }


def _bits(digits: int) -> int:
    return int(digits * 3.3219280948873626) + 16


def _fixed(x: mpf, bits: int) -> int:
    return to_fixed(x, bits)


def _err_units(radius: mpf, bits: int) -> int:
    """Error of a fixed-point value, in units of 2^-bits."""
    return int(mpmath.ceil(mpmath.ldexp(radius, bits))) + 1


def _dist(v: int, one: int) -> int:
    r = v % one
    return min(r, one - r)


@dataclass
class _FixedFamily:
    """One tau, several mu, in fixed point."""

    bits: int
    tau: int
    tau_err: int
    mus: list[int]
    mu_err: int

    @property
    def one(self) -> int:
        return 1 << self.bits

    def eps(self, mu: int, q: int, M: int) -> tuple[int, int]:
        """(eps in units, error budget in units) for one mu and denominator q."""
        one = self.one
        e = _dist(mu * q, one) - M * _dist(self.tau * q, one)
        budget = q * self.mu_err + M * q * self.tau_err
        return e, budget


def _choose_common_q(
    fam: _FixedFamily, qs: Sequence[int], M: int, max_attempts: int
) -> tuple[int, int, int]:
    """(attempt index, q, min eps units) minimising q / eps over the first attempts.

    Every convergent with certified eps > 0 for all mu yields a valid bound;
    the one with the smallest bound is kept. eps <= 1/2 gives q/eps >= 2q, which
    prunes the scan.
    """
    best = None
    one = fam.one
    for t, q in enumerate(qs[:max_attempts]):
        if best is not None and 2 * q * best[2] >= best[1] * one:
            break
        emin = None
        for mu in fam.mus:
            e, budget = fam.eps(mu, q, M)
            if e <= budget:
                emin = None
                break
            emin = e if emin is None else min(emin, e)
        if emin is None:
            continue
        if best is None or q * best[2] < best[1] * emin:
            best = (t, q, emin)
    if best is None:
        raise ReductionFailure(f"no convergent among the first {max_attempts} gives eps > 0")
    return best


def gamma_bound(K, q: int, eps, L) -> mpf:
    """log(K q / eps) / log L."""
    return mpmath.log(K * q / eps) / mpmath.log(L)


def _tau_expansion(source: Source, M: int, digits: int, max_attempts: int, certify: bool) -> tuple[CFExpansion, int]:
    cf = expand(source, digits, q_threshold=6 * M, extra_terms=max_attempts, certify=certify)
    i0, _, _ = first_convergent_exceeding(cf, 6 * M)
    return cf, i0


def reduce(inst: ReductionInstance, max_attempts: int = MAX_ATTEMPTS) -> ReductionOutcome:
    """Reduction for one instance, tau and mu enclosed by their RealValue radii."""
    digits = min(inst.tau.precision_digits, inst.mu.precision_digits)
    bits = _bits(digits)
    with mp.workdps(digits):
        mu = inst.mu.value
        if abs(mu - mpmath.nint(mu)) < mpf(10) ** (-digits // 2):
            raise DegenerateReduction(f"{inst.label}: mu is numerically an integer")
        tau_val, tau_rad = inst.tau.value, inst.tau.radius()
        cf, i0 = _tau_expansion(lambda d: (tau_val, tau_rad), inst.M, digits, max_attempts, certify=False)
        fam = _FixedFamily(bits, _fixed(tau_val, bits), _err_units(tau_rad, bits),
                           [_fixed(mu, bits)], _err_units(inst.mu.radius(), bits))
        qs = list(cf.q[i0:])
        try:
            t, q, e = _choose_common_q(fam, qs, inst.M, max_attempts)
        except ReductionFailure as exc:
            raise ReductionFailure(f"{inst.label}: {exc}") from None
        eps = mpmath.ldexp(mpf(e), -bits)
        gamma = gamma_bound(inst.K.value, q, eps, inst.L.value)
        return ReductionOutcome(q, i0 + t, RealValue(eps, digits), RealValue(gamma, digits), t + 1, inst.label)


# ---------------------------------------------------------------------------
# Per-k pass


@dataclass(frozen=True)
class PerKOutcome:
    k: int
    M: int
    tau_q_first_index: int
    gamma_max: RealValue
    worst_cell: tuple[int, int]
    worst_q_index: int
    worst_epsilon: RealValue | None
    min_epsilon: RealValue
    legendre_gamma: RealValue
    legendre_cells: int
    grid: tuple[tuple[int, int], tuple[int, int]]
    attempts_histogram: dict = field(default_factory=dict)
    choice_digest: str = ""
    precision_digits: int = DEFAULT_PRECISION
    rechecked: bool = False

    @property
    def n1_max(self) -> int:
        """Largest n - 1 the reduction leaves open."""
        return math.ceil(float(self.gamma_max)) - 1

    def to_json(self) -> dict:
        return {
            "k": self.k,
            "M": str(self.M),
            "first_q_index": self.tau_q_first_index,
            "gamma_max": self.gamma_max.nstr(12),
            "n1_bound": self.n1_max,
            "worst_cell": {"m": self.worst_cell[0], "n_minus_l": self.worst_cell[1],
                           "q_index": self.worst_q_index,
                           "epsilon": self.worst_epsilon.nstr(8) if self.worst_epsilon else None},
            "min_epsilon": self.min_epsilon.nstr(8),
            "legendre_fallback_gamma": self.legendre_gamma.nstr(12),
            "legendre_fallback_cells": self.legendre_cells,
            "grid": {"m": list(self.grid[0]), "n_minus_l": list(self.grid[1])},
            "attempts_histogram": {str(a): c for a, c in sorted(self.attempts_histogram.items())},
            "choice_digest": self.choice_digest,
            "precision_digits": self.precision_digits,
            "rechecked": self.rechecked,
        }


def tau_source(k: int) -> Source:
    """log 10 / log alpha(k) with its enclosure radius."""

    def source(digits: int) -> tuple[mpf, mpf]:
        root = dominant_root(k, digits)
        with mp.workdps(root.precision_digits + 10):
            a, r = root.alpha.value, root.enclosure_radius
            tau = mpmath.log(10) / mpmath.log(a)
            slope = mpmath.log(10) / ((a - r) * mpmath.log(a - r) ** 2)
            return tau, 2 * slope * r + abs(tau) * mpf(10) ** (-(root.precision_digits - 2))

    return source


def per_k_modulus(k: int, strict: bool = False) -> int:
    """M_k: the final n bound at this k (s = d <= n - 1 < M_k)."""
    return int(mpmath.ceil(baker.n_bound(k, strict=strict)))


def _per_k_grid(k: int, M: int, m_range: range, nl_range: range, digits: int, max_attempts: int, certify: bool):
    root = dominant_root(k, digits)
    digits = root.precision_digits
    bits = _bits(digits)
    seq = sequence(k)
    with mp.workdps(digits + 10):
        a, r = root.alpha.value, root.enclosure_radius
        la = mpmath.log(a)
        fka = fk(a, k)
        K = 12 / la
        cf, i0 = _tau_expansion(tau_source(k), M, digits, max_attempts, certify)
        qs = list(cf.q[i0:])
        tau_val, tau_rad = tau_source(k)(digits)

        # Enclosure radii from the derivative in alpha, evaluated at low precision.
        def slope(fn) -> mpf:
            with mp.workdps(30):
                h = mpf(10) ** -12
                return abs((fn(mpf(a) + h) - fn(mpf(a) - h)) / (2 * h))

        rounding = mpf(10) ** (-(digits - 5))
        A = {}
        for m in m_range:
            fm = seq[m]
            A[m] = (mpmath.log(fm) - mpmath.log(fka)) / la
        D = {j: mpmath.log(1 - a ** (-j)) / la for j in nl_range}
        m_hi, j_hi = max(m_range), min(nl_range)
        d_mu = slope(lambda t: (mpmath.log(seq[m_hi]) - mpmath.log(fk(t, k)) - mpmath.log(1 - t ** (-j_hi))) / mpmath.log(t))
        mu_rad = 4 * (d_mu + 1) * r + (1 + abs(A[m_hi])) * rounding
        A_fx = {m: _fixed(v, bits) for m, v in A.items()}
        D_fx = {j: _fixed(v, bits) for j, v in D.items()}

        # Legendre fallback: if ||mu|| < c/2 with c = 1/((a_max + 2) M), then
        # |s tau - t| >= c for all s <= M bounds gamma by log(2K(a_max+2)M)/log alpha.
        last = cf.last_index_at_most(M)
        a_max = max_partial_quotient(cf, last + 1)
        leg_num = 2 * (a_max + 2) * M
        leg_gamma = mpmath.log(K * leg_num) / la

        fam = _FixedFamily(bits, _fixed(tau_val, bits), _err_units(tau_rad, bits), [], _err_units(mu_rad, bits))
    one = fam.one
    mu_err = fam.mu_err
    scaled_qs = [q * one for q in qs[:max_attempts]]

    worst = None  # (num, den, m, j, t)
    choices = bytearray()
    hist: dict[int, int] = {}
    min_eps = None
    leg_cells = 0
    failures = []
    for m in m_range:
        am = A_fx[m]
        for j in nl_range:
            mu = am - D_fx[j]
            best = None  # (num, den, t)
            if leg_num * (_dist(mu, one) + mu_err) < one:
                best = (leg_num, 1, -1)
            for t, q in enumerate(qs[:max_attempts]):
                if best is not None and 2 * scaled_qs[t] * best[1] >= best[0] * one:
                    break
                e, budget = fam.eps(mu, q, M)
                if e > budget and (best is None or scaled_qs[t] * best[1] < best[0] * e):
                    best = (scaled_qs[t], e, t)
            if best is None:
                failures.append((m, j))
                continue
            t = best[2]
            choices.append(t & 0xFF)
            hist[t] = hist.get(t, 0) + 1
            if t < 0:
                leg_cells += 1
            elif min_eps is None or best[1] < min_eps:
                min_eps = best[1]
            if worst is None or best[0] * worst[1] > worst[0] * best[1]:
                worst = (best[0], best[1], m, j, t)
    if failures:
        raise ReductionFailure(f"k={k}: reduction failed on cells (m, n-l) {failures[:10]}"
                               + (" ..." if len(failures) > 10 else ""))

    with mp.workdps(digits):
        num, den, wm, wj, wt = worst
        gamma_max = mpmath.log(K * mpf(num) / den) / la
        worst_eps = None if wt < 0 else RealValue(mpmath.ldexp(mpf(den), -bits), digits)
        return PerKOutcome(
            k=k,
            M=M,
            tau_q_first_index=i0,
            gamma_max=RealValue(gamma_max, digits),
            worst_cell=(wm, wj),
            worst_q_index=(i0 + wt) if wt >= 0 else -1,
            worst_epsilon=worst_eps,
            min_epsilon=RealValue(mpmath.ldexp(mpf(min_eps or 0), -bits), digits),
            legendre_gamma=RealValue(leg_gamma, digits),
            legendre_cells=leg_cells,
            grid=((m_range.start, m_range.stop - 1), (nl_range.start, nl_range.stop - 1)),
            attempts_histogram=hist,
            choice_digest=hashlib.sha256(bytes(choices)).hexdigest()[:16],
            precision_digits=digits,
        )


def per_k_reduction(
    k: int,
    M_k: int | None = None,
    m_range: range = range(1, 176),
    nl_range: range = range(1, 176),
    precision_digits: int = DEFAULT_PRECISION,
    max_attempts: int = MAX_ATTEMPTS,
    recheck: bool = True,
    strict: bool = False,
) -> PerKOutcome:
    """Bound on n - 1 for one k from the (m, n - l) grid of reduction instances.

    tau_k = log 10 / log alpha, mu = log(F_m / (f_k(alpha)(1 - alpha^(l-n)))) / log alpha,
    K = 12 / log alpha, L = alpha. Each cell gets its own convergent.
    With ``recheck`` the grid is recomputed at doubled precision and every
    per-cell choice must agree.
    """
    if k < 3:
        raise ValueError("per_k_reduction needs k >= 3")
    if not m_range or not nl_range:
        raise ValueError("grid ranges must be nonempty")
    M = M_k if M_k is not None else per_k_modulus(k, strict)
    out = _per_k_grid(k, M, m_range, nl_range, precision_digits, max_attempts, certify=recheck)
    if recheck:
        again = _per_k_grid(k, M, m_range, nl_range, 2 * precision_digits, max_attempts, certify=False)
        if again.choice_digest != out.choice_digest or again.worst_cell != out.worst_cell:
            raise PrecisionError(f"k={k}: per-cell reduction choices changed under doubled precision")
        if abs(float(again.gamma_max) - float(out.gamma_max)) > 1e-9:
            raise PrecisionError(f"k={k}: gamma bound moved under doubled precision")
        out = PerKOutcome(**{**out.__dict__, "rechecked": True})
    return out


def per_k_legendre(k: int, M_k: int, precision_digits: int = DEFAULT_PRECISION) -> dict:
    """n - l bound for one k from the convergent argument on log alpha / log 10."""
    root = dominant_root(k, precision_digits)

    def source(digits: int) -> tuple[mpf, mpf]:
        t, rad = tau_source(k)(digits)
        return 1 / t, rad / (t * t) * 2

    cf = expand(source, root.precision_digits, q_threshold=M_k, extra_terms=2)
    with mp.workdps(50):
        lb = legendre_bound(cf, M_k, 28 / mpmath.log(10), root.alpha.value)
    nl_bound = lb.exponent_bound
    nl_cap = math.floor(nl_bound) + 1
    return {
        "k": k,
        "a_max": lb.a_max,
        "index_range": list(lb.index_range),
        "nl_exponent_bound": round(nl_bound, 9),
        "nl_cap": nl_cap,
        "m_cap": nl_cap + 3,
    }


# ---------------------------------------------------------------------------
# Global rounds for k > 420


PRINTED_ROUNDS = {
    "round1": {"lambda": 777, "lambda_comp": 765, "k_branch": 1570, "nl": 780, "q_index": 472,
               "eps": 0.000957, "gamma": 795, "k": 1590, "n": 4e52},
    "round2": {"lambda": 188, "nl": 190, "q_index": 120, "eps": 0.001034, "gamma": 205, "k": 410},
}


def _mu_global(j: int) -> mpf:
    return -mpmath.log(1 - mpf(2) ** (-j)) / mpmath.log(2)


def reduce_family(
    tau: Source,
    mus: dict[int, mpf],
    K: mpf,
    L: mpf,
    M: int,
    digits: int,
    max_attempts: int = MAX_ATTEMPTS,
    certify: bool = True,
) -> dict:
    """Common-convergent reduction for a family of mu values sharing tau, K, L, M."""
    bits = _bits(digits)
    with mp.workdps(digits + 10):
        cf, i0 = _tau_expansion(tau, M, digits, max_attempts, certify)
        tau_val, tau_rad = tau(digits)
        rounding = mpf(10) ** (-(digits - 5))
        for j, mu in mus.items():
            if abs(mu - mpmath.nint(mu)) < mpf(10) ** (-digits // 2):
                raise DegenerateReduction(f"mu for {j} is numerically an integer")
        fam = _FixedFamily(
            bits, _fixed(tau_val, bits), _err_units(tau_rad, bits),
            [_fixed(mu, bits) for mu in mus.values()],
            _err_units(rounding * (1 + max(abs(mu) for mu in mus.values())), bits),
        )
    qs = list(cf.q[i0:])
    t, q, emin_units = _choose_common_q(fam, qs, M, max_attempts)
    with mp.workdps(digits):
        eps_all = {j: fam.eps(mu_fx, q, M)[0] for j, mu_fx in zip(mus, fam.mus)}
        j_min = min(eps_all, key=eps_all.get)
        eps = mpmath.ldexp(mpf(emin_units), -bits)
        gamma = gamma_bound(K, q, eps, L)
        first_positive = None
        for tt, qq in enumerate(qs[:max_attempts]):
            if all(fam.eps(mu_fx, qq, M)[0] > fam.eps(mu_fx, qq, M)[1] for mu_fx in fam.mus):
                first_positive = i0 + tt
                break
        return {
            "first_q_index_above_6M": i0,
            "first_q_index_all_positive": first_positive,
            "q_index": i0 + t,
            "q": q,
            "epsilon_min": eps,
            "epsilon_argmin": j_min,
            "gamma": gamma,
        }


def _round(
    tag: str,
    n_cap: int,
    digits: int,
    strict: bool,
    cf_log2_log10: CFExpansion,
    max_attempts: int,
    certify: bool,
) -> tuple[dict, list[ConstantCheck]]:
    printed = PRINTED_ROUNDS[tag]
    checks: list[ConstantCheck] = []
    with mp.workdps(digits):
        lb = legendre_bound(cf_log2_log10, n_cap, 2 / mpmath.log(10), 2)
    lam_cap = lb.cap
    checks.append(ConstantCheck(f"{tag}.lambda", printed["lambda"], lb.exponent_bound,
                                f"2^lambda < 2 (a_max + 2) M / log 10, a_max = {lb.a_max}"))
    if "lambda_comp" in printed:
        checks.append(ConstantCheck(f"{tag}.lambda_complementary", printed["lambda_comp"],
                                    lb.complementary_branch, "2^lambda < 4 M / log 10"))
    k_branch = 2 * (lam_cap + 8)
    nl_cap = lam_cap + 2
    if "k_branch" in printed:
        checks.append(ConstantCheck(f"{tag}.k_branch", printed["k_branch"], k_branch, "lambda = k/2 - 8"))
    checks.append(ConstantCheck(f"{tag}.n_minus_l", printed["nl"], nl_cap, "lambda = n - l - 2"))
    nl_top = nl_cap if strict else max(nl_cap, printed["nl"])
    with mp.workdps(digits + 10):
        mus = {j: _mu_global(j) for j in range(3, nl_top + 1)}
        K, L = 336 / mpmath.log(2), mpf(2)
    red = reduce_family(constant(lambda: mpmath.log(10) / mpmath.log(2)), mus, K, L, n_cap,
                        digits, max_attempts, certify)
    checks.append(ConstantCheck(f"{tag}.epsilon_min", printed["eps"], float(red["epsilon_min"]),
                                f"min over n - l in 3..{nl_top} at q_{red['q_index']}", direction="lower"))
    gamma = float(red["gamma"])
    if "gamma" in printed and tag == "round1":
        checks.append(ConstantCheck(f"{tag}.gamma", printed["gamma"], gamma, "log(K q / eps) / log 2"))
    k_red = math.floor(2 * gamma) + 1  # k/2 < gamma
    k_cap = max(k_red, k_branch)
    checks.append(ConstantCheck(f"{tag}.k", printed["k"], k_cap, "k < max(2 gamma, 2(lambda + 8))"))
    record = {
        "M": str(n_cap),
        "legendre": {"a_max": lb.a_max, "index_range": list(lb.index_range),
                     "lambda_bound": round(lb.exponent_bound, 9),
                     "lambda_complementary": round(lb.complementary_branch, 9),
                     "lambda_cap": lam_cap},
        "k_branch_cap": k_branch,
        "n_minus_l_cap": nl_cap,
        "n_minus_l_range": [3, nl_top],
        "reduction": {
            "first_q_index_above_6M": red["first_q_index_above_6M"],
            "first_q_index_all_positive": red["first_q_index_all_positive"],
            "q_index": red["q_index"],
            "q": str(red["q"]),
            "epsilon_min": mpmath.nstr(red["epsilon_min"], 8),
            "epsilon_argmin_n_minus_l": red["epsilon_argmin"],
            "gamma": mpmath.nstr(red["gamma"], 12),
        },
        "k_cap": k_cap,
    }
    return record, checks


def global_rounds(
    precision_digits: int = DEFAULT_PRECISION,
    strict: bool = False,
    max_attempts: int = MAX_ATTEMPTS,
    recheck: bool = True,
) -> dict:
    """Two reduction rounds for k > 420, ending in k below 420."""
    chain = baker.large_k_chain(421, strict=strict)
    n_cap0 = int(mpmath.ceil(chain["n_bound"])) if strict else int(baker.PRINTED_LARGE_K["n_final"])
    cf = expand(constant(lambda: mpmath.log(2) / mpmath.log(10)), precision_digits,
                q_threshold=n_cap0, extra_terms=3, certify=recheck)

    r1, checks1 = _round("round1", n_cap0, precision_digits, strict, cf, max_attempts, recheck)
    k1 = r1["k_cap"] if strict else PRINTED_ROUNDS["round1"]["k"]
    n1 = baker.n_bound(k1, strict=strict)
    checks1.append(ConstantCheck("round1.n", PRINTED_ROUNDS["round1"]["n"], float(n1), f"n bound at k = {k1}"))
    n_cap1 = int(mpmath.ceil(n1)) if strict else int(PRINTED_ROUNDS["round1"]["n"])
    r1["n_cap"] = mpmath.nstr(n1, 8)
    r2, checks2 = _round("round2", n_cap1, precision_digits, strict, cf, max_attempts, recheck)
    index_checks = [
        ("round1.q_index", r1["reduction"]["q_index"], PRINTED_ROUNDS["round1"]["q_index"]),
        ("round2.q_index", r2["reduction"]["q_index"], PRINTED_ROUNDS["round2"]["q_index"]),
    ]
    result = {
        "precision_digits": precision_digits,
        "strict": strict,
        "round1": r1,
        "round2": r2,
        "k_final": r2["k_cap"],
        "contradiction": r2["k_cap"] <= 420,
        "checks": checks1 + checks2,
        "index_checks": [{"name": n, "computed": c, "printed": p, "match": c == p} for n, c, p in index_checks],
        "rechecked": False,
    }
    if recheck:
        again = global_rounds(2 * precision_digits, strict, max_attempts, recheck=False)
        for tag in ("round1", "round2"):
            a, b = result[tag]["reduction"], again[tag]["reduction"]
            if a["q_index"] != b["q_index"] or mpmath.nstr(mpf(a["epsilon_min"]), 3) != mpmath.nstr(mpf(b["epsilon_min"]), 3):
                raise PrecisionError(f"{tag}: reduction changed under doubled precision")
        result["rechecked"] = True
    return result
