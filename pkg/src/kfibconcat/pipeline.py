"""Proof replay: search (A), per-k reduction for small k (B), the k > 420 chain (C)."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import baker, reduction
from .algebraic import RootCertificationError
from .precision import PrecisionError
from .search import SearchRange, brute_force, verify_solution, windowed_search

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
CACHE_ENV = "KFIBCONCAT_CACHE_DIR"

KNOWN_SOLUTIONS = {(3, 7, 3, 4), (3, 8, 4, 4), (8, 16, 6, 9)}
PRINTED_N1 = {3: 135, 10: 135, 100: 164, 200: 164, 300: 164, 400: 167}
NL_CEILING = 170  # n - l < 170
M_CEILING = 175  # m < 175
N1_CEILING = 171  # n - 1 <= 171

EXIT_OK = 0
EXIT_MISMATCH = 2
EXIT_CERTIFICATION = 3

CERTIFICATION_ERRORS = (PrecisionError, reduction.ReductionFailure, RootCertificationError)


@dataclass
class RunConfig:
    phases: tuple[str, ...] = ("A", "B", "C")
    k_min: int = 3
    k_max: int = 50
    m_max: int = 199
    l_max: int = 199
    search_k_max: int | None = None
    sample_k: tuple[int, ...] = (100, 200, 300, 400)
    precision_digits: int = 1050
    workers: int = 1
    strict_constants: bool = False
    recheck: bool = True
    out: str | None = None
    format: str = "json"
    cache_dir: str | None = None
    long_run: bool = False

    def __post_init__(self) -> None:
        self.phases = tuple(sorted({p.upper() for p in self.phases}))
        if not self.phases or not set(self.phases) <= {"A", "B", "C"}:
            raise ValueError("phases must be a nonempty subset of A, B, C")
        if self.long_run:
            self.k_max = max(self.k_max, 420)
        if self.k_min < 2 or self.k_max < self.k_min:
            raise ValueError("need 2 <= k_min <= k_max")
        if {"B", "C"} & set(self.phases) and self.precision_digits < 200:
            raise ValueError("phases B and C need precision_digits >= 200")
        if self.format not in ("json", "csv", "text"):
            raise ValueError(f"unknown format {self.format!r}")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.sample_k = tuple(sorted(set(self.sample_k)))
        if self.cache_dir is None:
            self.cache_dir = os.environ.get(CACHE_ENV) or None

    @property
    def phase_b_ks(self) -> list[int]:
        ks = set(range(max(3, self.k_min), self.k_max + 1)) | {k for k in self.sample_k if k >= 3}
        return sorted(ks)

    def to_json(self) -> dict:
        d = asdict(self)
        # Where the report goes does not change what it says.
        for key in ("out", "format", "cache_dir", "workers"):
            d.pop(key)
        d["phases"] = list(self.phases)
        d["sample_k"] = list(self.sample_k)
        return d


@dataclass
class ProofReport:
    config: RunConfig
    phases: dict = field(default_factory=dict)
    printed_checks: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)

    @property
    def printed_reproduced(self) -> bool:
        return all(c["holds"] for c in self.printed_checks)

    @property
    def certified(self) -> bool:
        return not self.errors

    @property
    def exit_code(self) -> int:
        if not self.certified:
            return EXIT_CERTIFICATION
        if not self.printed_reproduced:
            return EXIT_MISMATCH
        return EXIT_OK

    def to_json(self, include_timing: bool = True) -> dict:
        d = {
            "schema_version": SCHEMA_VERSION,
            "config": self.config.to_json(),
            "phases": self.phases,
            "printed_checks": self.printed_checks,
            "errors": self.errors,
            "certified": self.certified,
            "printed_constants_reproduced": self.printed_reproduced,
            "exit_code": self.exit_code,
        }
        if include_timing:
            d["timing"] = self.timing
        return d

    def add_check(self, name: str, holds: bool, printed=None, computed=None, note: str = "") -> None:
        self.printed_checks.append({"name": name, "holds": bool(holds), "printed": printed,
                                    "computed": computed, "note": note})


# ---------------------------------------------------------------------------
# Phase A


def phase_a(cfg: RunConfig, report: ProofReport) -> None:
    k_max = cfg.search_k_max if cfg.search_k_max is not None else cfg.k_max
    rng = SearchRange(cfg.k_min, k_max, cfg.m_max, cfg.l_max)
    sols = brute_force(rng, workers=cfg.workers)
    bad = [s.as_tuple() for s in sols if not verify_solution(s)]
    if bad:
        report.errors.append({"phase": "A", "error": "verification_failed", "instances": bad})
    canonical = {s.as_tuple() for s in sols if s.canonical and s.k >= 3}
    expected = {t for t in KNOWN_SOLUTIONS if rng.k_min <= t[0] <= rng.k_max
                and t[2] <= rng.m_max and t[3] <= rng.l_max}
    report.phases["A"] = {
        "range": asdict(rng),
        "solutions": [s.to_json() for s in sols],
        "canonical_count": sum(s.canonical for s in sols),
    }
    report.add_check("A.solutions", canonical == expected,
                     sorted(map(list, expected)), sorted(map(list, canonical)),
                     "canonical solutions with k >= 3 against the three known ones")


# ---------------------------------------------------------------------------
# Phase B


def _cache_path(cache_dir: str | None, key: dict) -> Path | None:
    if not cache_dir:
        return None
    digest = hashlib.sha256(json.dumps(key, sort_keys=True).encode()).hexdigest()[:24]
    return Path(cache_dir) / f"{key['module']}-k{key['k']}-{digest}.json"


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def per_k_record(k: int, precision_digits: int, strict: bool, recheck: bool) -> dict:
    """Everything phase B derives at one k."""
    M = reduction.per_k_modulus(k, strict)
    leg = reduction.per_k_legendre(k, M, precision_digits)
    nl_cap = leg["nl_cap"]  # n - l < nl_cap
    m_cap = nl_cap + 2  # m < n - l + 3 <= nl_cap + 2
    red = reduction.per_k_reduction(k, M, range(1, m_cap), range(1, nl_cap),
                                    precision_digits, recheck=recheck, strict=strict)
    n1 = red.n1_max
    found = windowed_search(k, m_cap - 1, n1 + 1)
    return {
        "k": k,
        "M": str(M),
        "legendre": leg,
        "nl_bound": nl_cap,
        "m_bound": m_cap,
        "reduction": red.to_json(),
        "n1_bound": n1,
        "min_epsilon": red.min_epsilon.nstr(8),
        "window_search": {"m_max": m_cap - 1, "n_max": n1 + 1,
                          "solutions": [s.to_json() for s in found]},
    }


def _per_k_job(args) -> dict:
    k, digits, strict, recheck, cache_dir = args
    key = {"module": "phaseB", "k": k, "precision": digits, "strict": strict,
           "recheck": recheck, "grid": "legendre"}
    path = _cache_path(cache_dir, key)
    if path is not None and path.exists():
        return json.loads(path.read_text())
    try:
        rec = per_k_record(k, digits, strict, recheck)
    except CERTIFICATION_ERRORS as exc:
        return {"k": k, "error": type(exc).__name__, "message": str(exc)}
    if path is not None:
        _atomic_write(path, json.dumps(rec, sort_keys=True))
    return rec


def phase_b(cfg: RunConfig, report: ProofReport) -> None:
    ks = cfg.phase_b_ks
    jobs = [(k, cfg.precision_digits, cfg.strict_constants, cfg.recheck, cfg.cache_dir) for k in ks]
    if cfg.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            records = list(pool.map(_per_k_job, jobs))
    else:
        records = []
        for j in jobs:
            log.info("phase B: k=%d", j[0])
            records.append(_per_k_job(j))
    good = [r for r in records if "error" not in r]
    for r in records:
        if "error" in r:
            report.errors.append({"phase": "B", **r})
    report.phases["B"] = {"per_k": records}

    report.add_check("B.nl_ceiling", all(r["nl_bound"] <= NL_CEILING for r in good), NL_CEILING,
                     max((r["nl_bound"] for r in good), default=None), "n - l < 170 at every k")
    report.add_check("B.m_ceiling", all(r["m_bound"] <= M_CEILING for r in good), M_CEILING,
                     max((r["m_bound"] for r in good), default=None), "m < 175 at every k")
    report.add_check("B.n1_ceiling", all(r["n1_bound"] <= N1_CEILING for r in good), N1_CEILING,
                     max((r["n1_bound"] for r in good), default=None), "n - 1 <= 171 at every k")
    by_k = {r["k"]: r for r in good}
    for k, printed in sorted(PRINTED_N1.items()):
        if k in by_k:
            got = by_k[k]["n1_bound"]
            report.add_check(f"B.n1_bound[k={k}]", got == printed, printed, got, "sample per-k bound")
    stray = [s for r in good for s in r["window_search"]["solutions"]
             if (s["k"], s["n"], s["m"], s["l"]) not in KNOWN_SOLUTIONS]
    report.add_check("B.window_search", not stray, 0, len(stray),
                     "solutions inside the reduced window beyond the known ones")


# ---------------------------------------------------------------------------
# Phase C


def phase_c(cfg: RunConfig, report: ProofReport) -> None:
    small = baker.small_k_checks()
    lemmas = baker.small_k_lemmas()
    chain = baker.large_k_chain(421, strict=cfg.strict_constants)
    rounds = reduction.global_rounds(cfg.precision_digits, strict=cfg.strict_constants, recheck=cfg.recheck)
    all_checks = small + chain["checks"] + rounds["checks"]
    for c in all_checks:
        report.add_check(f"C.{c.name}", c.holds, c.printed, c.computed, c.note)
    for lem in list(lemmas) + list(chain["lemmas"]):
        report.add_check(f"C.lemma: {lem.name}", lem.holds)
    for ic in rounds["index_checks"]:
        report.add_check(f"C.{ic['name']}", ic["match"], ic["printed"], ic["computed"])
    report.add_check("C.contradiction", rounds["contradiction"], 420, rounds["k_final"],
                     "final k bound falls below the k > 420 assumption")
    report.phases["C"] = {
        "small_k_checks": [c.to_json() for c in small],
        "lemmas": [lem.to_json() for lem in list(lemmas) + list(chain["lemmas"])],
        "large_k_chain": {
            "checks": [c.to_json() for c in chain["checks"]],
            "k_bound": _num(chain["k_bound"]),
            "k_bound_guzman": _num(chain["k_bound_guzman"]),
            "k_bound_exact": _num(chain["k_bound_exact"]),
            "n_bound": _num(chain["n_bound"]),
        },
        "rounds": {
            "round1": rounds["round1"],
            "round2": rounds["round2"],
            "checks": [c.to_json() for c in rounds["checks"]],
            "index_checks": rounds["index_checks"],
            "k_final": rounds["k_final"],
            "contradiction": rounds["contradiction"],
            "rechecked": rounds["rechecked"],
        },
        "precision_digits": cfg.precision_digits,
    }


def _num(x) -> str:
    import mpmath

    return mpmath.nstr(x, 10)


PHASES = {"A": phase_a, "B": phase_b, "C": phase_c}


def run(cfg: RunConfig) -> ProofReport:
    report = ProofReport(cfg)
    for name in cfg.phases:
        t0 = time.perf_counter()
        try:
            PHASES[name](cfg, report)
        except CERTIFICATION_ERRORS as exc:
            report.errors.append({"phase": name, "error": type(exc).__name__, "message": str(exc)})
        report.timing[name] = round(time.perf_counter() - t0, 3)
    return report


# ---------------------------------------------------------------------------
# Output


def render_json(report: ProofReport, include_timing: bool = True) -> str:
    return json.dumps(report.to_json(include_timing), sort_keys=True, indent=2) + "\n"


CSV_COLUMNS = ("k", "nl_bound", "m_bound", "n1_bound", "min_epsilon")


def render_csv(report: ProofReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in report.phases.get("B", {}).get("per_k", []):
        if "error" not in r:
            w.writerow([r[c] for c in CSV_COLUMNS])
    return buf.getvalue()


def render_text(report: ProofReport) -> str:
    lines = [f"phases: {','.join(report.config.phases)}  precision: {report.config.precision_digits} digits"]
    if "A" in report.phases:
        sols = [s for s in report.phases["A"]["solutions"] if s["canonical"]]
        lines.append(f"phase A: {len(sols)} canonical solutions")
        lines += [f"  k={s['k']} F_{s['n']} = F_{s['m']} | F_{s['l']} = {s['value']}" for s in sols]
    if "B" in report.phases:
        lines.append("phase B: k  n-l<  m<  n-1<=  min eps")
        for r in report.phases["B"]["per_k"]:
            if "error" in r:
                lines.append(f"  {r['k']:>4}  error: {r['error']}")
            else:
                lines.append(f"  {r['k']:>4}  {r['nl_bound']:>4}  {r['m_bound']:>3}  {r['n1_bound']:>5}  {r['min_epsilon']}")
    if "C" in report.phases:
        rd = report.phases["C"]["rounds"]
        lines.append(f"phase C: final k bound {rd['k_final']}, contradiction with k > 420: "
                     f"{'yes' if rd['contradiction'] else 'no'}")
    failed = [c for c in report.printed_checks if not c["holds"]]
    for c in failed:
        lines.append(f"  mismatch {c['name']}: printed {c['printed']}, computed {c['computed']}")
    for e in report.errors:
        lines.append(f"  certification failure in phase {e['phase']}: {e.get('error')} {e.get('message', '')}")
    lines.append(f"certified: {'yes' if report.certified else 'no'}")
    lines.append(f"paper constants reproduced: {'yes' if report.printed_reproduced else 'no'}")
    return "\n".join(lines) + "\n"


RENDERERS = {"json": render_json, "csv": render_csv, "text": render_text}


def emit_report(report: ProofReport, fmt: str = "json", path: str | os.PathLike | None = None) -> str:
    """Render and, if ``path`` is given, write atomically."""
    if fmt not in RENDERERS:
        raise ValueError(f"unknown format {fmt!r}")
    text = RENDERERS[fmt](report)
    if path is not None:
        _atomic_write(Path(path), text)
    return text
