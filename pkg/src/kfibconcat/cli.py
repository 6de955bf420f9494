from __future__ import annotations

import argparse
import logging
import sys

from .pipeline import EXIT_CERTIFICATION, RunConfig, emit_report, run


def _csv_ints(s: str) -> tuple[int, ...]:
    return tuple(int(x) for x in s.split(",") if x.strip())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="kfibconcat",
        description="Replay the proof that F_n = F_m | F_l has only three solutions among k-generalized Fibonacci numbers.",
    )
    p.add_argument("--phases", default="A,B,C", help="comma list from A (search), B (small k), C (large k)")
    p.add_argument("--k-min", type=int, default=3)
    p.add_argument("--k-max", type=int, default=50, help="last k of the phase B sweep and the phase A search")
    p.add_argument("--m-max", type=int, default=199)
    p.add_argument("--l-max", type=int, default=199)
    p.add_argument("--search-k-max", type=int, default=None, help="phase A k range end if different from --k-max")
    p.add_argument("--precision-digits", type=int, default=1050)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sample-k", type=_csv_ints, default=(100, 200, 300, 400))
    p.add_argument("--strict-constants", action="store_true",
                   help="push re-derived constants through the chain instead of the printed ones")
    p.add_argument("--no-recheck", action="store_true", help="skip the doubled-precision rerun")
    p.add_argument("--long-run", action="store_true", help="phase B over every k up to 420")
    p.add_argument("--out", default=None)
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--cache-dir", default=None)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = RunConfig(
            phases=tuple(x.strip() for x in args.phases.split(",") if x.strip()),
            k_min=args.k_min,
            k_max=args.k_max,
            m_max=args.m_max,
            l_max=args.l_max,
            search_k_max=args.search_k_max,
            sample_k=args.sample_k,
            precision_digits=args.precision_digits,
            workers=args.workers,
            strict_constants=args.strict_constants,
            recheck=not args.no_recheck,
            out=args.out,
            format=args.format,
            cache_dir=args.cache_dir,
            long_run=args.long_run,
        )
    except ValueError as exc:
        print(f"kfibconcat: {exc}", file=sys.stderr)
        return 64
    report = run(cfg)
    try:
        text = emit_report(report, cfg.format, cfg.out)
    except OSError as exc:
        print(f"kfibconcat: cannot write report: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    if cfg.out is None:
        sys.stdout.write(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
