"""Command-line front-end.

Subcommands: profile, wef-exact, wef-approx, bound, design, simulate.
Every run computes first and writes files only on success; each output
artifact gets a sibling ``<name>.manifest.json`` with the resolved
parameters, seed, tool version and timestamp.

Exit codes: 0 success, 2 usage error, 3 capacity error, 4 I/O error.

Conventions stated in all outputs: indices are 0-based; SNR columns name
the convention that produced them (Es/N0 or Eb/N0, in dB).
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import SnrPoint, union_bound
from .decoder_sim import simulate_fer
from .pac_core import (
    CodeSpec,
    ga_polar_profile,
    generator_to_octal,
    load_profile,
    parse_generator,
    rm_profile,
    rm_score,
    save_profile,
)
from .profiler_sa import NoMoveError, SAConfig, sa_design
from .wef import (
    CapacityError,
    DEFAULT_BASE_CAP,
    DEFAULT_EXACT_CAP,
    WeightCounts,
    approx_wef,
    counts_from_pmf,
    exact_wef,
)

THREADS_ENV = "PACWEF_THREADS"

PROFILE_SOURCES = ("rm1", "rm2", "ga", "file")


class UsageError(ValueError):
    """Bad flag combination detected after parsing."""


# ---------------------------------------------------------------------------
# Shared helpers
# ---------------------------------------------------------------------------

def _default_threads() -> int:
    env = os.environ.get(THREADS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _parse_grid(text: str) -> list[float]:
    """'start:step:stop' inclusive, or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise UsageError(f"grid must be 'start:step:stop' or a value: {text!r}")
    start, step, stop = (float(p) for p in parts)
    if step <= 0:
        raise UsageError("grid step must be positive")
    out = []
    x = start
    while x <= stop + 1e-9:
        out.append(round(x, 12))
        x += step
    return out


def _resolve_profile(source: str, n: int, k: int, path: str | None,
                     design_snr_db: float) -> tuple[int, ...]:
    if source == "rm1":
        return rm_profile(n, k, "high_index")
    if source == "rm2":
        return rm_profile(n, k, "low_index")
    if source == "ga":
        return ga_polar_profile(n, k, design_snr_db)
    if source == "file":
        if not path:
            raise UsageError("profile source 'file' needs --profile-file")
        info = load_profile(path)
        if len(info) != k:
            raise UsageError(
                f"profile file holds {len(info)} indices but --k is {k}"
            )
        if info and (info[0] < 0 or info[-1] >= n):
            raise UsageError(f"profile file indices out of range for N={n}")
        return info
    raise UsageError(f"unknown profile source {source!r}")


def _spec_from_args(args) -> CodeSpec:
    gen = parse_generator(args.gen)
    info = _resolve_profile(args.profile_source, args.n, args.k,
                            getattr(args, "profile_file", None),
                            getattr(args, "design_snr_db", 2.0))
    return CodeSpec.make(args.n, info, gen)


def _write_csv(path: Path, comments: list[str], header: list[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _write_manifest(artifact: Path, subcommand: str, params: dict,
                    seed: int | None = None) -> None:
    manifest = {
        "subcommand": subcommand,
        "params": params,
        "seed": seed,
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }
    Path(str(artifact) + ".manifest.json").write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n"
    )


def _public_params(args) -> dict:
    skip = {"func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _snr_comment(convention: str) -> str:
    name = "Es/N0" if convention == "esn0" else "Eb/N0"
    return f"snr_db column is {name} in dB; indices 0-based"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_profile(args) -> int:
    if args.k > args.n:
        raise UsageError(f"K={args.k} exceeds N={args.n}")
    info = _resolve_profile(args.source, args.n, args.k,
                            args.profile_file, args.design_snr_db)
    out = Path(args.out)
    save_profile(out, info)
    scores_path = args.scores_csv or (str(out) + ".scores.csv")
    _write_csv(Path(scores_path), ["indices 0-based"], ["index", "rm_score"],
               [(i, rm_score(i)) for i in info])
    _write_manifest(out, "profile", _public_params(args))
    print(f"wrote {out} ({len(info)} indices) and {scores_path}")
    return 0


def _spectrum_outputs(args, spec: CodeSpec, counts: WeightCounts, mode: str,
                      n_th: int | None, pmf=None) -> None:
    out = Path(args.out)
    comments = [
        f"weight spectrum of PAC code N={spec.N} K={spec.K} "
        f"generator(octal)={generator_to_octal(spec.gen)} mode={mode}"
        + (f" n_th={n_th}" if n_th else ""),
        "indices 0-based",
    ]
    last = int(max(np.flatnonzero(np.asarray(counts.counts) > 0), default=0))
    if counts.exact:
        rows = [(d, int(c)) for d, c in enumerate(counts.counts[: last + 1])]
    else:
        rows = [(d, format(float(c), ".6g"))
                for d, c in enumerate(counts.counts[: last + 1])]
    _write_csv(out, comments, ["d", "count"], rows)
    _write_manifest(out, f"wef-{mode}", _public_params(args))
    if args.json:
        payload = {
            "n": spec.N,
            "k": spec.K,
            "mode": mode,
            "n_th": n_th,
            "generator": generator_to_octal(spec.gen),
            "profile": list(spec.info_set),
            "counts": [float(c) for c in counts.counts],
        }
        if pmf is not None:
            payload["pmf"] = [float(p) for p in pmf.p]
        Path(args.json).write_text(json.dumps(payload) + "\n")
        _write_manifest(Path(args.json), f"wef-{mode}", _public_params(args))
    if args.plot:
        from .plotting import plot_spectrum

        plot_spectrum([(mode, counts.counts)], args.plot)
    print(f"wrote {out}")


def _cmd_wef_exact(args) -> int:
    spec = _spec_from_args(args)
    counts = exact_wef(spec, cap=args.cap, threads=args.threads)
    _spectrum_outputs(args, spec, counts, "exact", None)
    return 0


def _cmd_wef_approx(args) -> int:
    spec = _spec_from_args(args)
    n_th = args.n_th if args.n_th is not None else min(32, spec.N)
    mode = args.mode.replace("-", "_")
    pmf = approx_wef(spec, n_th=n_th, mode=mode, base_cap=args.base_cap)
    counts = counts_from_pmf(pmf, spec.K)
    _spectrum_outputs(args, spec, counts, mode, n_th, pmf=pmf)
    return 0


def _load_spectrum(path: str) -> tuple[np.ndarray, int | None, int | None]:
    """Read a spectrum file (CSV or JSON); returns (counts, N, K)."""
    p = Path(path)
    text = p.read_text()
    if text.lstrip().startswith("{"):
        data = json.loads(text)
        counts = np.asarray(data["counts"], dtype=float)
        return counts, data.get("n"), data.get("k")
    pairs = []
    for row in csv.reader(line for line in text.splitlines()
                          if line and not line.startswith("#")):
        if row[0] == "d":
            continue
        pairs.append((int(row[0]), float(row[1])))
    n = max(d for d, _ in pairs)
    counts = np.zeros(n + 1)
    for d, c in pairs:
        counts[d] = c
    return counts, n, None


def _cmd_bound(args) -> int:
    counts_arr, n, k = _load_spectrum(args.spectrum)
    n = n if n is not None else len(counts_arr) - 1
    counts = WeightCounts(n=n, counts=counts_arr)
    grid = _parse_grid(args.snr)
    rate = args.rate
    if args.convention == "ebn0" and rate is None:
        if k is None:
            raise UsageError("--convention ebn0 needs --rate (or a JSON spectrum with k)")
        rate = k / n
    rows = []
    for db in grid:
        snr = (SnrPoint.from_esn0_db(db) if args.convention == "esn0"
               else SnrPoint.from_ebn0_db(db, rate))
        rows.append((db, format(union_bound(counts, snr), ".9e")))
    out = Path(args.out)
    _write_csv(out, [_snr_comment(args.convention)], ["snr_db", "union_bound"], rows)
    _write_manifest(out, "bound", _public_params(args))
    if args.plot:
        from .plotting import plot_bound

        name = "Es/N0 (dB)" if args.convention == "esn0" else "Eb/N0 (dB)"
        plot_bound([r[0] for r in rows], [float(r[1]) for r in rows],
                   args.plot, snr_label=name)
    print(f"wrote {out}")
    return 0


def _cmd_design(args) -> int:
    gen = parse_generator(args.gen)
    start = _resolve_profile(args.start, args.n, args.k,
                             args.start_file, args.design_snr_db)
    spec = CodeSpec.make(args.n, start, gen)
    snr = (SnrPoint.from_esn0_db(args.snr_db) if args.convention == "esn0"
           else SnrPoint.from_ebn0_db(args.snr_db, args.k / args.n))
    cfg = SAConfig(
        t_max=args.t_max, t_min=args.t_min, a=args.cooling_a, snr=snr,
        n_th=args.n_th if args.n_th is not None else min(32, args.n),
        mode=args.mode.replace("-", "_"), search_space=args.space,
        seed=args.seed, start_profile=start, max_proposals=args.max_proposals,
    )
    result = sa_design(cfg, spec)

    out_profile = Path(args.out_profile)
    save_profile(out_profile, result.best_profile)
    _write_manifest(out_profile, "design", _public_params(args), seed=args.seed)
    out_trace = Path(args.out_trace)
    _write_csv(
        out_trace,
        [_snr_comment(args.convention),
         f"start_cost={result.start_cost:.9e} best_cost={result.best_cost:.9e} "
         f"min_ever_cost={result.min_ever_cost:.9e} acceptances={result.acceptances} "
         f"proposals={result.proposals}"],
        ["iteration", "accepted_cost", "temperature"],
        [(i, format(c, ".9e"), format(t, ".9e")) for i, c, t in result.trace],
    )
    _write_manifest(out_trace, "design", _public_params(args), seed=args.seed)
    if args.plot:
        from .plotting import plot_sa_trace

        plot_sa_trace(result.trace, args.plot)
    print(f"wrote {out_profile} (best cost {result.best_cost:.6e}, "
          f"{result.acceptances} acceptances) and {out_trace}")
    return 0


def _cmd_simulate(args) -> int:
    spec = _spec_from_args(args)
    grid = _parse_grid(args.snr)
    results = simulate_fer(
        spec, grid, decoder=args.decoder, list_size=args.list,
        max_trials=args.max_trials, max_errors=args.max_errors,
        seed=args.seed, convention=args.convention, ml_cap=args.ml_cap,
    )
    out = Path(args.out)
    _write_csv(
        out,
        [_snr_comment(args.convention),
         f"decoder={args.decoder} list={args.list} seed={args.seed}"],
        ["snr_db", "trials", "errors", "fer", "ci_lo", "ci_hi"],
        [(r.snr_db, r.trials, r.frame_errors, format(r.fer, ".6e"),
          format(r.wilson_ci[0], ".6e"), format(r.wilson_ci[1], ".6e"))
         for r in results],
    )
    _write_manifest(out, "simulate", _public_params(args), seed=args.seed)
    if args.plot:
        from .plotting import plot_fer

        name = "Es/N0 (dB)" if args.convention == "esn0" else "Eb/N0 (dB)"
        plot_fer(results, args.plot, snr_label=name)
    print(f"wrote {out}")
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _add_code_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True, help="codeword length (power of two)")
    p.add_argument("--k", type=int, required=True, help="message length")
    p.add_argument("--gen", default="133", help="convolution generator, octal (default 133)")
    p.add_argument("--profile-source", choices=PROFILE_SOURCES, default="rm1")
    p.add_argument("--profile-file", help="profile file for --profile-source file")
    p.add_argument("--design-snr-db", type=float, default=2.0,
                   help="design Es/N0 in dB for the ga profile source")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pacwef",
        description="Weight distributions, union bounds and rate-profile "
                    "design for PAC codes (all indices 0-based).",
    )
    parser.add_argument("--version", action="version", version=f"pacwef {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="construct a rate profile")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--source", choices=PROFILE_SOURCES, default="rm1")
    p.add_argument("--profile-file", help="input profile for --source file")
    p.add_argument("--design-snr-db", type=float, default=2.0)
    p.add_argument("--out", required=True, help="output profile JSON")
    p.add_argument("--scores-csv", help="per-index RM score CSV (default <out>.scores.csv)")
    p.set_defaults(func=_cmd_profile)

    p = sub.add_parser("wef-exact", help="exact weight spectrum by enumeration")
    _add_code_args(p)
    p.add_argument("--cap", type=int, default=DEFAULT_EXACT_CAP,
                   help="max K for enumeration (default %(default)s)")
    p.add_argument("--threads", type=int, default=_default_threads(),
                   help=f"enumeration threads (default ${THREADS_ENV} or cpu count)")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--json", help="also write a JSON spectrum with metadata")
    p.add_argument("--plot", help="also render the spectrum to this image file")
    p.set_defaults(func=_cmd_wef_exact)

    p = sub.add_parser("wef-approx", help="approximate weight spectrum")
    _add_code_args(p)
    p.add_argument("--mode", choices=("randomized", "improved", "exact-block"),
                   default="improved")
    p.add_argument("--n-th", type=int, default=None,
                   help="threshold block length (default min(32, N))")
    p.add_argument("--base-cap", type=int, default=DEFAULT_BASE_CAP,
                   help="log2 work cap per base-case enumeration (default %(default)s)")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--json", help="also write a JSON spectrum with metadata and PMF")
    p.add_argument("--plot", help="also render the spectrum to this image file")
    p.set_defaults(func=_cmd_wef_approx)

    p = sub.add_parser("bound", help="union bound over an SNR grid")
    p.add_argument("--spectrum", required=True, help="spectrum CSV or JSON from wef-*")
    p.add_argument("--snr", required=True, help="SNR grid in dB: start:step:stop")
    p.add_argument("--convention", choices=("esn0", "ebn0"), default="esn0")
    p.add_argument("--rate", type=float, help="code rate K/N (needed for ebn0 with CSV input)")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--plot", help="also render the bound curve to this image file")
    p.set_defaults(func=_cmd_bound)

    p = sub.add_parser("design", help="rate-profile design by simulated annealing")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--gen", default="133")
    p.add_argument("--start", choices=PROFILE_SOURCES, default="rm1",
                   help="starting profile source")
    p.add_argument("--start-file", help="profile file for --start file")
    p.add_argument("--design-snr-db", type=float, default=2.0)
    p.add_argument("--t-max", type=float, default=1e-3)
    p.add_argument("--t-min", type=float, default=1e-4)
    p.add_argument("--cooling-a", type=float, default=0.99)
    p.add_argument("--snr-db", type=float, default=3.0, help="cost SNR in dB")
    p.add_argument("--convention", choices=("esn0", "ebn0"), default="esn0")
    p.add_argument("--n-th", type=int, default=None)
    p.add_argument("--mode", choices=("randomized", "improved", "exact-block"),
                   default="improved")
    p.add_argument("--space", choices=("free", "rm_constrained"), default="free")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-proposals", type=int, default=100_000)
    p.add_argument("--out-profile", required=True, help="designed profile JSON")
    p.add_argument("--out-trace", required=True, help="acceptance trace CSV")
    p.add_argument("--plot", help="also render the cost trace to this image file")
    p.set_defaults(func=_cmd_design)

    p = sub.add_parser("simulate", help="Monte-Carlo frame error rate")
    _add_code_args(p)
    p.add_argument("--decoder", choices=("scl", "ml"), default="scl")
    p.add_argument("--list", type=int, default=32, help="SCL list size")
    p.add_argument("--snr", required=True, help="SNR grid in dB: start:step:stop")
    p.add_argument("--convention", choices=("esn0", "ebn0"), default="esn0")
    p.add_argument("--max-trials", type=int, default=100_000)
    p.add_argument("--max-errors", type=int, default=100)
    p.add_argument("--ml-cap", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--plot", help="also render the FER curve to this image file")
    p.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CapacityError as exc:
        print(f"capacity error: {exc} (raise --cap / --base-cap / --ml-cap "
              f"to force the computation)", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4
    except (ValueError, NoMoveError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
