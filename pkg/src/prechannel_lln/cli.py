"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 usage, config or I/O error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .ensembles import generate
from .experiments import (
    DIAGONAL_TOL,
    LEMMA_MODES,
    EnumerationGuardError,
    conjecture_probe,
    run_lln_sweep,
    verify_diagonal_identity,
    verify_lemma_suite,
)
from .prob import centered
from .semigroup import chernoff_trajectory
from .serialization import config_digest, config_from_dict, config_to_dict, dumps, save_ensemble

SEED_ENV = "PRECHANNEL_LLN_SEED"

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def resolve_seed(cli_seed: int | None, config_seed=None) -> int:
    """``--seed`` beats the config file, which beats the environment; default 0."""
    if cli_seed is not None:
        return int(cli_seed)
    if config_seed is not None:
        return int(config_seed)
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV}={env!r} is not an integer") from None
    return 0


def _load_config(args):
    if not args.config:
        raise UsageError("--config is required")
    path = Path(args.config)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if getattr(args, "grid_points", None) is not None:
        grid = data.get("grid", {})
        data["grid"] = {"T": grid.get("T", (grid.get("points") or [1.0])[-1]), "count": args.grid_points}
    seed = resolve_seed(args.seed, data.get("seed"))
    try:
        config = config_from_dict(data, base_dir=path.parent, seed_override=seed)
    except OSError as exc:
        raise UsageError(f"cannot read ensemble referenced by {path}: {exc}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"invalid config {path}: {exc}") from None
    return config, path


def _out_dir(args) -> Path:
    out = Path(args.out or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from None
    return out


def _write(path: Path, text: str) -> Path:
    try:
        path.write_text(text)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None
    return path


def _write_csv(path: Path, header, rows) -> Path:
    try:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(header)
            writer.writerows(rows)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None
    return path


def _manifest(out: Path, command: str, config_path, seed: int, outputs, started: float) -> Path:
    manifest = {
        "command": command,
        "config": None if config_path is None else str(config_path),
        "seed": seed,
        "outputs": [str(p) for p in outputs],
        "duration_s": round(time.perf_counter() - started, 6),
        "version": __version__,
    }
    return _write(out / f"{command}_manifest.json", dumps(manifest))


def _workers(args) -> int:
    if args.workers is None:
        return os.cpu_count() or 1
    if args.workers < 1:
        raise UsageError("--workers must be >= 1")
    return args.workers


def cmd_gen_ensemble(args) -> int:
    started = time.perf_counter()
    try:
        params = json.loads(args.params) if args.params else {}
    except json.JSONDecodeError as exc:
        raise UsageError(f"--params is not valid JSON: {exc}") from None
    if not isinstance(params, dict):
        raise UsageError("--params must be a JSON object")
    if args.dim is not None:
        params["dim"] = args.dim
    seed = resolve_seed(args.seed)
    try:
        E = generate(args.family, params, seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not args.out:
        raise UsageError("--out PATH is required for gen-ensemble")
    path = Path(args.out)
    if path.parent != Path("."):
        path.parent.mkdir(parents=True, exist_ok=True)
    try:
        save_ensemble(E, path)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc.strerror}") from None
    _manifest(path.parent, "gen-ensemble", None, seed, [path], started)
    print(f"wrote {path} ({E.size} atoms, dim {E.dim})")
    return EXIT_OK


def cmd_verify(args) -> int:
    started = time.perf_counter()
    config, cfg_path = _load_config(args)
    E = config.ensemble
    rows = []
    for mode in LEMMA_MODES:
        if mode == "superop":
            rep = verify_lemma_suite(centered(E), E, mode)
        else:
            rep = verify_lemma_suite(E, E, mode, x=config.x)
        rows.append([mode, "", "", rep.residual, rep.threshold, rep.passed])
    for n in config.verify_n:
        for t in config.verify_t:
            try:
                rep = verify_diagonal_identity(E, n, t)
            except EnumerationGuardError as exc:
                raise UsageError(str(exc)) from None
            rows.append(["diagonal", n, t, rep.residual, DIAGONAL_TOL, rep.residual <= DIAGONAL_TOL])
            rows.append(["cross-terms", n, t, rep.cross_max, DIAGONAL_TOL, rep.cross_max <= DIAGONAL_TOL])
    ok = all(r[-1] for r in rows)
    print(f"{'check':<14}{'n':>4}{'t':>8}{'residual':>14}{'threshold':>12}  status")
    for name, n, t, res, thr, passed in rows:
        print(f"{name:<14}{n!s:>4}{t!s:>8}{res:>14.3e}{thr:>12.0e}  {'PASS' if passed else 'FAIL'}")
    if args.out:
        out = _out_dir(args)
        path = _write_csv(out / "verify.csv", ["check", "n", "t", "residual", "threshold", "passed"], rows)
        _manifest(out, "verify", cfg_path, config.seed.root, [path], started)
    return EXIT_OK if ok else EXIT_FAILED


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    config, cfg_path = _load_config(args)
    out = _out_dir(args)
    result = run_lln_sweep(config, workers=_workers(args))
    csv_path = _write_csv(out / "sweep.csv", result.CSV_COLUMNS, result.csv_rows())
    payload = {"config": config_to_dict(config), "result": result.to_dict()}
    json_path = _write(out / "sweep.json", dumps(payload))
    _manifest(out, "sweep", cfg_path, config.seed.root, [csv_path, json_path], started)
    for r in result.records:
        print(f"n={r.n:<6d} median={r.median:.4e} q90={r.q90:.4e} exceed={r.exceedance:.3f} chernoff={r.chernoff_error:.3e}")
    print(f"slope={result.slope}")
    return EXIT_OK


def cmd_chernoff(args) -> int:
    started = time.perf_counter()
    config, cfg_path = _load_config(args)
    out = _out_dir(args)
    rows, traj_rows = [], []
    previous = None
    for n in config.n_schedule:
        traj = chernoff_trajectory(config.ensemble, config.x, n, config.grid)
        err = float(traj.max())
        ratio = err / previous if previous else float("nan")
        rows.append([n, err, "nan" if np.isnan(ratio) else ratio])
        traj_rows.extend([n, t, float(v)] for t, v in zip(config.grid.points, traj))
        previous = err
    csv_path = _write_csv(out / "chernoff.csv", ["n", "chernoff_error", "ratio_to_previous"], rows)
    traj_path = _write_csv(out / "chernoff_trajectories.csv", ["n", "t", "value"], traj_rows)
    payload = {"config_hash": config_digest(config), "rows": rows}
    json_path = _write(out / "chernoff.json", dumps(payload))
    _manifest(out, "chernoff", cfg_path, config.seed.root, [csv_path, traj_path, json_path], started)
    for n, err, ratio in rows:
        print(f"n={n:<6d} chernoff_error={err:.4e} ratio={ratio}")
    return EXIT_OK


def cmd_probe_conjecture(args) -> int:
    started = time.perf_counter()
    config, cfg_path = _load_config(args)
    out = _out_dir(args)
    workers = _workers(args)
    probes = [
        conjecture_probe(
            config.ensemble, config.x, config.n_schedule, config.grid, p, config.seed, config.trials, workers
        )
        for p in config.probe_p
    ]
    rows = [[n, pr.p, float(m)] for pr in probes for n, m in zip(pr.n_schedule, pr.medians)]
    csv_path = _write_csv(out / "probe.csv", ["n", "p", "median"], rows)
    payload = {
        "config_hash": config_digest(config),
        "label": "empirical evidence only",
        "probes": [pr.to_dict() for pr in probes],
    }
    json_path = _write(out / "probe.json", dumps(payload))
    _manifest(out, "probe-conjecture", cfg_path, config.seed.root, [csv_path, json_path], started)
    print("empirical evidence only; no pass/fail")
    for n, p, m in rows:
        print(f"n={n:<6d} p={p:<8.4g} median={m:.4e}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="prechannel-lln",
        description="Law of large numbers for compositions of random pre-channel semigroups.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--out", help="output directory (file path for gen-ensemble)")
        p.add_argument("--seed", type=int, help=f"root seed; overrides the config and ${SEED_ENV}")
        p.add_argument("--workers", type=int, help="worker processes (default: all cores)")
        p.add_argument("--grid-points", type=int, help="override the number of uniform grid points")

    g = sub.add_parser("gen-ensemble", help="generate and save an ensemble")
    g.add_argument("--family", required=True, help="two-point, ginibre, lindblad-like or uniform-atoms")
    g.add_argument("--params", help="JSON object of family parameters")
    g.add_argument("--dim", type=int, help="Hilbert space dimension (shortcut for params.dim)")
    common(g, config=False)
    g.set_defaults(func=cmd_gen_ensemble)

    for name, func, text in (
        ("verify", cmd_verify, "exact lemma and diagonal-identity checks"),
        ("sweep", cmd_sweep, "Monte-Carlo LLN sweep over the n schedule"),
        ("chernoff", cmd_chernoff, "exact gap between exp(E[A]t) and E W_n(t)"),
        ("probe-conjecture", cmd_probe_conjecture, "sweep medians in Schatten p-norms"),
    ):
        p = sub.add_parser(name, help=text)
        common(p)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
