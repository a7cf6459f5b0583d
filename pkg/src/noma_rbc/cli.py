"""Command-line interface.

Three subcommands wire configs to the library:

* ``region``    rate-region alpha sweeps per scheme, emitted as CSV
* ``simulate``  Monte-Carlo cell experiments per a YAML config, emitted as
                CSV plus a JSON run manifest
* ``verify``    randomized closed-form-vs-oracle equivalence checks

Exit codes: 0 success, 2 config error, 3 verification failure.  Progress
and status go to stderr; ``verify`` prints its report on stdout.  Every
output file lands inside the declared output directory and is paired with
the manifest that produced it.  dB-valued inputs carry an explicit ``_db``
suffix; everything is converted to linear units on entry.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .core import ChannelParams, CompressionNoise, LinkGains, Scheme, is_degraded_ordered
from .oracle import random_verification_draw, verify_scheme
from .rates import sweep_region, uniform_alpha_grid
from .simulation import SimConfig, run_experiment, write_results_csv

EXIT_OK = 0
EXIT_CONFIG_ERROR = 2
EXIT_VERIFY_FAILED = 3

VERIFY_TOL_NATS = 1e-9
DEFAULT_VERIFY_COUNT = 1000
DEFAULT_VERIFY_SEED = 20240

ALL_SCHEMES = tuple(Scheme)

_REGION_KEYS = {
    "g01", "g02", "g12", "p0_db", "p1_db", "n1", "n2",
    "alpha_grid", "alpha", "schemes", "n_hat",
}
_SIM_REQUIRED_KEYS = ("users", "blocks", "intervals", "trials", "seed")
_SIM_KEYS = {
    "users", "blocks", "edge_radius_m", "inner_radius_m", "path_loss_exp",
    "edge_snr_db", "p1_over_p0_db", "tau", "alpha", "scheme", "schemes",
    "pairing", "pairings", "intervals", "trials", "seed", "fading",
    "neighbors", "noise_power", "cross_check",
}


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _info(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_yaml(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh)
    except OSError as exc:
        raise ValueError(f"cannot read config {path!r}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ValueError(f"cannot parse config {path!r}: {exc}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ValueError(f"config {path!r} must be a mapping of keys to values")
    return data


def _parse_schemes(text) -> list[Scheme]:
    if isinstance(text, str):
        labels = [t for t in text.split(",") if t.strip()]
    else:
        labels = list(text)
    return [Scheme.from_label(str(t)) for t in labels]


def _parse_alpha_grid(spec) -> list[float]:
    """Either a point count (uniform grid on [0, 1]) or an explicit
    comma-separated / list grid."""
    if isinstance(spec, (list, tuple)):
        return [float(x) for x in spec]
    text = str(spec).strip()
    if "," in text:
        return [float(t) for t in text.split(",") if t.strip()]
    return list(uniform_alpha_grid(int(text)))


def _jsonable(value):
    if isinstance(value, Scheme):
        return value.label
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    return value


def _write_manifest(out_dir: Path, stem: str, command: str, config_snapshot: dict,
                    seed, outputs, started: float) -> Path:
    path = out_dir / f"{stem}.manifest.json"
    manifest = {
        "artifact_version": __version__,
        "command": command,
        "config": _jsonable(config_snapshot),
        "seed": seed,
        "outputs": [str(o) for o in outputs],
        "duration_s": round(time.monotonic() - started, 3),
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


# ---------------------------------------------------------------------------
# region

def cmd_region(args) -> int:
    started = time.monotonic()
    try:
        file_cfg = _load_yaml(args.config) if args.config else {}
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG_ERROR

    errors = [f"unknown config key {k!r}" for k in sorted(set(file_cfg) - _REGION_KEYS)]

    def pick(key, flag_value, default=None):
        return flag_value if flag_value is not None else file_cfg.get(key, default)

    g01 = pick("g01", args.g01)
    g02 = pick("g02", args.g02)
    g12 = pick("g12", args.g12, 0.0)
    p0_db = pick("p0_db", args.p0_db)
    p1_db = pick("p1_db", args.p1_db, None)  # absent relay power means p1 = 0
    n1 = pick("n1", args.n1, 1.0)
    n2 = pick("n2", args.n2, 1.0)
    alpha_mark = pick("alpha", args.alpha, 0.2)
    grid_spec = pick("alpha_grid", args.alpha_grid, None)
    n_hat = pick("n_hat", args.n_hat, None)
    schemes_spec = args.scheme if args.scheme is not None else file_cfg.get("schemes")

    for name, value in (("g01", g01), ("g02", g02), ("p0_db", p0_db)):
        if value is None:
            errors.append(f"missing required key {name!r}")
    if errors:
        for e in errors:
            _err(e)
        return EXIT_CONFIG_ERROR

    try:
        gains = LinkGains(g01=float(g01), g02=float(g02), g12=float(g12))
        params = ChannelParams(
            p0=10.0 ** (float(p0_db) / 10.0),
            p1=0.0 if p1_db is None else 10.0 ** (float(p1_db) / 10.0),
            n1=float(n1), n2=float(n2),
        )
        schemes = _parse_schemes(schemes_spec) if schemes_spec else list(ALL_SCHEMES)
        grid = sorted(set(
            _parse_alpha_grid(grid_spec) if grid_spec is not None else uniform_alpha_grid()
        ))
        fixed = CompressionNoise(float(n_hat)) if n_hat is not None else None
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG_ERROR

    if not is_degraded_ordered(gains, params):
        _err("gains violate the degraded ordering (g01/n1 >= g02/n2); "
             "swap the two user roles and rerun")
        return EXIT_CONFIG_ERROR

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    csv_path = out_dir / "rate_region.csv"
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scheme", "alpha", "r1_bits", "r2_bits", "n_hat", "alpha_marked"])
        for scheme in schemes:
            curve = sweep_region(
                scheme, gains, params, grid,
                optimize=fixed is None, n_hat=fixed,
            )
            for idx, (alpha, pair) in enumerate(curve.points):
                nh = curve.n_hats[idx].n_hat if curve.n_hats is not None else ""
                writer.writerow([
                    scheme.label, alpha, pair.r1, pair.r2, nh,
                    1 if abs(alpha - float(alpha_mark)) <= 1e-12 else 0,
                ])
    snapshot = {
        "g01": gains.g01, "g02": gains.g02, "g12": gains.g12,
        "p0": params.p0, "p1": params.p1, "n1": params.n1, "n2": params.n2,
        "alpha_grid_points": len(grid), "alpha_mark": float(alpha_mark),
        "schemes": [s.label for s in schemes],
        "n_hat": fixed.n_hat if fixed is not None else "optimized",
    }
    _write_manifest(out_dir, "rate_region", "region", snapshot, None, [csv_path], started)
    _info(f"wrote {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    started = time.monotonic()
    try:
        file_cfg = _load_yaml(args.config)
    except ValueError as exc:
        _err(str(exc))
        return EXIT_CONFIG_ERROR

    # enumerate every config failure at once: unknown keys, missing keys,
    # unparsable values and constraint violations
    errors = [f"unknown config key {k!r}" for k in sorted(set(file_cfg) - _SIM_KEYS)]
    overridden = {"seed": args.seed, "intervals": args.intervals, "trials": args.trials,
                  "alpha": args.alpha}
    for key in _SIM_REQUIRED_KEYS:
        if file_cfg.get(key) is None and overridden.get(key) is None:
            errors.append(f"missing required key {key!r}")

    schemes = pairings = sweep = None
    base = None
    try:
        scheme_spec = (args.scheme if args.scheme is not None
                       else file_cfg.get("schemes", file_cfg.get("scheme", "gbc")))
        schemes = _parse_schemes(scheme_spec)
        pairing_spec = (args.pairing if args.pairing is not None
                        else file_cfg.get("pairings", file_cfg.get("pairing", "near-far")))
        pairings = [pairing_spec] if isinstance(pairing_spec, str) else list(pairing_spec)
        raw_sweep = file_cfg.get("p1_over_p0_db", 0.0)
        sweep = [float(x) for x in (raw_sweep if isinstance(raw_sweep, (list, tuple)) else [raw_sweep])]
        fields = {
            k: file_cfg[k] for k in file_cfg
            if k in _SIM_KEYS - {"scheme", "schemes", "pairing", "pairings", "p1_over_p0_db"}
        }
        base = SimConfig(**fields)
        for key, value in overridden.items():
            if value is not None:
                base = replace(base, **{key: value})
        base = replace(base, scheme=schemes[0], pairing=pairings[0], p1_over_p0_db=sweep[0])
        errors.extend(base.validate())
    except (TypeError, ValueError) as exc:
        errors.append(str(exc))
    if errors:
        for e in errors:
            _err(e)
        return EXIT_CONFIG_ERROR

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = run_experiment(
        base, p1_sweep_db=sweep, schemes=schemes, pairings=pairings,
        parallel=args.parallel, progress=_info,
    )
    csv_path = out_dir / "sum_rate.csv"
    write_results_csv(results, csv_path)
    snapshot = {f: getattr(base, f) for f in base.__dataclass_fields__}
    snapshot.update({
        "schemes": [s.label for s in schemes],
        "pairings": pairings,
        "p1_over_p0_db": sweep,
        "parallel": args.parallel,
    })
    _write_manifest(out_dir, "sum_rate", "simulate", snapshot, base.seed, [csv_path], started)
    _info(f"wrote {csv_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# verify

def cmd_verify(args) -> int:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(args.seed)))
    worst_delta = 0.0
    worst = None
    for _ in range(args.count):
        gains, params, split, n_hat = random_verification_draw(rng)
        for scheme in ALL_SCHEMES:
            report = verify_scheme(gains, params, split, n_hat, scheme)
            delta = report.max_delta_nats
            if args.inject_error:
                delta += 1e-6  # negative control: force a visible mismatch
            if delta > worst_delta:
                worst_delta = delta
                worst = (gains, params, split, n_hat, scheme)
    print(f"verified {len(ALL_SCHEMES)} schemes x {args.count} draws: "
          f"max delta = {worst_delta:.3e} nats (tolerance {VERIFY_TOL_NATS:.0e})")
    if worst_delta > VERIFY_TOL_NATS:
        gains, params, split, n_hat, scheme = worst
        print("worst case:")
        print(f"  scheme = {scheme.label}")
        print(f"  gains  = g01={gains.g01!r} g02={gains.g02!r} g12={gains.g12!r}")
        print(f"  params = p0={params.p0!r} p1={params.p1!r} n1={params.n1!r} n2={params.n2!r}")
        print(f"  alpha  = {split.alpha!r}  n_hat = {n_hat.n_hat!r}")
        return EXIT_VERIFY_FAILED
    return EXIT_OK


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="noma-rbc",
        description="Rate regions and cell-level simulation for NOMA with a relaying strong user",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    region = sub.add_parser("region", help="alpha-sweep rate regions per scheme (CSV)")
    region.add_argument("--config", help="YAML config file; flags override file values")
    region.add_argument("--out", default="out", help="output directory (default: out)")
    region.add_argument("--g01", type=float, help="BS to relay-user power gain")
    region.add_argument("--g02", type=float, help="BS to second-user power gain")
    region.add_argument("--g12", type=float, help="relay-user to second-user power gain")
    region.add_argument("--p0-db", dest="p0_db", type=float, help="BS power over noise, dB")
    region.add_argument("--p1-db", dest="p1_db", type=float, help="relay power over noise, dB")
    region.add_argument("--n1", type=float, help="relay-user noise power (default 1)")
    region.add_argument("--n2", type=float, help="second-user noise power (default 1)")
    region.add_argument("--alpha-grid", dest="alpha_grid",
                        help="point count or comma-separated alphas (default 201 uniform)")
    region.add_argument("--alpha", type=float,
                        help="alpha value marked in the output (default 0.2)")
    region.add_argument("--scheme", help="comma-separated scheme list (default all)")
    region.add_argument("--n-hat", dest="n_hat", type=float,
                        help="fixed compression noise; omit to optimize per point")
    region.set_defaults(func=cmd_region)

    simulate = sub.add_parser("simulate", help="Monte-Carlo cell experiment (CSV + manifest)")
    simulate.add_argument("--config", required=True, help="YAML experiment config")
    simulate.add_argument("--out", default="out", help="output directory (default: out)")
    simulate.add_argument("--seed", type=int, help="override the config seed")
    simulate.add_argument("--scheme", help="comma-separated scheme list override")
    simulate.add_argument("--pairing", choices=["near-far", "nearest"],
                          help="pairing method override")
    simulate.add_argument("--alpha", type=float, help="power-split override")
    simulate.add_argument("--intervals", type=int, help="scheduling intervals override")
    simulate.add_argument("--trials", type=int, help="trial count override")
    simulate.add_argument("--parallel", type=int, default=1,
                          help="worker processes for trials (output is identical for any degree)")
    simulate.set_defaults(func=cmd_simulate)

    verify = sub.add_parser("verify", help="randomized closed-form vs oracle equivalence check")
    verify.add_argument("--count", type=int, default=DEFAULT_VERIFY_COUNT,
                        help=f"number of random draws (default {DEFAULT_VERIFY_COUNT})")
    verify.add_argument("--seed", type=int, default=DEFAULT_VERIFY_SEED)
    verify.add_argument("--inject-error", action="store_true",
                        help="testing aid: perturb the comparison to prove failures are caught")
    verify.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
