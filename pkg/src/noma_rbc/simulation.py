"""Single-cell downlink Monte-Carlo engine.

Topology, Rayleigh-fading gain draws, per-interval proportional-fair
scheduling and sum-rate aggregation over intervals and trials.

Gain model: the BS sits at the origin of a 120-degree annular sector; a
user at distance d has power gain |f|^2 * (d / De)^(-gamma) with Rayleigh
power fading |f|^2 ~ Exp(1).  Path loss applies to POWER, calibrated so a
cell-edge user has unit expected gain and therefore sees exactly the
configured edge SNR.  Inter-user links use the same model with independent
fading, drawn per served pair per block.

Randomness uses the counter-based Philox generator.  Each trial's seed is
derived from (master seed, trial index) only, and splits into three child
streams (topology, BS fading, inter-user fading), so any two runs with the
same master seed see identical topologies and BS fading regardless of
scheme, pairing, sweep point or parallel degree.  Within a trial, intervals
are strictly sequential (the PF ledger is a dependency chain); independent
trials may run in parallel.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .core import ChannelParams, PowerSplit, Scheme
from .scheduling import NEIGHBOR_MODES, PAIRINGS, pf_update, schedule_interval

SECTOR_HALF_ANGLE = math.pi / 3.0  # 120-degree sector, centred on the x axis
AVG_RATE_INIT = 1e-3               # PF ledger start value; washed out within tens of intervals
DEFAULT_P1_SWEEP_DB = (-20.0, -15.0, -10.0, -5.0, 0.0)

FADING_MODES = ("iid", "static")


@dataclass(frozen=True)
class SimConfig:
    """Full description of one experiment."""

    users: int = 40
    blocks: int = 4
    edge_radius_m: float = 500.0
    inner_radius_m: float = 50.0
    path_loss_exp: float = 3.0
    edge_snr_db: float = 10.0
    p1_over_p0_db: float = 0.0
    tau: float = 0.01
    alpha: float = 0.2
    scheme: Scheme = Scheme.GBC
    pairing: str = "near-far"
    intervals: int = 1000
    trials: int = 50
    seed: int = 0
    fading: str = "iid"            # redraw per interval, or once per trial ("static")
    neighbors: str = "recompute"   # nearest-pairing neighbour policy
    noise_power: float = 1.0
    cross_check: bool = False      # assert per-pair dominance while serving

    @property
    def p0(self) -> float:
        """BS power giving the configured expected SNR at the cell edge."""
        return self.noise_power * 10.0 ** (self.edge_snr_db / 10.0)

    @property
    def p1(self) -> float:
        return self.p0 * 10.0 ** (self.p1_over_p0_db / 10.0)

    def validate(self) -> list[str]:
        """All violated constraints, empty when the config is usable."""
        errors = []
        if self.users < 2:
            errors.append(f"users must be >= 2, got {self.users}")
        if self.blocks < 1:
            errors.append(f"blocks must be >= 1, got {self.blocks}")
        if self.users < 2 * self.blocks:
            errors.append(f"users ({self.users}) must be >= 2 * blocks ({self.blocks})")
        if not self.inner_radius_m > 0.0:
            errors.append(f"inner_radius_m must be positive, got {self.inner_radius_m}")
        if not self.edge_radius_m > self.inner_radius_m:
            errors.append(
                f"edge_radius_m ({self.edge_radius_m}) must exceed "
                f"inner_radius_m ({self.inner_radius_m})"
            )
        if self.path_loss_exp < 0.0:
            errors.append(f"path_loss_exp must be non-negative, got {self.path_loss_exp}")
        if not 0.0 < self.tau < 1.0:
            errors.append(f"tau must lie in (0, 1), got {self.tau}")
        if not 0.0 <= self.alpha <= 1.0:
            errors.append(f"alpha must lie in [0, 1], got {self.alpha}")
        if not isinstance(self.scheme, Scheme):
            errors.append(f"scheme must be a Scheme, got {self.scheme!r}")
        if self.pairing not in PAIRINGS:
            errors.append(f"pairing must be one of {PAIRINGS}, got {self.pairing!r}")
        if self.intervals < 1:
            errors.append(f"intervals must be >= 1, got {self.intervals}")
        if self.trials < 1:
            errors.append(f"trials must be >= 1, got {self.trials}")
        if self.fading not in FADING_MODES:
            errors.append(f"fading must be one of {FADING_MODES}, got {self.fading!r}")
        if self.neighbors not in NEIGHBOR_MODES:
            errors.append(f"neighbors must be one of {NEIGHBOR_MODES}, got {self.neighbors!r}")
        if not self.noise_power > 0.0:
            errors.append(f"noise_power must be positive, got {self.noise_power}")
        return errors


def generate_topology(config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """(K, 2) user positions as (radius_m, angle_rad), uniform by area over
    the annular sector (radius pdf proportional to r)."""
    r0, r1 = config.inner_radius_m, config.edge_radius_m
    u = rng.uniform(size=config.users)
    radius = np.sqrt(r0 * r0 + u * (r1 * r1 - r0 * r0))
    angle = rng.uniform(-SECTOR_HALF_ANGLE, SECTOR_HALF_ANGLE, size=config.users)
    return np.column_stack([radius, angle])


def positions_xy(polar: np.ndarray) -> np.ndarray:
    """Cartesian (x, y) for (radius, angle) rows, BS at the origin."""
    return np.column_stack([polar[:, 0] * np.cos(polar[:, 1]),
                            polar[:, 0] * np.sin(polar[:, 1])])


def mean_radius_analytic(config: SimConfig) -> float:
    """Exact mean user distance of the area-uniform annular placement."""
    r0, r1 = config.inner_radius_m, config.edge_radius_m
    return (2.0 / 3.0) * (r1 ** 3 - r0 ** 3) / (r1 ** 2 - r0 ** 2)


def rayleigh_power(rng: np.random.Generator, size=None):
    """|f|^2 for f ~ CN(0, 1); the complex factor exists only here."""
    f = (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / np.sqrt(2.0)
    return np.abs(f) ** 2


def path_gain(distance_m, config: SimConfig):
    """Expected power gain (d / De)^(-gamma); unity at the cell edge."""
    return (np.asarray(distance_m, dtype=float) / config.edge_radius_m) ** (-config.path_loss_exp)


def draw_bs_gains(radii: np.ndarray, config: SimConfig, rng: np.random.Generator) -> np.ndarray:
    """(K, B) true BS power gains for one interval: Rayleigh power fading
    times the distance path gain, i.i.d. per (user, block)."""
    pl = path_gain(radii, config)
    return rayleigh_power(rng, (len(radii), config.blocks)) * pl[:, None]


def draw_pair_gain(distance_m: float, config: SimConfig, rng: np.random.Generator) -> float:
    """True inter-user power gain: same path-loss model as the BS links with
    an independent fading draw."""
    return float(path_gain(distance_m, config) * rayleigh_power(rng))


@dataclass(frozen=True)
class TrialResult:
    mean_sum_rate: float
    role_swaps: int
    r2_clamps: int
    assignments: Optional[tuple] = None  # per-interval assignments when recorded


def run_trial(config: SimConfig, trial_seed, keep_assignments: bool = False) -> TrialResult:
    """One placement realisation: draw a topology, schedule ``intervals``
    times with fresh fading per the redraw policy, PF-update after every
    interval, and return the time-averaged sum rate.

    ``trial_seed`` is an int or a numpy SeedSequence.
    """
    errors = config.validate()
    if errors:
        raise ValueError("invalid config: " + "; ".join(errors))
    ss = trial_seed if isinstance(trial_seed, np.random.SeedSequence) \
        else np.random.SeedSequence(trial_seed)
    # stateless equivalent of ss.spawn(3): spawn() advances the parent's
    # child counter, which would break seed reuse across sweep combinations
    topo_ss, fading_ss, pair_ss = (
        np.random.SeedSequence(entropy=ss.entropy, spawn_key=tuple(ss.spawn_key) + (k,))
        for k in range(3)
    )
    rng_topo = np.random.Generator(np.random.Philox(topo_ss))
    rng_fading = np.random.Generator(np.random.Philox(fading_ss))
    rng_pair = np.random.Generator(np.random.Philox(pair_ss))

    polar = generate_topology(config, rng_topo)
    radii = polar[:, 0]
    xy = positions_xy(polar)
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))

    # inter-user gain estimate C0 * d^(-gamma) with C0 = De^gamma, so the
    # estimate equals the expected power gain of the fading model
    d_safe = dist.copy()
    np.fill_diagonal(d_safe, 1.0)
    est_gain = path_gain(d_safe, config)
    np.fill_diagonal(est_gain, 0.0)

    params = ChannelParams(p0=config.p0, p1=config.p1,
                           n1=config.noise_power, n2=config.noise_power)
    split = PowerSplit(config.alpha)
    avg = np.full(config.users, AVG_RATE_INIT)
    static_gains = draw_bs_gains(radii, config, rng_fading) if config.fading == "static" else None

    def trial_pair_gain(i: int, j: int) -> float:
        return draw_pair_gain(dist[i, j], config, rng_pair)

    total = 0.0
    role_swaps = 0
    r2_clamps = 0
    assignments = [] if keep_assignments else None
    for _ in range(config.intervals):
        gains = static_gains if static_gains is not None \
            else draw_bs_gains(radii, config, rng_fading)
        res = schedule_interval(
            scheme=config.scheme,
            pairing=config.pairing,
            bs_gains=gains,
            dist_matrix=dist,
            avg_rates=avg,
            params=params,
            split=split,
            est_gain=est_gain,
            draw_pair_gain=trial_pair_gain,
            neighbors=config.neighbors,
            cross_check=config.cross_check,
        )
        total += res.sum_rate
        role_swaps += res.role_swaps
        r2_clamps += res.r2_clamps
        if assignments is not None:
            assignments.append(res.assignment)
        avg = pf_update(avg, res.served, config.tau)

    return TrialResult(
        mean_sum_rate=total / config.intervals,
        role_swaps=role_swaps,
        r2_clamps=r2_clamps,
        assignments=tuple(assignments) if assignments is not None else None,
    )


@dataclass(frozen=True)
class SimResult:
    """Aggregate of one (scheme, pairing, sweep point) combination."""

    scheme: str
    pairing: str
    p1_over_p0_db: float
    mean_sum_rate: float
    stderr: float
    trials: int
    intervals: int
    seed: int
    role_swaps: int
    r2_clamps: int
    trial_means: tuple


CSV_COLUMNS = ("scheme", "pairing", "p1_over_p0_db", "mean_sum_rate",
               "stderr", "trials", "intervals", "seed")


def _trial_task(args):
    config, seed_seq = args
    return run_trial(config, seed_seq)


def run_experiment(
    config: SimConfig,
    p1_sweep_db: Optional[Sequence[float]] = None,
    schemes: Optional[Sequence[Scheme]] = None,
    pairings: Optional[Sequence[str]] = None,
    parallel: int = 1,
    progress: Optional[Callable[[str], None]] = None,
) -> list[SimResult]:
    """One SimResult per (scheme, pairing, sweep point).

    Trial seeds depend on the master seed and trial index only, so every
    combination reuses the same topologies and BS fading (common random
    numbers) and the output is independent of the parallel degree.
    """
    sweep = list(p1_sweep_db) if p1_sweep_db is not None else [config.p1_over_p0_db]
    schemes = list(schemes) if schemes is not None else [config.scheme]
    pairings = list(pairings) if pairings is not None else [config.pairing]
    trial_seeds = np.random.SeedSequence(config.seed).spawn(config.trials)

    results = []
    for scheme in schemes:
        for pairing in pairings:
            for p1_db in sweep:
                cfg = replace(config, scheme=scheme, pairing=pairing,
                              p1_over_p0_db=float(p1_db))
                if progress is not None:
                    progress(
                        f"running {scheme.label} / {pairing} / p1_over_p0 = {p1_db} dB "
                        f"({cfg.trials} trials x {cfg.intervals} intervals)"
                    )
                if parallel > 1:
                    with ProcessPoolExecutor(max_workers=parallel) as pool:
                        trials = list(pool.map(_trial_task, [(cfg, s) for s in trial_seeds]))
                else:
                    trials = [run_trial(cfg, s) for s in trial_seeds]
                means = np.array([t.mean_sum_rate for t in trials])
                stderr = float(means.std(ddof=1) / math.sqrt(len(means))) if len(means) > 1 else 0.0
                results.append(SimResult(
                    scheme=scheme.label,
                    pairing=pairing,
                    p1_over_p0_db=float(p1_db),
                    mean_sum_rate=float(means.mean()),
                    stderr=stderr,
                    trials=cfg.trials,
                    intervals=cfg.intervals,
                    seed=cfg.seed,
                    role_swaps=sum(t.role_swaps for t in trials),
                    r2_clamps=sum(t.r2_clamps for t in trials),
                    trial_means=tuple(float(m) for m in means),
                ))
    return results


def write_results_csv(results: Sequence[SimResult], path) -> None:
    """Results CSV: one row per combination, header row always present."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for r in results:
            writer.writerow([
                r.scheme, r.pairing, r.p1_over_p0_db, r.mean_sum_rate,
                r.stderr, r.trials, r.intervals, r.seed,
            ])
