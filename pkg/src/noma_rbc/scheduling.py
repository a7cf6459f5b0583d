"""User pairing and proportional-fair scheduling.

Two pairing policies fill the per-interval resource blocks:

* near-far: for each block the users are split into a strong-gain half and
  a weak-gain half by that block's BS gains; the relay user is picked from
  the strong half by the proportional-fair ratio of its achievable r1, then
  the second user from the weak half by the PF ratio of r2 given that
  relay.
* nearest: every candidate relay is scored jointly with its nearest
  remaining neighbour (PF ratio of its own r1 plus the PF ratio of the
  neighbour's r2) and the best-scoring candidate becomes the relay, its
  neighbour the second user.

Selection metrics use true BS-link gains but only a distance-based
estimate of the inter-user gain (the scheduler knows positions, not the
inter-user fading).  Served rates are then computed with true gains on all
links, the inter-user fading being drawn per served pair.  If a selected
pair violates the degraded role ordering on its true BS gains (possible
under nearest pairing), roles are swapped before serving and the event is
counted.

Blocks are processed in order with cumulative removals, so no user is
scheduled twice within one interval.  Every tie-break picks the lowest
user index; identical inputs give identical assignments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ChannelParams, PowerSplit, Scheme
from .rates import relay_rate_bits, second_rate_bits, serve_pair

PAIRINGS = ("near-far", "nearest")
NEIGHBOR_MODES = ("recompute", "static")


def split_groups(block_gains: np.ndarray, ids=None):
    """Strong-gain half (ceil(n/2)) and weak half of the given users.

    Operates on all users by default or on the subset ``ids``.  Both halves
    come back as ascending index arrays; gain ties break to the lower
    index.
    """
    gains = np.asarray(block_gains, dtype=float)
    ids = np.arange(gains.shape[0]) if ids is None else np.asarray(ids, dtype=int)
    order = ids[np.lexsort((ids, -gains[ids]))]
    n_strong = (len(ids) + 1) // 2
    return np.sort(order[:n_strong]), np.sort(order[n_strong:])


def _pf_argmax(ids, score: Callable[[int], float]) -> int:
    """Index with the largest score; first (lowest) index wins ties."""
    best_id, best = -1, -math.inf
    for i in ids:
        s = score(int(i))
        if s > best:
            best, best_id = s, int(i)
    return best_id


def near_far_pair(
    g1_ids,
    g2_ids,
    block_gains: np.ndarray,
    avg_rates: np.ndarray,
    est_gain: np.ndarray,
    scheme: Scheme,
    params: ChannelParams,
    split: PowerSplit,
) -> tuple[int, int]:
    """(relay, second) for one block under near-far pairing.

    ``block_gains`` holds that block's true per-user BS power gains,
    ``est_gain[i, j]`` the distance-based inter-user power-gain estimate.
    The relay stage needs only each candidate's own BS gain; the second
    stage scores r2 given the chosen relay.
    """
    if len(g1_ids) == 0 or len(g2_ids) == 0:
        raise ValueError("empty candidate group")
    k1 = _pf_argmax(
        g1_ids,
        lambda i: relay_rate_bits(scheme, block_gains[i], params, split) / avg_rates[i],
    )
    k2 = _pf_argmax(
        g2_ids,
        lambda j: second_rate_bits(
            scheme, block_gains[k1], block_gains[j], est_gain[k1, j], params, split
        ) / avg_rates[j],
    )
    return k1, k2


def nearest_remaining(ids, dist_matrix: np.ndarray) -> dict[int, int]:
    """Nearest neighbour of each listed user among the listed users,
    Euclidean distance, ties to the lower index."""
    ids = np.sort(np.asarray(ids, dtype=int))
    if len(ids) < 2:
        raise ValueError("need at least two users to form neighbours")
    sub = dist_matrix[np.ix_(ids, ids)].copy()
    np.fill_diagonal(sub, np.inf)
    nearest = ids[np.argmin(sub, axis=1)]  # argmin returns the first (lowest id) tie
    return {int(i): int(j) for i, j in zip(ids, nearest)}


def nearest_neighbor_pair(
    ids,
    dist_matrix: np.ndarray,
    block_gains: np.ndarray,
    avg_rates: np.ndarray,
    est_gain: np.ndarray,
    scheme: Scheme,
    params: ChannelParams,
    split: PowerSplit,
    neighbor_of: Optional[dict] = None,
) -> tuple[int, int]:
    """(relay, second) for one block under nearest-neighbour pairing.

    Each candidate i is evaluated as the relay with its neighbour N(i) as
    the second user; the joint PF metric r1(i)/avg(i) + r2(N(i)|i)/avg(N(i))
    decides.  ``neighbor_of`` overrides the nearest-remaining map (static
    neighbour mode); candidates whose mapped neighbour is unavailable are
    skipped.
    """
    ids = np.sort(np.asarray(ids, dtype=int))
    if len(ids) < 2:
        raise ValueError("fewer than two remaining users")
    if neighbor_of is None:
        neighbor_of = nearest_remaining(ids, dist_matrix)
        candidates = ids
    else:
        present = set(int(i) for i in ids)
        candidates = [
            i for i in ids
            if neighbor_of.get(int(i)) in present and neighbor_of[int(i)] != int(i)
        ]
        if not candidates:
            raise ValueError("no candidate has an available neighbour")

    def metric(i: int) -> float:
        j = neighbor_of[i]
        r1 = relay_rate_bits(scheme, block_gains[i], params, split)
        r2 = second_rate_bits(
            scheme, block_gains[i], block_gains[j], est_gain[i, j], params, split
        )
        return r1 / avg_rates[i] + r2 / avg_rates[j]

    k1 = _pf_argmax(candidates, metric)
    return k1, neighbor_of[k1]


def pf_update(avg_rates: np.ndarray, served_rates: np.ndarray, tau: float) -> np.ndarray:
    """One forgetting-factor update of the average-rate ledger; unscheduled
    users contribute a served rate of zero."""
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau!r}")
    avg = np.asarray(avg_rates, dtype=float)
    served = np.asarray(served_rates, dtype=float)
    return (1.0 - tau) * avg + tau * served


@dataclass(frozen=True)
class IntervalResult:
    """Outcome of scheduling one interval."""

    assignment: tuple     # ((relay, second), ...) per block, roles as served
    block_rates: tuple    # ((r1, r2), ...) per block
    served: np.ndarray    # (K,) per-user served rate this interval
    sum_rate: float
    role_swaps: int
    r2_clamps: int


def _cross_check_pair(scheme, g01, g02, g12, params, split, sr) -> None:
    """Per-pair dominance checks against the plain superposition baseline."""
    base = serve_pair(Scheme.GBC, g01, g02, 0.0, params, split)
    if scheme is Scheme.RBC_DF:
        ok = sr.r1 == base.r1 and sr.r2 >= base.r2 - 1e-12
    elif scheme is Scheme.RBC_CF_DPC:
        ok = sr.r1 == base.r1 and sr.r2 >= base.r2 - 1e-6
    elif scheme is Scheme.RBC_CF:
        ok = sr.r2 >= base.r2 - 1e-6
    else:
        return
    if not ok:
        raise RuntimeError(
            f"per-pair dominance violated for {scheme.label}: "
            f"served=({sr.r1}, {sr.r2}) baseline=({base.r1}, {base.r2}) "
            f"g01={g01} g02={g02} g12={g12} alpha={split.alpha}"
        )


def schedule_interval(
    scheme: Scheme,
    pairing: str,
    bs_gains: np.ndarray,
    dist_matrix: np.ndarray,
    avg_rates: np.ndarray,
    params: ChannelParams,
    split: PowerSplit,
    est_gain: np.ndarray,
    draw_pair_gain: Callable[[int, int], float],
    neighbors: str = "recompute",
    cross_check: bool = False,
) -> IntervalResult:
    """Assign and serve all blocks of one scheduling interval.

    ``bs_gains`` is (K, B) with this interval's true BS power gains,
    ``est_gain`` the (K, K) inter-user power-gain estimates and
    ``draw_pair_gain(i, j)`` the true inter-user gain sampler used at serve
    time.  Blocks run in order with cumulative removals.  When removals
    exhaust one near-far half for a block (possible only for small K
    relative to B, since group membership is per block), the remaining
    users are re-split for that block.
    """
    if pairing not in PAIRINGS:
        raise ValueError(f"unknown pairing {pairing!r}; expected one of {PAIRINGS}")
    if neighbors not in NEIGHBOR_MODES:
        raise ValueError(f"unknown neighbour mode {neighbors!r}; expected one of {NEIGHBOR_MODES}")
    n_users, n_blocks = bs_gains.shape
    if n_users < 2 * n_blocks:
        raise ValueError(f"{n_users} users cannot fill {n_blocks} blocks with pairs")

    available = np.ones(n_users, dtype=bool)
    static_map = None
    if pairing == "nearest" and neighbors == "static":
        static_map = nearest_remaining(np.arange(n_users), dist_matrix)

    assignment = []
    block_rates = []
    served = np.zeros(n_users)
    role_swaps = 0
    r2_clamps = 0

    for b in range(n_blocks):
        ids = np.flatnonzero(available)
        if pairing == "near-far":
            g1_ids, g2_ids = split_groups(bs_gains[:, b])
            g1_ids = g1_ids[available[g1_ids]]
            g2_ids = g2_ids[available[g2_ids]]
            if len(g1_ids) == 0 or len(g2_ids) == 0:
                g1_ids, g2_ids = split_groups(bs_gains[:, b], ids=ids)
            k1, k2 = near_far_pair(
                g1_ids, g2_ids, bs_gains[:, b], avg_rates, est_gain,
                scheme, params, split,
            )
        else:
            neighbor_of = static_map
            if neighbor_of is not None:
                present = set(int(i) for i in ids)
                if not any(
                    neighbor_of[int(i)] in present and neighbor_of[int(i)] != int(i)
                    for i in ids
                ):
                    neighbor_of = None  # static map exhausted; recompute for this block
            k1, k2 = nearest_neighbor_pair(
                ids, dist_matrix, bs_gains[:, b], avg_rates, est_gain,
                scheme, params, split, neighbor_of=neighbor_of,
            )
        available[k1] = False
        available[k2] = False

        relay, second = k1, k2
        if bs_gains[relay, b] * params.n2 < bs_gains[second, b] * params.n1:
            relay, second = second, relay
            role_swaps += 1
        g12 = 0.0 if scheme is Scheme.GBC else draw_pair_gain(relay, second)
        sr = serve_pair(scheme, bs_gains[relay, b], bs_gains[second, b], g12, params, split)
        if sr.r2_clamped:
            r2_clamps += 1
        if cross_check:
            _cross_check_pair(
                scheme, bs_gains[relay, b], bs_gains[second, b], g12, params, split, sr
            )
        served[relay] += sr.r1
        served[second] += sr.r2
        assignment.append((relay, second))
        block_rates.append((sr.r1, sr.r2))

    return IntervalResult(
        assignment=tuple(assignment),
        block_rates=tuple(block_rates),
        served=served,
        sum_rate=float(sum(r1 + r2 for r1, r2 in block_rates)),
        role_swaps=role_swaps,
        r2_clamps=r2_clamps,
    )
