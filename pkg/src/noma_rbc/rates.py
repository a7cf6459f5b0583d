"""Closed-form achievable rate pairs for the four component-channel schemes.

Notation: power gains g01 (BS to relay user), g02 (BS to second user), g12
(relay user to second user); BS power p0 split as ``a = alpha`` to the relay
user's message and ``ab = 1 - alpha`` to the second user's; relay transmit
power p1; noise powers n1, n2.

  GBC         r1 = log2(1 + g01*a*p0 / n1)
              r2 = log2(1 + g02*ab*p0 / (g02*a*p0 + n2))
  RBC-DF      r1 as GBC
              r2 = min(forwarding bound, relay decoding bound)
  RBC-CF      r1 = log2(1 + g01*a*p0 / (g01*ab*p0 + n1))   (no SIC at the relay user)
              r2 = min(cut-set bound, forwarding bound - compression loss), clamped at 0
  RBC-CF+DPC  r1 as GBC (transmitter-side pre-cancellation of the second
              user's component), r2 as RBC-CF

The CF second-user rate depends on the compression-noise variance n_hat:
the cut-set bound decreases and the forwarding-minus-loss bound increases
strictly in n_hat, so the max over n_hat of their min sits at the unique
interior crossing whenever one exists.  ``optimize_n_hat`` finds that
crossing in closed form (clearing denominators gives a quadratic in n_hat)
and falls back to a bracketed golden-section search over ``N_HAT_BRACKET``
when no positive root exists, in which case the supremum is approached at a
boundary of the bracket.

GBC and RBC-DF presuppose the degraded role ordering and reject inputs that
violate it; callers own role assignment and swap before calling.  The
scalar helpers ``relay_rate_bits`` / ``second_rate_bits`` / ``serve_pair``
evaluate the formulas literally without the ordering check, which is what
the scheduler's selection metrics require.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import (
    LN2,
    ChannelParams,
    CompressionNoise,
    LinkGains,
    PowerSplit,
    RatePair,
    Scheme,
    is_degraded_ordered,
)

# Fallback search range for the compression-noise variance (log-spaced).
N_HAT_BRACKET = (1e-6, 1e12)

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def _log2_1p(x: float) -> float:
    return math.log1p(x) / LN2


# ---------------------------------------------------------------------------
# scalar formula kernels (no validation, no ordering checks)

def _r1_sic(g01, p0, a, n1):
    """Relay-user rate with the second user's component removed."""
    return _log2_1p(g01 * a * p0 / n1)


def _r1_no_sic(g01, p0, a, ab, n1):
    """Relay-user rate with the second user's component left as noise."""
    return _log2_1p(g01 * a * p0 / (g01 * ab * p0 + n1))


def _r2_gbc(g02, p0, a, ab, n2):
    return _log2_1p(g02 * ab * p0 / (g02 * a * p0 + n2))


def _r2_forward(g02, g12, p0, p1, a, ab, n2):
    """Second-user decoding bound with the relay user's help."""
    return _log2_1p((g02 * ab * p0 + g12 * p1) / (g02 * a * p0 + n2))


def _r2_df_decode(g01, p0, a, ab, n1):
    """Bound from the relay user having to decode the second user's message."""
    return _log2_1p(g01 * ab * p0 / (g01 * a * p0 + n1))


def _cf_terms(g01, g02, g12, p0, p1, a, ab, n1, n2, n_hat):
    """(cut-set, forwarding, compression-loss) bounds of the CF second-user
    rate, in bits."""
    s1 = g01 * a * p0
    s2 = g02 * a * p0
    t1 = g01 * ab * p0
    t2 = g02 * ab * p0
    m2 = s2 + n2
    cutset = _log2_1p(t1 / (n1 + n_hat) + t2 / m2)
    forward = _r2_forward(g02, g12, p0, p1, a, ab, n2)
    loss = _log2_1p(
        n1 * n1 * m2 / (n_hat * (n1 * n2 + n2 * s1 + n1 * s2) + n1 * n2 * s1)
    )
    return cutset, forward, loss


def _cf_r2_args(g01, g02, g12, p0, p1, a, ab, n1, n2, n_hat):
    """Both arguments of the CF second-user min; the second may be negative
    (callers clamp)."""
    cutset, forward, loss = _cf_terms(g01, g02, g12, p0, p1, a, ab, n1, n2, n_hat)
    return cutset, forward - loss


def _cf_r2(g01, g02, g12, p0, p1, a, ab, n1, n2, n_hat):
    first, second = _cf_r2_args(g01, g02, g12, p0, p1, a, ab, n1, n2, n_hat)
    return max(0.0, min(first, second))


# ---------------------------------------------------------------------------
# compression-noise optimisation

def _quadratic_roots(qa: float, qb: float, qc: float) -> list[float]:
    """Real roots of qa*x^2 + qb*x + qc = 0, numerically stable form."""
    if qa == 0.0:
        if qb == 0.0:
            return []
        return [-qc / qb]
    disc = qb * qb - 4.0 * qa * qc
    if disc < 0.0:
        return []
    q = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
    roots = [q / qa]
    if q != 0.0:
        roots.append(qc / q)
    return roots


def _golden_max(fun, lo: float, hi: float, tol: float = 1e-10, max_iter: int = 200):
    """Golden-section maximiser for a unimodal scalar function on [lo, hi]."""
    a_, b_ = lo, hi
    x1 = b_ - _INV_PHI * (b_ - a_)
    x2 = a_ + _INV_PHI * (b_ - a_)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(max_iter):
        if (b_ - a_) <= tol:
            break
        if f1 >= f2:
            b_, x2, f2 = x2, x1, f1
            x1 = b_ - _INV_PHI * (b_ - a_)
            f1 = fun(x1)
        else:
            a_, x1, f1 = x1, x2, f2
            x2 = a_ + _INV_PHI * (b_ - a_)
            f2 = fun(x2)
    x = 0.5 * (a_ + b_)
    return x, fun(x)


def _optimal_n_hat(g01, g02, g12, p0, p1, a, ab, n1, n2):
    """Argmax over n_hat of the CF second-user rate.

    Returns (n_hat, r2_bits, clamped).  The crossing of the two min
    arguments, cleared of denominators, is a quadratic in n_hat; its
    positive root (unique, since cut-set minus forwarding-minus-loss is
    strictly decreasing) is the interior optimum.  Without a positive root
    the supremum sits at a boundary and a golden-section search over
    log10(n_hat) in N_HAT_BRACKET is used instead.
    """
    if ab == 0.0:
        # no power on the second user's message: r2 = 0 for every n_hat
        _, second = _cf_r2_args(g01, g02, g12, p0, p1, a, ab, n1, n2, 1.0)
        return 1.0, 0.0, second < 0.0

    s1 = g01 * a * p0
    s2 = g02 * a * p0
    t1 = g01 * ab * p0
    t2 = g02 * ab * p0
    m2 = s2 + n2
    w = g12 * p1
    dd = n1 * n2 + n2 * s1 + n1 * s2

    # linear-domain crossing: (1 + t1/(n1+x) + t2/m2) * (1 + n1^2*m2/(x*dd + n1*n2*s1))
    #                          = 1 + (t2+w)/m2, cleared of denominators;
    # both sides are products of polynomials linear in x
    la1, la0 = m2 + t2, n1 * (m2 + t2) + t1 * m2
    lb1, lb0 = dd, n1 * n2 * s1 + n1 * n1 * m2
    rr = m2 + t2 + w
    qa = la1 * lb1 - rr * dd
    qb = la1 * lb0 + la0 * lb1 - rr * (n1 * dd + n1 * n2 * s1)
    qc = la0 * lb0 - rr * (n1 * n1 * n2 * s1)

    def objective(n_hat):
        return _cf_r2(g01, g02, g12, p0, p1, a, ab, n1, n2, n_hat)

    candidates = [r for r in _quadratic_roots(qa, qb, qc) if math.isfinite(r) and r > 0.0]
    if candidates:
        best = max(candidates, key=objective)
    else:
        lo, hi = N_HAT_BRACKET
        x, _ = _golden_max(lambda u: objective(10.0 ** u), math.log10(lo), math.log10(hi))
        best = 10.0 ** x
    first, second = _cf_r2_args(g01, g02, g12, p0, p1, a, ab, n1, n2, best)
    return best, max(0.0, min(first, second)), second < 0.0


# ---------------------------------------------------------------------------
# typed scheme operations

def _require_ordered(gains: LinkGains, params: ChannelParams) -> None:
    if not is_degraded_ordered(gains, params):
        raise ValueError(
            "gains violate the degraded ordering (g01/n1 >= g02/n2); "
            "swap user roles before computing rates"
        )


def gbc_rates(gains: LinkGains, params: ChannelParams, split: PowerSplit) -> RatePair:
    """Capacity-region corner point of the plain superposition/SIC scheme."""
    _require_ordered(gains, params)
    a, ab = split.alpha, split.alpha_bar
    return RatePair(
        r1=_r1_sic(gains.g01, params.p0, a, params.n1),
        r2=_r2_gbc(gains.g02, params.p0, a, ab, params.n2),
    )


def rbc_df_rates(gains: LinkGains, params: ChannelParams, split: PowerSplit) -> RatePair:
    """Rates when the relay user decodes and forwards the second user's
    message."""
    _require_ordered(gains, params)
    a, ab = split.alpha, split.alpha_bar
    r2 = min(
        _r2_forward(gains.g02, gains.g12, params.p0, params.p1, a, ab, params.n2),
        _r2_df_decode(gains.g01, params.p0, a, ab, params.n1),
    )
    return RatePair(r1=_r1_sic(gains.g01, params.p0, a, params.n1), r2=r2)


def rbc_cf_rates(
    gains: LinkGains, params: ChannelParams, split: PowerSplit, n_hat: CompressionNoise
) -> RatePair:
    """Rates when the relay user compresses and forwards its observation;
    the relay user cannot cancel the second user's component."""
    a, ab = split.alpha, split.alpha_bar
    r2 = _cf_r2(
        gains.g01, gains.g02, gains.g12, params.p0, params.p1,
        a, ab, params.n1, params.n2, n_hat.n_hat,
    )
    return RatePair(r1=_r1_no_sic(gains.g01, params.p0, a, ab, params.n1), r2=r2)


def rbc_cf_dpc_rates(
    gains: LinkGains, params: ChannelParams, split: PowerSplit, n_hat: CompressionNoise
) -> RatePair:
    """Compress-and-forward with transmitter-side pre-cancellation: r1 is
    restored to the interference-free value, r2 is unchanged."""
    a, ab = split.alpha, split.alpha_bar
    r2 = _cf_r2(
        gains.g01, gains.g02, gains.g12, params.p0, params.p1,
        a, ab, params.n1, params.n2, n_hat.n_hat,
    )
    return RatePair(r1=_r1_sic(gains.g01, params.p0, a, params.n1), r2=r2)


def cf_clamp_active(
    gains: LinkGains, params: ChannelParams, split: PowerSplit, n_hat: CompressionNoise
) -> bool:
    """True when the CF forwarding-minus-loss argument is negative, i.e. the
    r2 clamp at zero is what the rate functions returned."""
    _, second = _cf_r2_args(
        gains.g01, gains.g02, gains.g12, params.p0, params.p1,
        split.alpha, split.alpha_bar, params.n1, params.n2, n_hat.n_hat,
    )
    return second < 0.0


def optimize_n_hat(
    gains: LinkGains,
    params: ChannelParams,
    split: PowerSplit,
    scheme: Scheme = Scheme.RBC_CF_DPC,
) -> tuple[CompressionNoise, RatePair]:
    """Compression-noise variance maximising r2, and the resulting pair.

    ``scheme`` picks which r1 accompanies the optimised r2 (RBC_CF or
    RBC_CF_DPC; their r2 is identical).
    """
    if not scheme.uses_compression:
        raise ValueError(f"scheme {scheme.label} has no compression noise to optimize")
    best, _, _ = _optimal_n_hat(
        gains.g01, gains.g02, gains.g12, params.p0, params.p1,
        split.alpha, split.alpha_bar, params.n1, params.n2,
    )
    n_hat = CompressionNoise(best)
    rate_fn = rbc_cf_rates if scheme is Scheme.RBC_CF else rbc_cf_dpc_rates
    return n_hat, rate_fn(gains, params, split, n_hat)


# ---------------------------------------------------------------------------
# alpha sweeps

DEFAULT_ALPHA_POINTS = 201


def uniform_alpha_grid(n: int = DEFAULT_ALPHA_POINTS) -> tuple[float, ...]:
    if n < 2:
        raise ValueError("alpha grid needs at least 2 points")
    return tuple(np.linspace(0.0, 1.0, n).tolist())


@dataclass(frozen=True)
class RateRegionCurve:
    """Boundary curve of one scheme: rate pairs indexed by the power split,
    plus the compression noise actually used per point for CF schemes."""

    scheme: Scheme
    points: tuple  # ((alpha, RatePair), ...) with strictly increasing alphas
    n_hats: Optional[tuple] = None  # per-point CompressionNoise, CF schemes only


def sweep_region(
    scheme: Scheme,
    gains: LinkGains,
    params: ChannelParams,
    alpha_grid: Sequence[float],
    optimize: bool = True,
    n_hat: Optional[CompressionNoise] = None,
) -> RateRegionCurve:
    """Rate pair per grid alpha.

    For CF schemes the compression noise is optimised per point when
    ``optimize`` is true, otherwise the supplied fixed ``n_hat`` is used.
    """
    grid = [float(x) for x in alpha_grid]
    if not grid:
        raise ValueError("alpha grid is empty")
    if any(not 0.0 <= x <= 1.0 for x in grid):
        raise ValueError("alpha grid values must lie in [0, 1]")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("alpha grid must be strictly increasing")

    points = []
    n_hats = [] if scheme.uses_compression else None
    for alpha in grid:
        split = PowerSplit(alpha)
        if scheme is Scheme.GBC:
            pair = gbc_rates(gains, params, split)
        elif scheme is Scheme.RBC_DF:
            pair = rbc_df_rates(gains, params, split)
        else:
            if optimize:
                point_n_hat, pair = optimize_n_hat(gains, params, split, scheme)
            else:
                if n_hat is None:
                    raise ValueError("fixed n_hat required when optimize=False")
                point_n_hat = n_hat
                rate_fn = rbc_cf_rates if scheme is Scheme.RBC_CF else rbc_cf_dpc_rates
                pair = rate_fn(gains, params, split, point_n_hat)
            n_hats.append(point_n_hat)
        points.append((alpha, pair))
    return RateRegionCurve(
        scheme=scheme,
        points=tuple(points),
        n_hats=tuple(n_hats) if n_hats is not None else None,
    )


# ---------------------------------------------------------------------------
# scalar helpers for the scheduler (literal formula evaluation, no ordering
# checks; selection metrics are computed exactly as written)

@dataclass(frozen=True)
class ServedRates:
    """Rates actually served to one pair, with the compression noise used
    (CF schemes) and whether the r2 clamp at zero fired."""

    r1: float
    r2: float
    n_hat: Optional[float] = None
    r2_clamped: bool = False


def relay_rate_bits(scheme: Scheme, g01: float, params: ChannelParams, split: PowerSplit) -> float:
    """r1 of a candidate relay user, a function of its own BS gain only."""
    if scheme is Scheme.RBC_CF:
        return _r1_no_sic(g01, params.p0, split.alpha, split.alpha_bar, params.n1)
    return _r1_sic(g01, params.p0, split.alpha, params.n1)


def second_rate_bits(
    scheme: Scheme, g01: float, g02: float, g12: float,
    params: ChannelParams, split: PowerSplit,
) -> float:
    """r2 of a candidate pair (relay gain g01, second-user gain g02, cross
    gain g12); CF schemes evaluate at the optimal compression noise."""
    a, ab = split.alpha, split.alpha_bar
    if scheme is Scheme.GBC:
        return _r2_gbc(g02, params.p0, a, ab, params.n2)
    if scheme is Scheme.RBC_DF:
        return min(
            _r2_forward(g02, g12, params.p0, params.p1, a, ab, params.n2),
            _r2_df_decode(g01, params.p0, a, ab, params.n1),
        )
    _, r2, _ = _optimal_n_hat(g01, g02, g12, params.p0, params.p1, a, ab, params.n1, params.n2)
    return r2


def serve_pair(
    scheme: Scheme, g01: float, g02: float, g12: float,
    params: ChannelParams, split: PowerSplit,
) -> ServedRates:
    """Rates served to an ordered pair; CF schemes optimise the compression
    noise for the pair's true gains."""
    a, ab = split.alpha, split.alpha_bar
    if scheme is Scheme.GBC:
        return ServedRates(
            r1=_r1_sic(g01, params.p0, a, params.n1),
            r2=_r2_gbc(g02, params.p0, a, ab, params.n2),
        )
    if scheme is Scheme.RBC_DF:
        r2 = min(
            _r2_forward(g02, g12, params.p0, params.p1, a, ab, params.n2),
            _r2_df_decode(g01, params.p0, a, ab, params.n1),
        )
        return ServedRates(r1=_r1_sic(g01, params.p0, a, params.n1), r2=r2)
    n_hat, r2, clamped = _optimal_n_hat(
        g01, g02, g12, params.p0, params.p1, a, ab, params.n1, params.n2
    )
    if scheme is Scheme.RBC_CF:
        r1 = _r1_no_sic(g01, params.p0, a, ab, params.n1)
    else:
        r1 = _r1_sic(g01, params.p0, a, params.n1)
    return ServedRates(r1=r1, r2=r2, n_hat=n_hat, r2_clamped=clamped)
