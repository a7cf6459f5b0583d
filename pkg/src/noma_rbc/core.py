"""Domain types and validity checks for the two-user downlink model.

One base station serves two users per resource block.  The relay user
(index 1) has the stronger link and may also retransmit; the second user
(index 2) is the weaker one.  Only squared channel magnitudes enter any
rate expression, so gains are carried as non-negative power gains and
complex fading phases exist only inside the fading generator.

All user-facing rates are bits per channel use (base-2 logs).  ``LN2`` is
the single conversion constant between bits and the nats used by the
mutual-information oracle.

Everything here is an immutable value; every operation is a pure function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

LN2 = math.log(2.0)


def bits_to_nats(bits: float) -> float:
    return bits * LN2


def nats_to_bits(nats: float) -> float:
    return nats / LN2


class Scheme(Enum):
    """Component-channel scheme serving one scheduled pair."""

    GBC = "gbc"
    RBC_DF = "rbc-df"
    RBC_CF = "rbc-cf"
    RBC_CF_DPC = "rbc-cf-dpc"

    @classmethod
    def from_label(cls, label: str) -> "Scheme":
        try:
            return cls(str(label).strip().lower())
        except ValueError:
            valid = ", ".join(s.value for s in cls)
            raise ValueError(
                f"unknown scheme {label!r} (expected one of: {valid})"
            ) from None

    @property
    def label(self) -> str:
        return self.value

    @property
    def uses_compression(self) -> bool:
        return self in (Scheme.RBC_CF, Scheme.RBC_CF_DPC)


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")


@dataclass(frozen=True)
class LinkGains:
    """Power gains |h|^2 of the three links: BS to relay user (g01), BS to
    second user (g02) and relay user to second user (g12)."""

    g01: float
    g02: float
    g12: float = 0.0

    def __post_init__(self):
        for name in ("g01", "g02", "g12"):
            value = getattr(self, name)
            _check_finite(name, value)
            if value < 0.0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")


@dataclass(frozen=True)
class ChannelParams:
    """Transmit and noise powers, all linear watts."""

    p0: float          # BS transmit power
    p1: float = 0.0    # relay-user transmit power
    n1: float = 1.0    # noise power at the relay user
    n2: float = 1.0    # noise power at the second user

    def __post_init__(self):
        for name in ("p0", "p1", "n1", "n2"):
            _check_finite(name, getattr(self, name))
        if self.p0 <= 0.0:
            raise ValueError(f"p0 must be positive, got {self.p0!r}")
        if self.p1 < 0.0:
            raise ValueError(f"p1 must be non-negative, got {self.p1!r}")
        for name in ("n1", "n2"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")


@dataclass(frozen=True)
class PowerSplit:
    """Fraction ``alpha`` of BS power on the relay user's message; the rest
    (``alpha_bar``) goes to the second user's message."""

    alpha: float

    def __post_init__(self):
        _check_finite("alpha", self.alpha)
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha!r}")

    @property
    def alpha_bar(self) -> float:
        return 1.0 - self.alpha


@dataclass(frozen=True)
class CompressionNoise:
    """Variance of the quantisation noise added to the relay user's
    compressed observation before forwarding."""

    n_hat: float

    def __post_init__(self):
        _check_finite("n_hat", self.n_hat)
        if self.n_hat <= 0.0:
            raise ValueError(f"n_hat must be positive, got {self.n_hat!r}")


@dataclass(frozen=True)
class RatePair:
    """Achievable rates in bits/channel use: r1 for the relay user, r2 for
    the second user."""

    r1: float
    r2: float

    def __post_init__(self):
        for name in ("r1", "r2"):
            value = getattr(self, name)
            _check_finite(name, value)
            if value < 0.0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")


def is_degraded_ordered(gains: LinkGains, params: ChannelParams) -> bool:
    """True when g01/n1 >= g02/n2, the role ordering every rate formula
    assumes (relay user = noise-normalised strong user)."""
    return gains.g01 * params.n2 >= gains.g02 * params.n1


def noma_condition_holds(gains: LinkGains, params: ChannelParams, split: PowerSplit) -> bool:
    """Power-domain multiplexing condition: the relay user can decode the
    second user's message at least as reliably as the second user itself.

    Holds automatically whenever ``is_degraded_ordered`` does.
    """
    a, ab = split.alpha, split.alpha_bar
    lhs = gains.g01 * ab * params.p0 / (gains.g01 * a * params.p0 + params.n1)
    rhs = gains.g02 * ab * params.p0 / (gains.g02 * a * params.p0 + params.n2)
    return lhs >= rhs


def received_snr_relay(gains: LinkGains, params: ChannelParams, split: PowerSplit) -> float:
    """SNR of the relay user's own signal component after cancelling the
    second user's component."""
    return gains.g01 * split.alpha * params.p0 / params.n1


def received_snr_second(gains: LinkGains, params: ChannelParams, split: PowerSplit) -> float:
    """SNR of the second user's own signal component, interference excluded."""
    return gains.g02 * split.alpha_bar * params.p0 / params.n2


def second_user_sir(split: PowerSplit) -> float:
    """Signal-to-interference power ratio seen by the second user."""
    if split.alpha == 0.0:
        return math.inf
    return split.alpha_bar / split.alpha
