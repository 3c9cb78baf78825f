"""Friis range model and a simplified 802.11-style broadcast MAC.

The MAC deliberately drops inter-frame spacing and does not suspend the
backoff timer while the medium is busy; contention is resolved purely by
the exponential backoff window.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

FOUR_PI_SQ = (4.0 * math.pi) ** 2


@dataclass(slots=True)
class RadioConfig:
    tx_power: float = 0.1          # W
    gain_tx: float = 1.0
    gain_rx: float = 1.0
    wavelength: float = 0.0508     # m, ~5.9 GHz
    system_loss: float = 1.0       # >= 1
    tx_range: float = 100.0        # m, reception possible within this
    interference_range: float = 200.0  # m, medium busy within this
    reception_prob: float = 0.95   # per in-range receiver
    backoff_min: int = 0           # ticks
    backoff_max: int = 15          # ticks
    max_backoff_stage: int = 5

    def validate(self):
        if self.tx_power <= 0:
            raise ValueError("tx_power must be > 0")
        if self.system_loss < 1:
            raise ValueError("system_loss must be >= 1")
        if self.tx_range <= 0:
            raise ValueError("tx_range must be > 0")
        if self.interference_range < self.tx_range:
            raise ValueError("interference_range must be >= tx_range")
        if not 0.0 <= self.reception_prob <= 1.0:
            raise ValueError("reception_prob must be in [0, 1]")
        if not 0 <= self.backoff_min <= self.backoff_max:
            raise ValueError("need 0 <= backoff_min <= backoff_max")
        if self.max_backoff_stage < 0:
            raise ValueError("max_backoff_stage must be >= 0")


@dataclass(slots=True)
class MacState:
    """Contention state for one vehicle's single-slot transmit queue."""

    backoff_stage: int = 0       # consecutive busy deferrals so far
    backoff_remaining: int = 0   # ticks until the next transmit attempt
    pending_message: int | None = None


def friis_received_power(d: float, cfg: RadioConfig) -> float:
    """Free-space received power at distance d."""
    if d <= 0:
        raise ValueError("distance must be > 0")
    return (cfg.tx_power * cfg.gain_tx * cfg.gain_rx * cfg.wavelength ** 2
            / (FOUR_PI_SQ * d * d * cfg.system_loss))


def range_for_sensitivity(cfg: RadioConfig, sensitivity_dbm: float = -85.0) -> float:
    """Distance at which Friis power falls to the receiver sensitivity.

    Convenience for deriving tx_range from power settings; the simulation
    itself always uses the configured tx_range.
    """
    p_min = 10.0 ** (sensitivity_dbm / 10.0) / 1000.0
    return math.sqrt(cfg.tx_power * cfg.gain_tx * cfg.gain_rx * cfg.wavelength ** 2
                     / (FOUR_PI_SQ * cfg.system_loss * p_min))


def in_range(d: float, limit: float) -> bool:
    """Boundary-inclusive range test."""
    return d <= limit


def medium_busy(me: float, transmitting_positions, cfg: RadioConfig) -> bool:
    """Busy iff any current transmitter sits within the interference range."""
    ri = cfg.interference_range
    for pos in transmitting_positions:
        if abs(pos - me) <= ri:
            return True
    return False


def draw_backoff(stage_n: int, cfg: RadioConfig, rng) -> int:
    """Uniform draw from the stage's doubling window [2^n*Bmin, 2^n*Bmax]."""
    if stage_n < 0:
        raise ValueError("backoff stage must be >= 0")
    scale = 1 << min(stage_n, cfg.max_backoff_stage)
    return int(rng.integers(scale * cfg.backoff_min, scale * cfg.backoff_max + 1))


def mac_tick(state: MacState, busy: bool, cfg: RadioConfig, rng) -> tuple[MacState, bool]:
    """Advance the MAC one tick; returns (new state, transmit_now).

    The countdown runs regardless of the medium (no suspension). An attempt
    with the medium busy draws a fresh window from the current stage and then
    escalates the stage; a successful transmission clears the queue slot and
    resets contention.
    """
    if state.pending_message is None:
        return state, False
    if state.backoff_remaining > 0:
        return MacState(state.backoff_stage, state.backoff_remaining - 1,
                        state.pending_message), False
    if busy:
        wait = draw_backoff(state.backoff_stage, cfg, rng)
        stage = min(state.backoff_stage + 1, cfg.max_backoff_stage)
        return MacState(stage, wait, state.pending_message), False
    return MacState(0, 0, None), True


def receive_roll(d: float, cfg: RadioConfig, rng) -> bool:
    """Bernoulli reception: possible only within tx_range, then with reception_prob.

    No randomness is consumed for out-of-range receivers, keeping draw
    sequences stable.
    """
    if d < 0:
        raise ValueError("distance must be >= 0")
    if d > cfg.tx_range:
        return False
    return rng.random() < cfg.reception_prob
