"""Vehicle dynamics: IDM car following, lane-change decisions and kinematic stepping.

All functions here are pure; the engine owns iteration order and state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .dissemination import MessageLedger

NO_VEHICLE = math.inf  # gap sentinel: nothing in that slot

BASE = "base"
BRUTE_FORCE = "brute_force"
PROPORTIONAL = "proportional"
LANE_CHANGE_VARIANTS = (BASE, BRUTE_FORCE, PROPORTIONAL)

PAPER_MULTIPLICATIVE = "paper_multiplicative"
MOBIL_ADDITIVE = "mobil_additive"
LANE_CHANGE_RULES = (PAPER_MULTIPLICATIVE, MOBIL_ADDITIVE)


@dataclass(slots=True)
class DriverParams:
    """Car-following and lane-changing constants for one driver."""

    max_accel: float = 1.0             # m/s^2, open-road acceleration
    comfortable_brake: float = 1.67    # m/s^2
    desired_velocity: float = 120.0 / 3.6  # m/s
    time_headway: float = 1.0          # s
    min_gap: float = 2.0               # m, standstill distance
    accel_exponent: float = 4.0
    politeness: float = 0.2
    change_threshold: float = 0.3      # m/s^2 gain needed to change lane
    lane_bias: float = 0.1             # m/s^2 added for changes into the slow lane
    diff_cap: float = 20.0             # cap on the proportional incentive
    vsl_reduction: float = 2.7         # m/s knocked off v0 while warned

    def validate(self):
        if self.max_accel <= 0:
            raise ValueError("max_accel must be > 0")
        if self.comfortable_brake <= 0:
            raise ValueError("comfortable_brake must be > 0")
        if self.desired_velocity <= 0:
            raise ValueError("desired_velocity must be > 0")
        if self.time_headway < 0:
            raise ValueError("time_headway must be >= 0")
        if self.min_gap < 0:
            raise ValueError("min_gap must be >= 0")
        if self.change_threshold <= 0:
            raise ValueError("change_threshold must be > 0")
        if self.diff_cap <= 0:
            raise ValueError("diff_cap must be > 0")
        if self.politeness < 0:
            raise ValueError("politeness must be >= 0")


@dataclass(slots=True)
class VehicleState:
    """Position/velocity/lane plus driver parameters and warning bookkeeping."""

    id: int
    lane: int            # 0 = obstacle lane, 1 = opposite lane
    position: float      # m along the road
    velocity: float      # m/s, never negative
    params: DriverParams
    infected: bool = False
    passed_obstacle: bool = False
    ledger: MessageLedger = field(default_factory=MessageLedger)


@dataclass(slots=True)
class Neighborhood:
    """Leader/follower situation seen from one vehicle in one lane.

    Gaps are center-to-center distances (vehicles are points); NO_VEHICLE
    marks an empty slot, in which case the paired velocity is meaningless.
    """

    leader_gap: float = NO_VEHICLE
    leader_velocity: float = 0.0
    follower_gap: float = NO_VEHICLE
    follower_velocity: float = 0.0


def desired_gap(v: float, delta_v: float, p: DriverParams) -> float:
    """Dynamic desired distance to the vehicle ahead, never below the standstill gap."""
    dynamic = v * p.time_headway + v * delta_v / (2.0 * math.sqrt(p.max_accel * p.comfortable_brake))
    if dynamic < 0.0:
        dynamic = 0.0
    return p.min_gap + dynamic


def idm_acceleration(v: float, gap: float, delta_v: float, p: DriverParams) -> float:
    """IDM acceleration given own speed, gap to leader and approach rate.

    ``gap`` of NO_VEHICLE means open road (the interaction term vanishes).
    ``delta_v`` is own velocity minus leader velocity.
    """
    free = 1.0 - (v / p.desired_velocity) ** p.accel_exponent
    if gap == NO_VEHICLE:
        return p.max_accel * free
    if gap <= 0.0:
        raise ValueError(f"non-positive gap {gap} with a leader present (collision state)")
    ratio = desired_gap(v, delta_v, p) / gap
    return p.max_accel * (free - ratio * ratio)


def my_advantage(current: Neighborhood, target: Neighborhood, v: float,
                 p: DriverParams, bias: float | None = None) -> float:
    """Acceleration gained by moving to the target lane, plus the lane bias.

    ``bias`` defaults to ``p.lane_bias``; the engine passes 0 for changes away
    from the designated slow lane so the bias only pulls vehicles back into it.
    """
    if bias is None:
        bias = p.lane_bias
    a_old = idm_acceleration(v, current.leader_gap, v - current.leader_velocity, p)
    a_new = idm_acceleration(v, target.leader_gap, v - target.leader_velocity, p)
    return a_new - a_old + bias


def others_disadvantage(current: Neighborhood, target: Neighborhood,
                        mover: VehicleState) -> float:
    """Net acceleration change the move imposes on the two affected followers.

    The old-lane follower inherits the mover's leader; the new-lane follower
    gets the mover instead of its old leader. Positive means the followers
    come out ahead overall, negative that the move costs them. An absent
    follower is unaffected (it keeps its free-road acceleration) and
    contributes zero. Followers are evaluated with the mover's parameters
    (homogeneous fleet).
    """
    p = mover.params
    total = 0.0
    if current.follower_gap != NO_VEHICLE:
        vf = current.follower_velocity
        before = idm_acceleration(vf, current.follower_gap, vf - mover.velocity, p)
        after = idm_acceleration(vf, current.follower_gap + current.leader_gap,
                                 vf - current.leader_velocity, p)
        total += after - before
    if target.follower_gap != NO_VEHICLE:
        vf = target.follower_velocity
        before = idm_acceleration(vf, target.follower_gap + target.leader_gap,
                                  vf - target.leader_velocity, p)
        after = idm_acceleration(vf, target.follower_gap, vf - mover.velocity, p)
        total += after - before
    return total


def base_lane_change(my_adv: float, oth_dis: float, p: DriverParams) -> bool:
    """Default decision rule: multiplicative trade-off against the threshold."""
    return (my_adv - p.politeness) * oth_dis > p.change_threshold


def brute_force_lane_change(my_adv: float, boost: float, oth_dis: float,
                            p: DriverParams) -> bool:
    """Warned-vehicle rule with a flat additive boost to the advantage."""
    return (my_adv + boost - p.politeness) * oth_dis > p.change_threshold


def diff_incentive(pos_me: float, pos_obst: float, p: DriverParams) -> float:
    """Position-proportional incentive, growing toward the obstacle, capped.

    Only defined strictly upstream of the obstacle; past it the caller must
    fall back to the base rule.
    """
    if pos_me >= pos_obst:
        raise ValueError(f"vehicle at {pos_me} is not upstream of obstacle at {pos_obst}")
    return min(p.diff_cap, pos_obst / (pos_obst - pos_me))


def proportional_lane_change(my_adv: float, diff: float, oth_dis: float,
                             p: DriverParams) -> bool:
    """Warned-vehicle rule with the position-proportional incentive added."""
    return (my_adv + diff - p.politeness) * oth_dis > p.change_threshold


def additive_lane_change(my_adv: float, incentive: float, oth_dis: float,
                         p: DriverParams) -> bool:
    """Classic MOBIL-style trade-off, selectable via the lane_change_rule config.

    ``oth_dis`` is the followers' net gain here, so harm (negative values)
    weighs against changing, scaled by politeness.
    """
    return my_adv + incentive + p.politeness * oth_dis > p.change_threshold


def effective_desired_velocity(vehicle: VehicleState, vsl_enabled: bool) -> float:
    """Desired velocity after the variable-speed-limit adjustment.

    Warned vehicles that have not yet passed the obstacle aim lower; everyone
    else (including warned vehicles past the obstacle) keeps the normal value.
    """
    p = vehicle.params
    if vsl_enabled and vehicle.infected and not vehicle.passed_obstacle:
        return max(0.0, p.desired_velocity - p.vsl_reduction)
    return p.desired_velocity


def kinematic_update(v: float, accel: float, dt: float) -> tuple[float, float]:
    """One Euler step; returns (new velocity, position increment).

    Velocity clamps at 0 and the increment never goes negative: vehicles
    do not reverse.
    """
    v_new = v + accel * dt
    if v_new < 0.0:
        v_new = 0.0
    dx = v * dt + 0.5 * accel * dt * dt
    if dx < 0.0:
        dx = 0.0
    return v_new, dx


def integrate_kinematics(vehicle: VehicleState, accel: float, dt: float) -> VehicleState:
    """Advance one vehicle by dt under constant acceleration; other fields unchanged."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    v_new, dx = kinematic_update(vehicle.velocity, accel, dt)
    return replace(vehicle, velocity=v_new, position=vehicle.position + dx)
