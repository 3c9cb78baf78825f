"""Deterministic time-stepped loop coupling traffic, radio and dissemination.

Each step runs fixed phases from the pre-step snapshot: obstacle beacon, MAC
ticks and delivery rolls, ledger updates and rebroadcast decisions, behavior
(acceleration + lane-change decisions), simultaneous application of moves,
exits, injection, then bookkeeping. One seeded generator drives every random
draw in a fixed order, so identical config and seed reproduce the run exactly.
"""

from __future__ import annotations

import bisect
from array import array
from dataclasses import dataclass, field, replace

import numpy as np

from .config import SimConfig, as_echo_dict
from .dissemination import WarningMessage, should_rebroadcast, ttl_alive
from .radio import MacState, mac_tick, medium_busy, receive_roll
from .traffic import (BASE, BRUTE_FORCE, NO_VEHICLE, PAPER_MULTIPLICATIVE,
                      Neighborhood, VehicleState, base_lane_change,
                      brute_force_lane_change, additive_lane_change,
                      diff_incentive, idm_acceleration, kinematic_update,
                      others_disadvantage, proportional_lane_change)

OBSTACLE_ID = -1
SLOW_LANE = 0               # lane the bias pulls back into
WARMUP_LOAD_FACTOR = 0.25
ENTRY_JITTER = 1e-3         # m, breaks exact-position ties at injection
GRIDLOCK_SPEED = 0.1        # m/s
GRIDLOCK_MIN_VEHICLES = 10  # ignore near-empty roads
ORIGIN_WINDOW = 100.0       # m, stretch of road watched for congestion at entry
ORIGIN_SLOW_SPEED = 5.0     # m/s
ORIGIN_MIN_VEHICLES = 3


class SimulationError(RuntimeError):
    """An engine invariant broke; carries a diagnostic dump, never repaired."""


class SampleLog:
    """Columnar per-tick vehicle samples (time, id, lane, position, velocity)."""

    __slots__ = ("t", "vehicle_id", "lane", "position", "velocity")

    def __init__(self):
        self.t = array("d")
        self.vehicle_id = array("q")
        self.lane = array("b")
        self.position = array("d")
        self.velocity = array("d")

    def __len__(self):
        return len(self.t)

    def __eq__(self, other):
        if not isinstance(other, SampleLog):
            return NotImplemented
        return (self.t == other.t and self.vehicle_id == other.vehicle_id
                and self.lane == other.lane and self.position == other.position
                and self.velocity == other.velocity)


@dataclass
class EventLog:
    """Everything a run produced: discrete events, dense samples and totals.

    Event records are (time_s, event_kind, vehicle_id, lane, position_m,
    velocity_mps, aux); aux carries the message id for communication events
    and "target_lane|infected" for lane changes.
    """

    config_echo: dict
    cfg: SimConfig
    events: list = field(default_factory=list)
    samples: SampleLog = field(default_factory=SampleLog)
    end_time: float = 0.0
    scheduled_arrivals: int = 0
    entered: int = 0
    exited: int = 0
    first_gridlock_time: float | None = None
    first_origin_slow_time: float | None = None


@dataclass
class SimState:
    """Mutable world state; vehicles are kept per lane, sorted by position."""

    cfg: SimConfig
    rng: np.random.Generator
    log: EventLog
    lanes: list            # [list[VehicleState], list[VehicleState]]
    macs: dict             # vehicle id -> MacState
    messages: dict         # msg id -> WarningMessage
    driver_p: object
    driver_vsl_p: object
    now: float = 0.0
    tick: int = 0
    next_id: int = 0
    next_msg_id: int = 0
    next_beacon: float = 0.0
    next_entry_lane: int = 0
    entry_queue: int = 0
    scheduled: int = 0
    entered: int = 0
    exited: int = 0
    prev_tx_positions: list = field(default_factory=list)
    last_change: dict = field(default_factory=dict)
    first_gridlock_time: float | None = None
    first_origin_slow_time: float | None = None


def new_state(cfg: SimConfig) -> SimState:
    cfg.validate()
    driver_p = cfg.driver_params()
    vsl_v0 = max(1e-9, driver_p.desired_velocity - driver_p.vsl_reduction)
    log = EventLog(config_echo=as_echo_dict(cfg), cfg=cfg)
    return SimState(cfg=cfg, rng=np.random.default_rng(cfg.seed), log=log,
                    lanes=[[], []], macs={}, messages={},
                    driver_p=driver_p,
                    driver_vsl_p=replace(driver_p, desired_velocity=vsl_v0))


def add_vehicle(state: SimState, lane: int, position: float, velocity: float) -> VehicleState:
    """Place a vehicle directly (tests and demos); keeps per-lane ordering."""
    veh = VehicleState(state.next_id, lane, position, velocity, state.driver_p)
    state.next_id += 1
    bisect.insort(state.lanes[lane], veh, key=lambda v: v.position)
    state.macs[veh.id] = MacState()
    state.scheduled += 1
    state.entered += 1
    state.log.events.append((state.now, "injection", veh.id, lane, position, velocity, ""))
    return veh


def _leader(state, lane_idx, index, veh):
    """Net gap and velocity of the effective leader, obstacle included.

    Vehicle gaps are bumper to bumper (positions minus the vehicle length);
    the obstacle is a zero-length stationary leader.
    """
    cfg = state.cfg
    lane_list = state.lanes[lane_idx]
    if index + 1 < len(lane_list):
        nxt = lane_list[index + 1]
        gap = nxt.position - veh.position - cfg.vehicle_length
        lv = nxt.velocity
    else:
        gap = NO_VEHICLE
        lv = 0.0
    if lane_idx == cfg.obstacle_lane and veh.position < cfg.obstacle_position:
        obs_gap = cfg.obstacle_position - veh.position
        if obs_gap < gap:
            return obs_gap, 0.0
    return gap, lv


def detect_gridlock(state: SimState, cfg: SimConfig) -> bool:
    """All vehicles upstream of the obstacle crawling, with enough of them present."""
    count = 0
    for lane_list in state.lanes:
        for veh in lane_list:
            if veh.position >= cfg.obstacle_position:
                break
            if veh.velocity >= GRIDLOCK_SPEED:
                return False
            count += 1
    return count >= GRIDLOCK_MIN_VEHICLES


def origin_congested(state: SimState, cfg: SimConfig) -> bool:
    """Mean velocity over the first 100 m below 5 m/s (needs a few vehicles there)."""
    total = 0.0
    n = 0
    for lane_list in state.lanes:
        for veh in lane_list:
            if veh.position > ORIGIN_WINDOW:
                break
            total += veh.velocity
            n += 1
    return n >= ORIGIN_MIN_VEHICLES and total / n < ORIGIN_SLOW_SPEED


def _try_insert(state: SimState, lane_idx: int) -> bool:
    """Insert one queued arrival at the road start if the entry gap allows it."""
    cfg = state.cfg
    p = state.driver_p
    lane_list = state.lanes[lane_idx]
    if lane_list:
        gap = lane_list[0].position - cfg.vehicle_length
        leader_velocity = lane_list[0].velocity
    elif lane_idx == cfg.obstacle_lane:
        gap = cfg.obstacle_position
        leader_velocity = 0.0
    else:
        gap = NO_VEHICLE
        leader_velocity = 0.0
    if gap == NO_VEHICLE:
        velocity = cfg.speed_limit
    else:
        # leader-safe entry speed: match a fast leader (waiting for full
        # headway rather than crawling in behind it) but allow slow entry
        # into a standing queue once the gap supports it
        if p.time_headway > 0:
            gap_speed = (gap - p.min_gap) / p.time_headway
        else:
            gap_speed = cfg.speed_limit
        velocity = min(cfg.speed_limit, max(leader_velocity, gap_speed))
        if velocity < 0.0:
            velocity = 0.0
        if gap < p.min_gap + velocity * p.time_headway:
            return False
    position = ENTRY_JITTER * float(state.rng.random())
    veh = VehicleState(state.next_id, lane_idx, position, velocity, p)
    state.next_id += 1
    lane_list.insert(0, veh)
    state.macs[veh.id] = MacState()
    state.entered += 1
    state.log.events.append((state.now, "injection", veh.id, lane_idx, position, velocity, ""))
    return True


def inject_vehicles(state: SimState, cfg: SimConfig, rng) -> SimState:
    """Poisson arrivals at the configured load; blocked arrivals wait in a queue.

    The load is reduced during the warm-up period. Lane preference alternates
    per inserted vehicle; an arrival blocked in both lanes stays queued.
    """
    lam_per_s = cfg.traffic_load / 3600.0
    if state.now <= cfg.warm_up:
        lam_per_s *= WARMUP_LOAD_FACTOR
    fresh = int(rng.poisson(lam_per_s * cfg.dt))
    state.scheduled += fresh
    state.entry_queue += fresh
    while state.entry_queue > 0:
        inserted = False
        for lane_try in (state.next_entry_lane, 1 - state.next_entry_lane):
            if _try_insert(state, lane_try):
                state.next_entry_lane = 1 - lane_try
                inserted = True
                break
        if not inserted:
            break
        state.entry_queue -= 1
    return state


def _diagnostic(state, message):
    rows = []
    for li, lane_list in enumerate(state.lanes):
        for veh in lane_list:
            rows.append(f"  lane={li} id={veh.id} x={veh.position:.3f} v={veh.velocity:.3f}")
    return SimulationError(f"{message} at t={state.now}\n" + "\n".join(rows))


def step(state: SimState, cfg: SimConfig) -> SimState:
    """Advance the world by one dt. Mutates and returns ``state``."""
    t = state.now
    dt = cfg.dt
    radio_cfg = cfg.radio
    events = state.log.events
    lanes = state.lanes

    # --- communication: beacon, MAC, deliveries, ledgers, relay decisions
    if cfg.communication_enabled:
        transmissions = []
        if t >= state.next_beacon - 1e-9:
            msg = WarningMessage(state.next_msg_id, cfg.obstacle_position, t,
                                 cfg.ttl_time, cfg.ttl_distance)
            state.messages[msg.msg_id] = msg
            state.next_msg_id += 1
            state.next_beacon += cfg.beacon_interval
            transmissions.append((OBSTACLE_ID, cfg.obstacle_position, msg.msg_id))
            events.append((t, "transmission", OBSTACLE_ID, cfg.obstacle_lane,
                           cfg.obstacle_position, 0.0, msg.msg_id))
        prev_tx = state.prev_tx_positions
        macs = state.macs
        for lane_list in lanes:
            for veh in lane_list:
                mac = macs[veh.id]
                if mac.pending_message is None:
                    continue
                busy = medium_busy(veh.position, prev_tx, radio_cfg)
                mac_next, tx_now = mac_tick(mac, busy, radio_cfg, state.rng)
                macs[veh.id] = mac_next
                if tx_now:
                    msg = state.messages[mac.pending_message]
                    # messages that died while queued are dropped, not sent
                    if ttl_alive(msg, t, veh.position):
                        transmissions.append((veh.id, veh.position, msg.msg_id))
                        events.append((t, "transmission", veh.id, veh.lane,
                                       veh.position, veh.velocity, msg.msg_id))
        receptions = []
        if transmissions:
            rc = radio_cfg.tx_range
            for lane_list in lanes:
                positions = [v.position for v in lane_list]
                for sender_id, sender_pos, msg_id in transmissions:
                    msg = state.messages[msg_id]
                    lo = bisect.bisect_left(positions, sender_pos - rc)
                    hi = bisect.bisect_right(positions, sender_pos + rc)
                    for i in range(lo, hi):
                        veh = lane_list[i]
                        if veh.id == sender_id or veh.position == sender_pos:
                            continue  # self-reception / unattributable tie
                        if receive_roll(abs(veh.position - sender_pos), radio_cfg, state.rng):
                            receptions.append((veh, msg, sender_pos))
        # all receptions land before any relay decision is made
        for veh, msg, sender_pos in receptions:
            events.append((t, "reception", veh.id, veh.lane, veh.position,
                           veh.velocity, msg.msg_id))
            veh.ledger.record_reception(msg, sender_pos, veh.position, now=t)
            if not veh.infected:
                veh.infected = True
                events.append((t, "infection", veh.id, veh.lane, veh.position,
                               veh.velocity, msg.msg_id))
        for veh, msg, sender_pos in receptions:
            mac = state.macs[veh.id]
            if mac.pending_message is not None and mac.pending_message >= msg.msg_id:
                continue  # that or a newer warning generation is already queued
            entry = veh.ledger.entries[msg.msg_id]
            if should_rebroadcast(cfg.policy, msg, entry, now=t, my_pos=veh.position,
                                  d_from_sender=abs(veh.position - sender_pos),
                                  tx_range=radio_cfg.tx_range, rng=state.rng):
                # a newer generation supersedes any older pending frame and,
                # as for any fresh frame, contention starts from stage 0
                state.macs[veh.id] = MacState(0, 0, msg.msg_id)
        state.prev_tx_positions = [pos for _, pos, _ in transmissions]

    # --- behavior from the pre-move snapshot
    normal_p = state.driver_p
    vsl_p = state.driver_vsl_p
    vsl_on = cfg.vsl_enabled
    variant = cfg.lane_change_variant
    multiplicative = cfg.lane_change_rule == PAPER_MULTIPLICATIVE
    cooldown = cfg.lane_change_cooldown
    b_safe = cfg.safe_braking_limit
    obstacle_lane = cfg.obstacle_lane
    obstacle_pos = cfg.obstacle_position
    last_change = state.last_change
    length = cfg.vehicle_length
    accels = {}
    proposals = []
    target_positions = [[v.position for v in lane_list] for lane_list in lanes]

    for li in (0, 1):
        lane_list = lanes[li]
        tl = 1 - li
        tlist = lanes[tl]
        tpos = target_positions[tl]
        for i, veh in enumerate(lane_list):
            p_eff = vsl_p if (vsl_on and veh.infected and not veh.passed_obstacle) else normal_p
            gap, lead_v = _leader(state, li, i, veh)
            v = veh.velocity
            a_self = idm_acceleration(v, gap, v - lead_v, p_eff)
            accels[veh.id] = a_self

            if t - last_change.get(veh.id, -1e18) < cooldown:
                continue
            if (veh.infected and not veh.passed_obstacle and tl == obstacle_lane
                    and veh.position < obstacle_pos):
                continue  # warned drivers do not merge into the blocked lane
            idx = bisect.bisect_left(tpos, veh.position)
            if idx < len(tlist):
                t_leader_gap = tlist[idx].position - veh.position - length
                t_leader_v = tlist[idx].velocity
            else:
                t_leader_gap = NO_VEHICLE
                t_leader_v = 0.0
            if tl == obstacle_lane and veh.position < obstacle_pos:
                obs_gap = obstacle_pos - veh.position
                if obs_gap < t_leader_gap:
                    t_leader_gap = obs_gap
                    t_leader_v = 0.0
            if idx > 0:
                t_follow_gap = veh.position - tlist[idx - 1].position - length
                t_follow_v = tlist[idx - 1].velocity
            else:
                t_follow_gap = NO_VEHICLE
                t_follow_v = 0.0
            # hard safety vetoes: keep at least the standstill gap both ways,
            # do not force emergency braking on the new follower or on myself
            if t_leader_gap < p_eff.min_gap or t_follow_gap < p_eff.min_gap:
                continue
            a_new = idm_acceleration(v, t_leader_gap, v - t_leader_v, p_eff)
            if a_new < -b_safe:
                continue
            if t_follow_gap != NO_VEHICLE:
                if idm_acceleration(t_follow_v, t_follow_gap, t_follow_v - v, normal_p) < -b_safe:
                    continue
            if i > 0:
                follow_gap = veh.position - lane_list[i - 1].position - length
                follow_v = lane_list[i - 1].velocity
            else:
                follow_gap = NO_VEHICLE
                follow_v = 0.0
            bias = p_eff.lane_bias if tl == SLOW_LANE else 0.0
            my_adv = a_new - a_self + bias  # same as traffic.my_advantage, a_old reused
            cur_nb = Neighborhood(gap, lead_v, follow_gap, follow_v)
            tgt_nb = Neighborhood(t_leader_gap, t_leader_v, t_follow_gap, t_follow_v)
            oth_dis = others_disadvantage(cur_nb, tgt_nb, veh)
            use_variant = (variant != BASE and veh.infected and li == obstacle_lane
                           and veh.position < obstacle_pos)
            if multiplicative:
                if use_variant and variant == BRUTE_FORCE:
                    change = brute_force_lane_change(my_adv, cfg.brute_force_boost, oth_dis, p_eff)
                elif use_variant:
                    diff = diff_incentive(veh.position, obstacle_pos, p_eff)
                    change = proportional_lane_change(my_adv, diff, oth_dis, p_eff)
                else:
                    change = base_lane_change(my_adv, oth_dis, p_eff)
            else:
                if use_variant and variant == BRUTE_FORCE:
                    incentive = cfg.brute_force_boost
                elif use_variant:
                    incentive = diff_incentive(veh.position, obstacle_pos, p_eff)
                else:
                    incentive = 0.0
                change = additive_lane_change(my_adv, incentive, oth_dis, p_eff)
            if change:
                proposals.append((veh, li, tl, idx))

    # --- apply lane changes simultaneously; same target gap goes to the
    # downstream contender, upstream ones defer a tick
    if proposals:
        chosen = {}
        for prop in proposals:
            key = (prop[2], prop[3])
            held = chosen.get(key)
            if held is None or prop[0].position > held[0].position:
                chosen[key] = prop
        moved = [prop for prop in proposals if chosen[(prop[2], prop[3])] is prop]
        moved_ids = {prop[0].id for prop in moved}
        for li in (0, 1):
            if any(prop[1] == li for prop in moved):
                lanes[li] = [v for v in lanes[li] if v.id not in moved_ids]
        for veh, li, tl, _ in moved:
            events.append((t, "lane_change", veh.id, li, veh.position, veh.velocity,
                           f"{tl}|{int(veh.infected)}"))
            veh.lane = tl
            last_change[veh.id] = t
            bisect.insort(lanes[tl], veh, key=lambda v: v.position)

    # --- integrate everyone from pre-step velocities and phase-4 accelerations
    for lane_list in lanes:
        for veh in lane_list:
            v_new, dx = kinematic_update(veh.velocity, accels[veh.id], dt)
            veh.velocity = v_new
            veh.position += dx
    state.tick += 1
    state.now = now = state.tick * dt

    # --- exits and obstacle-passed flags
    for li in (0, 1):
        lane_list = lanes[li]
        while lane_list and lane_list[-1].position > cfg.field_length:
            veh = lane_list.pop()
            state.exited += 1
            events.append((now, "exit", veh.id, li, veh.position, veh.velocity, ""))
            state.macs.pop(veh.id, None)
            state.last_change.pop(veh.id, None)
        for veh in reversed(lane_list):
            if veh.position <= cfg.obstacle_position:
                break
            if veh.passed_obstacle:
                continue
            veh.passed_obstacle = True

    # --- arrivals
    inject_vehicles(state, cfg, state.rng)

    # --- samples, detectors, invariants
    samples = state.log.samples
    s_t, s_id, s_lane = samples.t, samples.vehicle_id, samples.lane
    s_x, s_v = samples.position, samples.velocity
    on_road = 0
    min_spacing = cfg.vehicle_length
    for li in (0, 1):
        prev_front = -1e18
        for veh in lanes[li]:
            if veh.position - prev_front <= min_spacing:
                raise _diagnostic(state, f"overlap in lane {li} at vehicle {veh.id}")
            prev_front = veh.position
            s_t.append(now)
            s_id.append(veh.id)
            s_lane.append(li)
            s_x.append(veh.position)
            s_v.append(veh.velocity)
            on_road += 1
    if state.scheduled != state.exited + on_road + state.entry_queue:
        raise _diagnostic(state, "vehicle conservation violated")
    if state.first_gridlock_time is None and detect_gridlock(state, cfg):
        state.first_gridlock_time = now
        events.append((now, "gridlock", OBSTACLE_ID, cfg.obstacle_lane, 0.0, 0.0, ""))
    if state.first_origin_slow_time is None and origin_congested(state, cfg):
        state.first_origin_slow_time = now
        events.append((now, "origin_congested", OBSTACLE_ID, cfg.obstacle_lane, 0.0, 0.0, ""))
    return state


def run(cfg: SimConfig) -> EventLog:
    """Run a full scenario; identical config and seed give an identical log."""
    cfg.validate()
    state = new_state(cfg)
    n_steps = round(cfg.duration / cfg.dt)
    for _ in range(n_steps):
        step(state, cfg)
        if cfg.stop_at_origin and state.first_origin_slow_time is not None:
            break
    log = state.log
    log.end_time = state.now
    log.scheduled_arrivals = state.scheduled
    log.entered = state.entered
    log.exited = state.exited
    log.first_gridlock_time = state.first_gridlock_time
    log.first_origin_slow_time = state.first_origin_slow_time
    return log
