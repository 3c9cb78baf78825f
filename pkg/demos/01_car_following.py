"""Car following on an open road.

A four-vehicle platoon follows a leader that brakes hard for ten seconds and
then speeds up again. The follower accelerations come straight out of the
car-following model, so the script shows the two things the model is built
around: a smooth approach to the desired velocity and a safe dynamic gap.
"""

import numpy as np

from vanetflow import DriverParams, idm_acceleration
from vanetflow.traffic import NO_VEHICLE, kinematic_update

DT = 0.25
PARAMS = DriverParams(desired_velocity=30.0)

# state arrays: leader first, then four followers spaced 40 m apart
positions = np.array([200.0, 160.0, 120.0, 80.0, 40.0])
velocities = np.full(5, 28.0)

history = []
for tick in range(int(120.0 / DT)):
    t = tick * DT
    accels = np.zeros(5)
    # scripted leader: cruise, brake, recover
    if 20.0 <= t < 30.0:
        accels[0] = -3.0
    else:
        accels[0] = idm_acceleration(velocities[0], NO_VEHICLE, 0.0, PARAMS)
    for i in range(1, 5):
        gap = positions[i - 1] - positions[i] - 5.0  # bumper to bumper
        dv = velocities[i] - velocities[i - 1]
        accels[i] = idm_acceleration(velocities[i], gap, dv, PARAMS)
    for i in range(5):
        velocities[i], dx = kinematic_update(velocities[i], accels[i], DT)
        positions[i] += dx
    history.append((t, velocities.copy(), positions.copy()))

print("time   v_leader  v_1     v_2     v_3     v_4    min_gap")
for t, v, x in history[:: int(5.0 / DT)]:
    gaps = x[:-1] - x[1:] - 5.0
    print(f"{t:5.0f}   {v[0]:6.2f}  {v[1]:6.2f}  {v[2]:6.2f}  "
          f"{v[3]:6.2f}  {v[4]:6.2f}  {gaps.min():7.2f}")

closest = min((x[:-1] - x[1:] - 5.0).min() for _, _, x in history)
print(f"\nclosest bumper-to-bumper gap during the braking wave: {closest:.2f} m")
print("the platoon compresses but never collides, and relaxes back afterwards")

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4))
    ts = [h[0] for h in history]
    for i in range(5):
        ax.plot(ts, [h[1][i] for h in history],
                label="leader" if i == 0 else f"follower {i}")
    ax.set_xlabel("time [s]")
    ax.set_ylabel("velocity [m/s]")
    ax.legend(loc="lower right", fontsize=8)
    fig.tight_layout()
    fig.savefig("demo_car_following.png", dpi=120)
    print("wrote demo_car_following.png")
except ImportError:
    print("matplotlib not installed; skipped the plot")
