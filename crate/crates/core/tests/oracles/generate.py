"""Independent oracles for the fixture files.

Run from the repository root:

    python3 crates/core/tests/oracles/generate.py

Every value is written with repr() so it reads back bit-exactly.
"""
import csv
import math
import os
import random

import numpy as np

HERE = os.path.dirname(os.path.abspath(__file__))
CORE = os.path.join(HERE, "..", "fixtures")
CLI = os.path.join(HERE, "..", "..", "..", "cli", "tests", "fixtures")

THETA = dict(r0=0.05, r1=0.02, c1=1000.0, r2=0.03, c2=20000.0)
OCV = [3.0, 2.0, -3.6, 3.8, -1.6, 0.6]
CAPACITY = 2.0


def ocv(soc):
    soc = min(max(soc, 0.0), 1.0)
    return sum(c * soc ** n for n, c in enumerate(OCV))


def simulate(time, current, theta=THETA, soc_init=1.0, capacity=CAPACITY):
    soc, v1, v2 = soc_init, 0.0, 0.0
    out = []
    for k, (t, i) in enumerate(zip(time, current)):
        if k > 0:
            dt = t - time[k - 1]
            a1 = math.exp(-dt / (theta["r1"] * theta["c1"]))
            a2 = math.exp(-dt / (theta["r2"] * theta["c2"]))
            soc = min(max(soc - i * dt / (3600.0 * capacity), 0.0), 1.0)
            v1 = a1 * v1 + theta["r1"] * (1.0 - a1) * i
            v2 = a2 * v2 + theta["r2"] * (1.0 - a2) * i
        out.append(ocv(soc) - v1 - v2 - i * theta["r0"])
    return out


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([repr(x) if isinstance(x, float) else x for x in row])


def sim_golden():
    time = [float(k) for k in range(600)]
    current = [1.0] * 600
    volts = simulate(time, current)
    rows = list(zip(time, current, volts))
    write_csv(os.path.join(CORE, "sim_theta_star_600.csv"), ["time_s", "current_a", "voltage_v"], rows)
    write_csv(os.path.join(CLI, "profile.csv"), ["time_s", "current_a"], list(zip(time, current)))
    write_csv(os.path.join(CLI, "simulate_golden.csv"), ["time_s", "voltage_v"], list(zip(time, volts)))


def resample_oracle():
    rng = random.Random(7)
    t, times = 0.0, [0.0]
    while t < 80.0:
        t += rng.uniform(0.2, 2.5)
        times.append(round(t, 6))
    current = [rng.uniform(0.5, 2.0) for _ in times]
    voltage = [rng.uniform(3.2, 4.1) for _ in times]
    write_csv(os.path.join(CORE, "resample_input.csv"), ["time_s", "current_a", "voltage_v"],
              list(zip(times, current, voltage)))
    dt = 0.7
    n = int(math.floor(times[-1] / dt + 1e-9))
    grid = [k * dt for k in range(n + 1)]
    if abs(grid[-1] - times[-1]) <= 1e-9 * dt:
        grid[-1] = times[-1]
    else:
        grid.append(times[-1])
    ci = np.interp(grid, times, current)
    vi = np.interp(grid, times, voltage)
    write_csv(os.path.join(CORE, "resample_expected.csv"), ["time_s", "current_a", "voltage_v"],
              [(float(a), float(b), float(c)) for a, b, c in zip(grid, ci, vi)])


def cycler_fixtures():
    header = ["Date_Time", "Test_Time (s)", "Cycle_Index", "Current (A)", "Voltage (V)",
              "Charge_Capacity (Ah)", "Discharge_Capacity (Ah)", "Cell_Temperature (C)"]
    rest = 60
    disch = 400
    cur = [1.0] * (disch + 1)
    volts = simulate([float(k) for k in range(disch + 1)], cur)
    rows = []
    for k in range(rest):
        rows.append(("2020-01-01 00:00:00", float(k), 1, 0.0, ocv(1.0), 0.0, 0.0, 25.0))
    for k in range(disch + 1):
        rows.append(("2020-01-01 00:00:00", float(rest + k), 1, 1.0, volts[k], 0.0,
                     k / 3600.0, 25.0))
    write_csv(os.path.join(CLI, "cell.csv"), header, rows)
    rest_rows = [("2020-01-01 00:00:00", float(k), 1, 0.0, 4.2, 0.0, 0.0, 25.0) for k in range(120)]
    write_csv(os.path.join(CLI, "rest.csv"), header, rest_rows)


if __name__ == "__main__":
    sim_golden()
    resample_oracle()
    cycler_fixtures()
