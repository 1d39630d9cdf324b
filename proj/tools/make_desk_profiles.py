#!/usr/bin/env python3
"""Regenerate the synthetic hourly profiles of the bundled desk dataset.

Four representative weeks (winter, spring, summer, autumn), 672 hours.
Capacity factors lie in [0, 1]; demand shapes have mean 1 and are scaled
to GW in the system config. Deterministic: fixed seed.

usage: make_desk_profiles.py [OUTDIR]   (default: data/profiles)
"""

import os
import sys

import numpy as np

HOURS_PER_WEEK = 168
SEASONS = ("winter", "spring", "summer", "autumn")
REGIONS = ("north", "central", "south")


def daily_weather(rng, n_days, low, high):
    return np.repeat(rng.uniform(low, high, n_days), 24)


def solar(rng, region_gain):
    amplitude = {"winter": 0.32, "spring": 0.68, "summer": 0.90, "autumn": 0.50}
    daylight = {"winter": (8, 16), "spring": (6, 19), "summer": (5, 21), "autumn": (7, 18)}
    out = []
    for s in SEASONS:
        start, stop = daylight[s]
        hour = np.arange(HOURS_PER_WEEK) % 24
        shape = np.clip(np.sin(np.pi * (hour - start) / (stop - start)), 0.0, None)
        shape[(hour < start) | (hour > stop)] = 0.0
        clouds = daily_weather(rng, 7, 0.35, 1.0)
        out.append(amplitude[s] * region_gain * shape * clouds)
    return np.clip(np.concatenate(out), 0.0, 1.0)


def wind(rng, common, mean_by_season, region_noise=0.35):
    out = []
    for k, s in enumerate(SEASONS):
        own = np.zeros(HOURS_PER_WEEK)
        for h in range(1, HOURS_PER_WEEK):
            own[h] = 0.93 * own[h - 1] + rng.normal(0.0, 0.12)
        z = common[k] + region_noise * own
        out.append(mean_by_season[s] * np.exp(0.6 * z - 0.18))
    return np.clip(np.concatenate(out), 0.02, 0.95)


def demand_shape(seasonal, daily_peaks):
    out = []
    for s in SEASONS:
        hour = np.arange(HOURS_PER_WEEK) % 24
        day = np.arange(HOURS_PER_WEEK) // 24
        d = 1.0
        for centre, width, height in daily_peaks:
            d = d + height * np.exp(-0.5 * ((hour - centre) / width) ** 2)
        weekend = np.where(day >= 5, 0.92, 1.0)
        out.append(seasonal[s] * d * weekend)
    v = np.concatenate(out)
    return v / v.mean()


def write(path, values):
    with open(path, "w") as fh:
        fh.write("hour,value\n")
        for h, v in enumerate(values):
            fh.write(f"{h},{v:.6f}\n")


def main(argv):
    outdir = argv[1] if len(argv) > 1 else os.path.join("data", "profiles")
    os.makedirs(outdir, exist_ok=True)
    rng = np.random.default_rng(20240417)

    common = []
    for _ in SEASONS:
        c = np.zeros(HOURS_PER_WEEK)
        for h in range(1, HOURS_PER_WEEK):
            c[h] = 0.96 * c[h - 1] + rng.normal(0.0, 0.22)
        common.append(c)

    onshore = {"winter": 0.40, "spring": 0.31, "summer": 0.21, "autumn": 0.34}
    offshore = {s: min(v + 0.14, 0.9) for s, v in onshore.items()}
    gains = {"north": 0.85, "central": 1.0, "south": 1.22}
    wind_scale = {"north": 1.15, "central": 0.95, "south": 0.75}

    for r in REGIONS:
        write(os.path.join(outdir, f"solar_{r}.csv"), solar(rng, gains[r]))
        scaled = {s: v * wind_scale[r] for s, v in onshore.items()}
        write(os.path.join(outdir, f"wind_onshore_{r}.csv"), wind(rng, common, scaled))
    for r in ("north", "central"):
        write(os.path.join(outdir, f"wind_offshore_{r}.csv"), wind(rng, common, offshore, 0.25))

    elec = demand_shape({"winter": 1.15, "spring": 0.98, "summer": 0.92, "autumn": 1.0},
                        [(8.5, 1.8, 0.18), (19.0, 2.2, 0.26)])
    heat = demand_shape({"winter": 1.85, "spring": 0.85, "summer": 0.28, "autumn": 1.02},
                        [(7.0, 2.0, 0.30), (19.5, 2.5, 0.22)])
    write(os.path.join(outdir, "electricity_demand.csv"), elec)
    write(os.path.join(outdir, "heat_demand.csv"), heat)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
