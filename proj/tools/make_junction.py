#!/usr/bin/env python3
"""Writes the bundled four-way junction scenario, its context map and a tracker config.

Right-hand traffic on two crossing roads. Lane centre lines:
  eastbound y = -2, westbound y = +2, northbound x = +2, southbound x = -2.
Stop lines sit 10 m before the centre of the junction; signals alternate between the
east-west and north-south approaches.

Usage: make_junction.py [out_dir]   (default: data/ next to this script's parent)
"""

import json
import math
import sys
from pathlib import Path

LANE = 2.0
STOP = 10.0
EXTENT = 50.0
CYCLE = 12.0  # seconds per signal phase
DECEL = 3.0
ACCEL = 3.0
GO_SPEED = 6.0

TPM_DEFAULT = [
    [0.85, 0.05, 0.05, 0.05, 0.00],
    [0.10, 0.85, 0.00, 0.00, 0.05],
    [0.05, 0.05, 0.80, 0.05, 0.05],
    [0.05, 0.00, 0.05, 0.80, 0.10],
    [0.00, 0.05, 0.05, 0.10, 0.80],
]
TPM_LIBRARY = {
    "straight": [
        [0.90, 0.04, 0.03, 0.03, 0.00],
        [0.10, 0.85, 0.00, 0.00, 0.05],
        [0.10, 0.05, 0.75, 0.05, 0.05],
        [0.10, 0.00, 0.05, 0.75, 0.10],
        [0.05, 0.10, 0.05, 0.05, 0.75],
    ],
    "approach": [
        [0.80, 0.14, 0.02, 0.02, 0.02],
        [0.10, 0.86, 0.01, 0.01, 0.02],
        [0.10, 0.10, 0.70, 0.05, 0.05],
        [0.10, 0.10, 0.05, 0.70, 0.05],
        [0.05, 0.15, 0.05, 0.05, 0.70],
    ],
    "turn": [
        [0.70, 0.04, 0.10, 0.10, 0.06],
        [0.04, 0.70, 0.08, 0.06, 0.12],
        [0.02, 0.02, 0.90, 0.03, 0.03],
        [0.02, 0.02, 0.03, 0.90, 0.03],
        [0.02, 0.03, 0.03, 0.02, 0.90],
    ],
}

# Heading unit vector of traffic arriving from each approach.
APPROACHES = {
    "east": (1.0, 0.0),
    "west": (-1.0, 0.0),
    "north": (0.0, 1.0),
    "south": (0.0, -1.0),
}


def signal_schedule(axis_phase, horizon=120.0):
    """Green for the first phase of each cycle on axis 0 (east-west), second on axis 1."""
    out = []
    t = 0.0
    k = 0
    while t < horizon:
        green = (k % 2) == axis_phase
        out.append([t, 1.0 if green else 0.5])
        t += CYCLE
        k += 1
    return out


def context_map():
    vectors = []
    for name, d in APPROACHES.items():
        # inbound lane: travelling towards the centre, s from -EXTENT to -STOP
        for s in range(-int(EXTENT), int(EXTENT) + 1, 5):
            # the right-hand lane lies LANE to the right of the road axis
            p = (d[0] * s + d[1] * LANE, d[1] * s - d[0] * LANE)
            inside = abs(p[0]) <= STOP and abs(p[1]) <= STOP
            if inside:
                continue
            approaching = -STOP - 12 <= s <= -STOP
            v = {"x": p[0], "y": p[1], "dir_x": d[0], "dir_y": d[1]}
            if approaching:
                v["tpm"] = "approach"
                v["schedule"] = signal_schedule(0 if name in ("east", "west") else 1)
            else:
                v["tpm"] = "straight"
            vectors.append(v)
    # Turning guides inside the junction box: arcs for left and right turns from every approach.
    for d in APPROACHES.values():
        left = (-d[1], d[0])
        start_s = -STOP
        entry = (d[0] * start_s + d[1] * LANE, d[1] * start_s - d[0] * LANE)
        for radius, sign in ((STOP - LANE, -1.0), (STOP + LANE, 1.0)):  # right, left
            centre = (entry[0] + sign * radius * left[0], entry[1] + sign * radius * left[1])
            for k in range(1, 6):
                a = (math.pi / 2) * k / 6
                # rotate the vector from the centre to the entry point by sign * a
                rx, ry = entry[0] - centre[0], entry[1] - centre[1]
                c, s = math.cos(sign * a), math.sin(sign * a)
                px, py = centre[0] + c * rx - s * ry, centre[1] + s * rx + c * ry
                hx, hy = c * d[0] - s * d[1], s * d[0] + c * d[1]
                vectors.append({"x": round(px, 4), "y": round(py, 4), "dir_x": round(hx, 6), "dir_y": round(hy, 6),
                                "tpm": "turn"})
    for v in vectors:
        v["x"] = round(v["x"], 4)
        v["y"] = round(v["y"], 4)
    return {"default_tpm": TPM_DEFAULT, "tpm_library": TPM_LIBRARY, "cell_size": 15.0, "vectors": vectors}


def start_pose(approach, distance):
    d = APPROACHES[approach]
    s = -distance
    x = d[0] * s + d[1] * LANE
    y = d[1] * s - d[0] * LANE
    return [round(x, 4), round(y, 4), round(math.degrees(math.atan2(d[1], d[0])), 4)]


def route(vid, approach, t0, speed, manoeuvre, distance=EXTENT - 5):
    lead = distance - STOP
    segs = []
    if manoeuvre == "straight":
        segs = [{"type": "straight", "length": distance + EXTENT - 5}]
    elif manoeuvre == "left":
        segs = [{"type": "straight", "length": lead}, {"type": "turn", "radius": STOP + LANE, "angle_deg": 90},
                {"type": "straight", "length": 30}]
    elif manoeuvre == "right":
        segs = [{"type": "straight", "length": lead}, {"type": "turn", "radius": STOP - LANE, "angle_deg": -90},
                {"type": "straight", "length": 30}]
    elif manoeuvre in ("stop_left", "stop_right"):
        # brake to a halt at the stop line, hold, then pull away to GO_SPEED right where the turn starts
        brake = speed * speed / (2 * DECEL)
        pull_away = GO_SPEED * GO_SPEED / (2 * ACCEL)
        left = manoeuvre == "stop_left"
        segs = [{"type": "straight", "length": lead - pull_away - brake},
                {"type": "stop", "decel": DECEL, "hold": 2.0},
                {"type": "go", "accel": ACCEL, "speed": GO_SPEED},
                {"type": "turn", "radius": STOP + LANE if left else STOP - LANE, "angle_deg": 90 if left else -90},
                {"type": "straight", "length": 25}]
    return {"id": vid, "start_time": t0, "start": start_pose(approach, distance), "speed": speed, "segments": segs}


def junction_scenario():
    vehicles = [
        route(1, "east", 0.0, 10.0, "left"),
        route(2, "west", 0.5, 9.0, "right"),
        route(3, "north", 1.0, 10.0, "stop_left"),
        route(4, "south", 0.0, 11.0, "straight"),
        route(5, "east", 2.5, 10.0, "right"),
        route(6, "west", 3.5, 10.0, "left"),
        route(7, "north", 4.0, 9.0, "right"),
        route(8, "south", 5.0, 10.0, "stop_right"),
        route(9, "east", 6.0, 11.0, "stop_left"),
        route(10, "west", 7.0, 10.0, "straight"),
    ]
    return {
        "seed": 1000,
        "duration": 20.0,
        "rate": 10.0,
        "noise": {"position": 0.1, "dims": 0.05, "yaw": 0.03},
        "p_miss": 0.2,
        "clutter_rate": 2.0,
        "extent": [-EXTENT, EXTENT, -EXTENT, EXTENT],
        "map_file": "junction_map.json",
        "vehicles": vehicles,
    }


def tracker_config():
    return {
        "confirm_hits": 3,
        "max_misses": 5,
        "gate_radius": 10.0,
        "angle_weight": 2.0,
        "iou_min": 0.01,
        "measurement_sigma": {"dims": 0.1, "position": 0.3, "yaw": 0.05},
        "initial_std": {"velocity": 10.0, "vertical_velocity": 1.0, "turn_rate": 0.5, "acceleration": 2.0},
        "context": {"enabled": True, "k": 3, "radius": 15.0},
        "models": ["CV", "CA", "CT", "CTV", "CTA"],
        "mu0": [0.2, 0.2, 0.2, 0.2, 0.2],
        "tpm": TPM_DEFAULT,
    }


def main():
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parent.parent / "data"
    out.mkdir(parents=True, exist_ok=True)
    (out / "junction_map.json").write_text(json.dumps(context_map(), indent=1) + "\n")
    (out / "junction.json").write_text(json.dumps(junction_scenario(), indent=1) + "\n")
    (out / "tracker.json").write_text(json.dumps(tracker_config(), indent=1) + "\n")


if __name__ == "__main__":
    main()
