"""Clock-fit error as a function of session length, anchor count and timer noise.

For each configuration, generates sessions with a known clock (offset and
drift) across several seeds, fits every stream from its anchors and reports
the mean and worst absolute errors. Shows how long a session must run before
drift becomes identifiable under a given anchor jitter.

    python3 scripts/clock_recovery_sweep.py --durations 10 60 600 1800 --anchors 5 20 --sigma 2
"""

from __future__ import annotations

import argparse
import itertools

import numpy as np

from egoalign.sync import fit_clock, group_anchors
from egoalign.synth import Scenario, generate


def sweep(durations, anchor_counts, sigmas, seeds, offset, drift, device):
    rows = []
    for duration, count, sigma in itertools.product(durations, anchor_counts, sigmas):
        off_err, drift_err = [], []
        for seed in range(seeds):
            sc = Scenario(device, duration_s=duration, clock_offset_ms=offset, clock_drift_ppm=drift,
                          anchor_jitter_sigma_ms=sigma, anchor_count=count, seed=seed)
            gt, _ = generate(sc, alignment=False)
            for group in group_anchors(gt.anchors).values():
                model, _ = fit_clock(group)
                off_err.append(abs(model.offset_ms - offset))
                drift_err.append(abs(model.drift_ppm - drift))
        rows.append((duration, count, sigma, np.mean(off_err), np.max(off_err),
                     np.mean(drift_err), np.max(drift_err)))
    return rows


def main(argv=None) -> None:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--durations", type=float, nargs="+", default=[10, 60, 300, 1800])
    p.add_argument("--anchors", type=int, nargs="+", default=[5, 20])
    p.add_argument("--sigma", type=float, nargs="+", default=[0.5, 2.0])
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--offset", type=float, default=137.0)
    p.add_argument("--drift", type=float, default=20.0)
    p.add_argument("--device", default="android", help="profiles without pose logging generate fastest")
    args = p.parse_args(argv)

    print(f"{'dur_s':>7} {'anchors':>7} {'sigma':>6} {'off_mean':>9} {'off_max':>8} {'ppm_mean':>9} {'ppm_max':>8}")
    for row in sweep(args.durations, args.anchors, args.sigma, args.seeds, args.offset, args.drift, args.device):
        d, n, s, om, ox, dm, dx = row
        print(f"{d:7.0f} {n:7d} {s:6.2f} {om:9.3f} {ox:8.3f} {dm:9.2f} {dx:8.2f}")


if __name__ == "__main__":
    main()
