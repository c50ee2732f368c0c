"""Persistent intrinsic dimension on a circle glued to a sphere.

Prints the mean PID of a few circle and sphere points for two neighbourhood
sizes, once with the lifetime threshold and once without it.

    python3 demos/circle_wedge_sphere_pid.py
"""
from __future__ import annotations

import numpy as np

from plh.datasets import gen_circle_wedge_sphere
from plh.pid import mean_pid, pid_batch


def main() -> None:
    lc = gen_circle_wedge_sphere(2000, seed=1)
    rng = np.random.default_rng(1)
    labels = lc.strata_labels[:-1]
    circle = rng.choice(np.flatnonzero(labels == 1), 3, replace=False)
    sphere = rng.choice(np.flatnonzero(labels == 2), 6, replace=False)
    for use_threshold in (True, False):
        for k in (25, 75):
            profiles = pid_batch(lc.cloud, np.concatenate((circle, sphere)), (k,), steps=10,
                                 use_threshold=use_threshold)
            means = mean_pid(profiles)
            c = np.mean([means[int(i)] for i in circle])
            s = np.mean([means[int(i)] for i in sphere])
            print(f"threshold={use_threshold!s:5} k={k:3d}: circle {c:.2f}, sphere {s:.2f}")


if __name__ == "__main__":
    main()
