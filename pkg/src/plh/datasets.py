"""Synthetic spaces with known singular points."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .pointcloud import PointCloud, save_point_cloud
from .sampling import make_rng, sample_annulus


@dataclass(frozen=True)
class LabeledCloud:
    """A point cloud whose singular points are known by construction.

    ``strata_labels`` holds the dimension of the stratum each point was drawn
    from; singular points carry the label of the top stratum.
    """

    cloud: PointCloud
    singular_ids: tuple[int, ...]
    strata_labels: np.ndarray
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        labels = np.asarray(self.strata_labels, dtype=np.int64)
        if labels.shape != (len(self.cloud),):
            raise ValueError("one stratum label per point is required")
        for i in self.singular_ids:
            if not 0 <= i < len(self.cloud):
                raise ValueError(f"singular id {i} out of range")
        object.__setattr__(self, "strata_labels", labels)
        object.__setattr__(self, "singular_ids", tuple(int(i) for i in self.singular_ids))

    @property
    def points(self) -> np.ndarray:
        return self.cloud.points

    def save(self, cloud_path, labels_path) -> None:
        save_point_cloud(self.cloud, cloud_path)
        write_labels(labels_path, self.strata_labels, self.singular_ids)


def write_labels(path, labels, singular_ids) -> None:
    singular = set(singular_ids)
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["point_id", "stratum", "singular"])
        for i, lab in enumerate(labels):
            w.writerow([i, int(lab), int(i in singular)])


def read_labels(path) -> tuple[np.ndarray, list[int]]:
    labels, singular = [], []
    with Path(path).open(newline="") as fh:
        for row in csv.DictReader(fh):
            labels.append(int(row["stratum"]))
            if int(row["singular"]):
                singular.append(int(row["point_id"]))
    return np.asarray(labels, dtype=np.int64), singular


def _sphere(rng, count: int, n: int) -> np.ndarray:
    # uniform on S^n in R^(n+1)
    return sample_annulus(n + 1, 1.0, 1.0, count, rng=rng).points


def gen_pinched_torus(count: int, R: float = 2.0, r: float = 1.0, seed: int = 0) -> LabeledCloud:
    """Torus whose meridian at phi = 0 is collapsed to the point (R, 0, 0).

    The tube radius follows ``r * sin(phi / 2)``.  Angles are drawn by
    rejection against the weight ``R + rho cos(theta)``; the pinch point is
    appended last.
    """
    if count < 1:
        raise ValueError("count must be at least 1")
    if not R > r > 0:
        raise ValueError(f"need R > r > 0, got R={R}, r={r}")
    rng = make_rng(seed)
    phi = np.empty(0)
    theta = np.empty(0)
    while len(phi) < count:
        batch = 2 * (count - len(phi)) + 16
        p = rng.uniform(0, 2 * np.pi, batch)
        t = rng.uniform(0, 2 * np.pi, batch)
        rho = r * np.sin(p / 2)
        keep = rng.uniform(0, R + r, batch) < R + rho * np.cos(t)
        phi = np.concatenate([phi, p[keep]])
        theta = np.concatenate([theta, t[keep]])
    phi, theta = phi[:count], theta[:count]
    rho = r * np.sin(phi / 2)
    ring = R + rho * np.cos(theta)
    pts = np.column_stack([ring * np.cos(phi), ring * np.sin(phi), rho * np.sin(theta)])
    pts = np.vstack([pts, [R, 0.0, 0.0]])
    return LabeledCloud(PointCloud(pts), (count,), np.full(count + 1, 2),
                        {"space": "pinched-torus", "R": R, "r": r, "seed": seed})


def gen_wedged_spheres(n: int, count: int, seed: int = 0) -> LabeledCloud:
    """Two unit n-spheres centred at (+-1, 0, ..., 0), touching at the origin."""
    if n < 1:
        raise ValueError("sphere dimension must be at least 1")
    if count < 2:
        raise ValueError("count must be at least 2")
    rng = make_rng(seed)
    half = count // 2
    left = _sphere(rng, half, n)
    right = _sphere(rng, count - half, n)
    left[:, 0] -= 1.0
    right[:, 0] += 1.0
    pts = np.vstack([left, right, np.zeros((1, n + 1))])
    return LabeledCloud(PointCloud(pts), (count,), np.full(count + 1, n),
                        {"space": "wedged-spheres", "dim": n, "seed": seed})


def gen_circle_wedge_sphere(count: int = 2000, seed: int = 0) -> LabeledCloud:
    """A unit circle and a unit sphere in R^3 glued at the origin.

    The sphere is centred at (1, 0, 0); the circle lies in the plane z = 0
    around (-1, 0, 0).  Labels are 1 on the circle and 2 on the sphere and
    the gluing point.
    """
    if count < 2:
        raise ValueError("count must be at least 2")
    rng = make_rng(seed)
    n_circle = count // 2
    circle = _sphere(rng, n_circle, 1)
    circle = np.column_stack([circle[:, 0] - 1.0, circle[:, 1], np.zeros(n_circle)])
    sphere = _sphere(rng, count - n_circle, 2)
    sphere[:, 0] += 1.0
    pts = np.vstack([circle, sphere, np.zeros((1, 3))])
    labels = np.concatenate([np.full(n_circle, 1), np.full(count - n_circle + 1, 2)])
    return LabeledCloud(PointCloud(pts), (count,), labels,
                        {"space": "circle-wedge-sphere", "seed": seed})


def gen_flat_disc(n: int, N: int, count: int, radius: float = 1.0, seed: int = 0) -> LabeledCloud:
    """Uniform sample of the n-disc of ``radius`` in the first n coordinates of R^N."""
    if n < 1 or n > N:
        raise ValueError(f"need 1 <= n <= N, got n={n}, N={N}")
    if count < 1 or radius <= 0:
        raise ValueError("count and radius must be positive")
    disc = sample_annulus(n, 0.0, radius, count, rng=make_rng(seed)).points
    pts = np.zeros((count, N))
    pts[:, :n] = disc
    return LabeledCloud(PointCloud(pts), (), np.full(count, n),
                        {"space": "flat-disc", "dim": n, "ambient": N, "radius": radius, "seed": seed})


GENERATORS = {
    "pinched-torus": gen_pinched_torus,
    "wedged-spheres": gen_wedged_spheres,
    "circle-wedge-sphere": gen_circle_wedge_sphere,
    "flat-disc": gen_flat_disc,
}
