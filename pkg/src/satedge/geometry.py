"""Constellation geometry and transmitter-receiver distance sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyVisibility
from .scenario import EARTH_RADIUS_KM, ConstellationConfig, ScenarioConfig, mix64


@dataclass(frozen=True)
class GeometrySample:
    """Distances (km) and boresight angles (rad) for one network snapshot."""

    dist_gue_bs: np.ndarray     # (K, M) km
    dist_gue_sat: np.ndarray    # (K, N) km
    dist_sue_sat: np.ndarray    # (L, N) km
    boresight_angles: np.ndarray  # (N_ant_sat, K, N) rad


def build_walker(config: ConstellationConfig) -> np.ndarray:
    """Positions (P*S, 3) in km of a Walker Delta constellation.

    Planes share inclination `i` with ascending nodes spread uniformly over
    360 degrees; satellites are uniform in each plane with the Walker phase
    offset F * 360 / (P * S) degrees between adjacent planes.
    """
    radius = EARTH_RADIUS_KM + config.altitude_km
    inc = np.radians(config.inclination_deg)
    planes = config.planes
    per_plane = config.satellites_per_plane
    total = planes * per_plane

    positions = np.empty((total, 3))
    idx = 0
    for p in range(planes):
        raan = 2.0 * np.pi * p / planes
        for s in range(per_plane):
            # Argument of latitude including the Walker phasing offset.
            u = 2.0 * np.pi * (s / per_plane + config.phase_factor * p / total)
            # Orbit-plane coordinates rotated by RAAN and inclination.
            x = np.cos(raan) * np.cos(u) - np.sin(raan) * np.sin(u) * np.cos(inc)
            y = np.sin(raan) * np.cos(u) + np.cos(raan) * np.sin(u) * np.cos(inc)
            z = np.sin(u) * np.sin(inc)
            positions[idx] = radius * np.array([x, y, z])
            idx += 1
    return positions


def slant_range(ground_point: np.ndarray, sat: np.ndarray) -> float:
    """Euclidean distance (km) between two Earth-centered points."""
    return float(np.linalg.norm(np.asarray(sat, float) - np.asarray(ground_point, float)))


def _boresight_angles(rng: np.random.Generator, scenario: ScenarioConfig,
                      n_gue: int, n_sat: int) -> np.ndarray:
    """Per-(antenna, user, satellite) off-boresight angles.

    Each (user, satellite) pair draws a nadir offset uniform in
    [0, boresight_max_frac * eps3db]; antenna elements add a fixed jitter of
    +/- boresight_jitter around it, clipped to [0, pi/2).
    """
    base = rng.uniform(0.0, scenario.boresight_max_frac * scenario.eps3db,
                      size=(n_gue, n_sat))
    jitter = rng.uniform(-scenario.boresight_jitter, scenario.boresight_jitter,
                         size=(scenario.n_ant_sat, n_gue, n_sat))
    angles = np.clip(base[None, :, :] + jitter, 0.0, np.pi / 2 - 1e-12)
    return angles


def sample_geometry(rng: np.random.Generator, scenario: ScenarioConfig,
                    mode: str | None = None) -> GeometrySample:
    """Sample all distances and boresight angles of one snapshot.

    `direct` mode draws distances uniformly from the configured windows;
    `walker` mode places ground points on the Earth sphere, builds the full
    constellation, and keeps the nearest in-window satellites.  Per-entity
    substreams keep draws stable when one population grows.
    """
    mode = mode or scenario.geometry_mode
    k, l, m, n = scenario.n_gue, scenario.n_sue, scenario.n_bs, scenario.n_sat
    root = rng.integers(0, 2**63 - 1)

    def sub(*tags):
        return np.random.default_rng(mix64(root, *tags))

    gue_bs_km = (scenario.dist_gue_bs[0] / 1e3, scenario.dist_gue_bs[1] / 1e3)
    gue_sat_km = (scenario.dist_gue_sat[0] / 1e3, scenario.dist_gue_sat[1] / 1e3)
    sue_sat_km = (scenario.dist_sue_sat[0] / 1e3, scenario.dist_sue_sat[1] / 1e3)

    dist_gue_bs = np.empty((k, m))
    dist_gue_sat = np.empty((k, n))
    dist_sue_sat = np.empty((l, n))

    if mode == "direct":
        for i in range(k):
            r = sub("gue", i)
            dist_gue_bs[i] = r.uniform(*gue_bs_km, size=m)
            dist_gue_sat[i] = r.uniform(*gue_sat_km, size=n)
        for j in range(l):
            r = sub("sue", j)
            dist_sue_sat[j] = r.uniform(*sue_sat_km, size=n)
    else:
        sats = build_walker(scenario.walker)
        radii = np.linalg.norm(sats, axis=1)

        def visible_distances(point, window, count, tag):
            d = np.linalg.norm(sats - point, axis=1)
            keep = np.sort(d[(d >= window[0]) & (d <= window[1])])
            if keep.size < count:
                raise EmptyVisibility(
                    f"{tag}: only {keep.size} of {count} satellites inside "
                    f"slant-range window [{window[0]:.0f}, {window[1]:.0f}] km")
            return keep[:count]

        for i in range(k):
            r = sub("gue", i)
            dist_gue_bs[i] = r.uniform(*gue_bs_km, size=m)
            # Random point on the Earth sphere.
            vec = r.normal(size=3)
            point = EARTH_RADIUS_KM * vec / np.linalg.norm(vec)
            dist_gue_sat[i] = visible_distances(point, gue_sat_km, n, f"GUE {i}")
        for j in range(l):
            r = sub("sue", j)
            vec = r.normal(size=3)
            # SUEs orbit below the constellation shell; place them at the
            # lower edge of their configured slant window above ground level.
            point = (radii.mean() - sue_sat_km[0]) * vec / np.linalg.norm(vec)
            dist_sue_sat[j] = visible_distances(point, sue_sat_km, n, f"SUE {j}")

    boresight = _boresight_angles(sub("boresight"), scenario, k, n)
    return GeometrySample(
        dist_gue_bs=dist_gue_bs,
        dist_gue_sat=dist_gue_sat,
        dist_sue_sat=dist_sue_sat,
        boresight_angles=boresight,
    )
