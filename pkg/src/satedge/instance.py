"""Sampling of one complete network realization: geometry, channels,
laser links, tasks, and decode orders."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import (FsoLink, SatelliteChannel, assemble_sat_channel,
                      doppler_compensate, fso_snr_slope, gen_terrestrial,
                      beam_gain, large_scale_C, rain_attenuation)
from .costmodel import TaskSpec
from .geometry import GeometrySample, sample_geometry
from .linkrate import SicOrder, sic_order
from .scenario import ScenarioConfig, mix64


@dataclass
class NetworkInstance:
    """One sampled snapshot of the whole network."""

    scenario: ScenarioConfig
    geometry: GeometrySample
    tasks_gue: list            # K TaskSpec
    tasks_sue: list            # L TaskSpec
    h_bs: np.ndarray           # (M, K, n_ant_bs) all users' vectors per BS
    g_sat: np.ndarray          # (N, K, n_ant_sat) all users' vectors per sat
    sat_channels: list         # K lists of N SatelliteChannel (factor audit)
    fso_links: list            # L lists of N FsoLink
    fso_slope: np.ndarray      # (L, N) per-watt SNR slope
    orders_bs: list            # M SicOrder
    orders_sat: list           # N SicOrder
    dist_gue_sat_m: np.ndarray  # (K, N)
    dist_sue_sat_m: np.ndarray  # (L, N)
    delta2_sq: float           # effective satellite-uplink noise in rates


def sample_instance(rng: np.random.Generator,
                    scenario: ScenarioConfig) -> NetworkInstance:
    """Draw geometry, channels, laser budgets, and tasks for one snapshot.

    Every entity uses its own child stream keyed by (root, kind, index), so
    enlarging one population leaves all other draws untouched.
    """
    root = int(rng.integers(0, 2**63 - 1))

    def sub(*tags):
        return np.random.default_rng(mix64(root, *tags))

    k_n, l_n, m_n, n_n = (scenario.n_gue, scenario.n_sue,
                          scenario.n_bs, scenario.n_sat)
    geometry = sample_geometry(sub("geometry"), scenario)

    tasks_gue = []
    for k in range(k_n):
        r = sub("task_g", k)
        tasks_gue.append(TaskSpec(d=r.uniform(*scenario.d_gue_bits),
                                  c=r.uniform(*scenario.c_gue)))
    tasks_sue = []
    for l in range(l_n):
        r = sub("task_s", l)
        tasks_sue.append(TaskSpec(d=r.uniform(*scenario.d_sue_bits),
                                  c=r.uniform(*scenario.c_sue)))

    h_bs = np.zeros((m_n, k_n, scenario.n_ant_bs), dtype=complex)
    for k in range(k_n):
        for m in range(m_n):
            ch = gen_terrestrial(sub("h", k, m), geometry.dist_gue_bs[k, m],
                                 scenario.n_ant_bs)
            h_bs[m, k] = ch.h

    g_sat = np.zeros((n_n, k_n, scenario.n_ant_sat), dtype=complex)
    sat_channels: list[list[SatelliteChannel]] = []
    tx_gain_db = scenario.sat_tx_gain_db
    for k in range(k_n):
        row = []
        for n in range(n_n):
            r = sub("g", k, n)
            phi_m = geometry.dist_gue_sat[k, n] * 1e3
            c_big = large_scale_C(scenario.carrier, phi_m, tx_gain_db,
                                  scenario.boltzmann, scenario.b2,
                                  scenario.noise_temp,
                                  mu=scenario.light_speed)
            rain = rain_attenuation(r, scenario.rain_mu_db,
                                    scenario.rain_var_db2,
                                    scenario.n_ant_sat)
            beams = beam_gain(geometry.boresight_angles[:, k, n],
                              scenario.eps3db, scenario.b_max)
            doppler = float(r.uniform(0.0, 1.0))
            ch = doppler_compensate(
                assemble_sat_channel(c_big, rain, beams, doppler, tx_gain_db))
            row.append(ch)
            g_sat[n, k] = ch.g
        sat_channels.append(row)

    fso_links: list[list[FsoLink]] = []
    fso_slope = np.zeros((l_n, n_n))
    for l in range(l_n):
        row = []
        for n in range(n_n):
            link = FsoLink(wavelength=scenario.fso_wavelength,
                           distance=geometry.dist_sue_sat[l, n] * 1e3,
                           d_tx=scenario.fso_dt, d_rx=scenario.fso_dr,
                           e_tx=scenario.fso_et, e_rx=scenario.fso_er,
                           eta_tx=scenario.fso_eta_t,
                           eta_rx=scenario.fso_eta_r)
            row.append(link)
            fso_slope[l, n] = fso_snr_slope(link, scenario.noise_fso)
        fso_links.append(row)

    orders_bs = [sic_order(h_bs[m]) if k_n else SicOrder(np.zeros(0, int))
                 for m in range(m_n)]
    orders_sat = [sic_order(g_sat[n]) if k_n else SicOrder(np.zeros(0, int))
                  for n in range(n_n)]

    delta2_sq = scenario.noise_sat if scenario.sat_noise_mode == "literal" else 1.0
    return NetworkInstance(
        scenario=scenario,
        geometry=geometry,
        tasks_gue=tasks_gue,
        tasks_sue=tasks_sue,
        h_bs=h_bs,
        g_sat=g_sat,
        sat_channels=sat_channels,
        fso_links=fso_links,
        fso_slope=fso_slope,
        orders_bs=orders_bs,
        orders_sat=orders_sat,
        dist_gue_sat_m=geometry.dist_gue_sat * 1e3,
        dist_sue_sat_m=geometry.dist_sue_sat * 1e3,
        delta2_sq=delta2_sq,
    )
