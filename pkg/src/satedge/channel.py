"""Channel generation: terrestrial Rayleigh links, satellite uplinks with
rain attenuation and Bessel-tapered beam gains, and laser inter-satellite
link budgets."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import jv

from .errors import NonPositiveDistance, NonPositiveParameter, ShapeMismatch

_LN10_OVER_20 = math.log(10.0) / 20.0


@dataclass(frozen=True)
class TerrestrialChannel:
    """Uplink vector of one user at one multi-antenna BS."""

    h: np.ndarray  # (n_antennas,) complex


@dataclass(frozen=True)
class SatelliteChannel:
    """Satellite uplink vector with its stored generative factors.

    g = sqrt(large_scale) * sqrt(beam_gain) (elementwise) * rain
        * exp(j 2 pi doppler_phase)
    """

    g: np.ndarray             # (n_antennas,) complex
    large_scale: float
    rain: np.ndarray          # (n_antennas,) complex
    beam_gain: np.ndarray     # (n_antennas,) nonnegative, linear
    doppler_phase: float      # cycles in [0, 1)
    tx_gain_db: float

    def __post_init__(self):
        if not (self.rain.shape == self.beam_gain.shape == self.g.shape):
            raise ShapeMismatch("satellite channel factor shapes differ")

    def recompose(self) -> np.ndarray:
        return (math.sqrt(self.large_scale) * np.sqrt(self.beam_gain)
                * self.rain * np.exp(2j * np.pi * self.doppler_phase))


@dataclass(frozen=True)
class FsoLink:
    """Laser link budget between a space user and a satellite."""

    wavelength: float   # m
    distance: float     # m
    d_tx: float         # aperture diameter, m
    d_rx: float
    e_tx: float         # pointing error, rad
    e_rx: float
    eta_tx: float
    eta_rx: float

    def __post_init__(self):
        for name in ("wavelength", "distance", "d_tx", "d_rx"):
            if getattr(self, name) <= 0:
                raise NonPositiveParameter(f"FsoLink.{name} must be > 0")
        for name in ("eta_tx", "eta_rx"):
            if not 0 < getattr(self, name) <= 1:
                raise NonPositiveParameter(f"FsoLink.{name} must be in (0, 1]")
        if self.e_tx < 0 or self.e_rx < 0:
            raise NonPositiveParameter("pointing errors must be >= 0")


def pathloss_db(tau_km: float) -> float:
    """Urban-macro pathloss 128.1 + 37.6 log10(distance in km), in dB."""
    if tau_km <= 0:
        raise NonPositiveDistance(f"distance must be > 0 km, got {tau_km}")
    return 128.1 + 37.6 * math.log10(tau_km)


def gen_terrestrial(rng: np.random.Generator, tau_km: float,
                    n_antennas: int) -> TerrestrialChannel:
    """Rayleigh vector with per-entry variance set by the pathloss law."""
    if n_antennas < 1:
        raise NonPositiveParameter("n_antennas must be >= 1")
    var = 10.0 ** (-pathloss_db(tau_km) / 10.0)
    scale = math.sqrt(var / 2.0)
    h = scale * (rng.standard_normal(n_antennas)
                 + 1j * rng.standard_normal(n_antennas))
    return TerrestrialChannel(h=h)


def large_scale_C(f_hz: float, phi_m: float, g_db: float, kappa: float,
                  b2_hz: float, temp_k: float,
                  mu: float = 3.0e8) -> float:
    """Large-scale gain of the satellite uplink.

    Free-space amplitude term (mu / 4 pi f phi)^2 times the receive gain,
    normalized by the receiver noise power kappa * B2 * T.
    """
    for name, v in (("f_hz", f_hz), ("phi_m", phi_m), ("kappa", kappa),
                    ("b2_hz", b2_hz), ("temp_k", temp_k)):
        if v <= 0:
            raise NonPositiveParameter(f"{name} must be > 0, got {v}")
    g_lin = 10.0 ** (g_db / 10.0)
    return (mu / (4.0 * math.pi * f_hz * phi_m)) ** 2 * g_lin / (kappa * b2_hz * temp_k)


def rain_attenuation(rng: np.random.Generator, mu_r_db: float,
                     sigma2_r_db2: float, n: int) -> np.ndarray:
    """Complex rain-attenuation vector.

    Amplitudes follow the Loo convention: x ~ Normal(mu_r, sigma_r^2) in dB,
    amplitude = 10^(x/20); phases are i.i.d. uniform on [0, 2 pi).
    """
    if n < 1:
        raise NonPositiveParameter("n must be >= 1")
    if sigma2_r_db2 < 0:
        raise NonPositiveParameter("sigma2_r_db2 must be >= 0")
    x_db = rng.normal(mu_r_db, math.sqrt(sigma2_r_db2), size=n)
    amp = 10.0 ** (x_db / 20.0)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=n)
    return amp * np.exp(1j * phase)


def beam_gain(eps: np.ndarray, eps3db: float, b_max: float) -> np.ndarray:
    """Tapered-aperture receive gain per antenna element.

    u = 2.07123 sin(eps) / sin(eps3db); gain = b_max * (J1(u)/(2u)
    + 36 J3(u)/u^3)^3, with the u -> 0 limit (bracket -> 1) handled
    analytically so boresight yields exactly b_max.
    """
    eps = np.asarray(eps, dtype=float)
    if eps3db <= 0:
        raise NonPositiveParameter("eps3db must be > 0")
    if np.any(eps < 0) or np.any(eps >= np.pi / 2):
        raise NonPositiveParameter("eps must lie in [0, pi/2)")
    u = 2.07123 * np.sin(eps) / math.sin(eps3db)
    bracket = np.ones_like(u)
    nz = u > 1e-8
    unz = u[nz]
    bracket[nz] = jv(1, unz) / (2.0 * unz) + 36.0 * jv(3, unz) / unz ** 3
    return b_max * bracket ** 3


def assemble_sat_channel(large_scale: float, rain: np.ndarray,
                         beam: np.ndarray, doppler_phase: float,
                         tx_gain_db: float) -> SatelliteChannel:
    """Compose the satellite uplink vector from its stored factors."""
    rain = np.asarray(rain)
    beam = np.asarray(beam, dtype=float)
    if rain.shape != beam.shape:
        raise ShapeMismatch(f"rain {rain.shape} vs beam {beam.shape}")
    g = (math.sqrt(large_scale) * np.sqrt(beam) * rain
         * np.exp(2j * np.pi * doppler_phase))
    return SatelliteChannel(g=g, large_scale=large_scale, rain=rain,
                            beam_gain=beam, doppler_phase=doppler_phase,
                            tx_gain_db=tx_gain_db)


def doppler_compensate(ch: SatelliteChannel) -> SatelliteChannel:
    """Remove the common Doppler phase rotation; norms are unchanged."""
    g = ch.g * np.exp(-2j * np.pi * ch.doppler_phase)
    return SatelliteChannel(g=g, large_scale=ch.large_scale, rain=ch.rain,
                            beam_gain=ch.beam_gain, doppler_phase=0.0,
                            tx_gain_db=ch.tx_gain_db)


def fso_gains(link: FsoLink) -> tuple[float, float, float, float]:
    """(G_tx, G_rx, L_tx, L_rx): aperture gains and pointing-loss factors."""
    g_tx = (math.pi * link.d_tx / link.wavelength) ** 2
    g_rx = (math.pi * link.d_rx / link.wavelength) ** 2
    l_tx = math.exp(-g_tx * link.e_tx ** 2)
    l_rx = math.exp(-g_rx * link.e_rx ** 2)
    return g_tx, g_rx, l_tx, l_rx


def fso_snr_slope(link: FsoLink, delta3_sq: float) -> float:
    """Received SNR per transmitted watt of the laser link.

    slope = eta_t eta_r (lambda / 4 pi phi)^2 G_t G_r L_t L_r / delta3^2,
    so SNR = q * slope for transmit power q.
    """
    if delta3_sq <= 0:
        raise NonPositiveParameter("delta3_sq must be > 0")
    g_tx, g_rx, l_tx, l_rx = fso_gains(link)
    spread = (link.wavelength / (4.0 * math.pi * link.distance)) ** 2
    return link.eta_tx * link.eta_rx * spread * g_tx * g_rx * l_tx * l_rx / delta3_sq
