"""Seeded per-subcarrier channel generation.

Each hop (transmitter to surface, surface to receiver, optional direct
link) mixes a far-field uniform-planar-array line-of-sight component with
a tapped-delay-line Rayleigh component through the Rician factor, then
scales by the square root of the distance path gain.

Randomness comes from a counter-based Philox generator keyed by
``(seed, realization, hop)``, so any realization can be regenerated in
isolation and Monte-Carlo loops are order independent.
"""

from dataclasses import dataclass, field

import numpy as np

from ._validation import ContractError, check_positive

SPEED_OF_LIGHT = 299_792_458.0
REFERENCE_PATH_GAIN = 1e-4

HOP_INCIDENT = 0
HOP_REFLECTIVE = 1
HOP_DIRECT = 2


@dataclass(frozen=True)
class CarrierPlan:
    """Multi-carrier plan: f_n = f_c + (n - 1) * delta_f with delta_f = BW / N."""

    f_c: float = 2.4e9
    N: int = 4
    bandwidth: float = 10e6

    def __post_init__(self):
        check_positive(self.f_c, "f_c")
        check_positive(self.bandwidth, "bandwidth")
        if int(self.N) != self.N or self.N < 1:
            raise ContractError(f"N must be a positive integer, got {self.N!r}")

    @property
    def delta_f(self):
        return self.bandwidth / self.N

    @property
    def frequencies(self):
        return self.f_c + np.arange(self.N) * self.delta_f

    @property
    def wavelength(self):
        return SPEED_OF_LIGHT / self.f_c


@dataclass(frozen=True)
class Geometry:
    """Surface size, hop distances and departure/arrival angles (radians).

    ``d_D`` set to ``None`` disables the direct transmitter-receiver link.
    """

    M: int = 16
    d_I: float = 2.0
    d_R: float = 2.0
    theta_I: float = np.pi / 6
    phi_I: float = np.pi / 6
    theta_R: float = np.pi / 6
    phi_R: float = np.pi / 6
    d_D: float | None = None

    def __post_init__(self):
        if int(self.M) != self.M or self.M < 1:
            raise ContractError(f"M must be a positive integer, got {self.M!r}")
        check_positive(self.d_I, "d_I")
        check_positive(self.d_R, "d_R")
        if self.d_D is not None:
            check_positive(self.d_D, "d_D")
        for name in ("theta_I", "phi_I", "theta_R", "phi_R"):
            value = getattr(self, name)
            if not 0 <= value <= np.pi / 2 + 1e-12:
                raise ContractError(f"{name} must lie in [0, pi/2], got {value!r}")


@dataclass(frozen=True)
class TapProfile:
    """Tapped-delay-line power/delay profile for one hop."""

    powers: np.ndarray
    delays: np.ndarray
    alpha: float

    @property
    def L(self):
        return self.powers.shape[0]


@dataclass(frozen=True)
class ChannelRealization:
    """Channel stacks h_I, h_R of shape (N, M) and optional direct link h_D of shape (N,)."""

    h_I: np.ndarray
    h_R: np.ndarray
    h_D: np.ndarray | None = None
    seed: int = 0
    kappa: float = 0.0
    realization: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def N(self):
        return self.h_I.shape[0]

    @property
    def M(self):
        return self.h_I.shape[1]


def path_gain(d, L0=REFERENCE_PATH_GAIN):
    """Large-scale power gain L0 * d**-2."""
    if not np.isfinite(d) or d <= 0:
        raise ContractError(f"distance must be positive, got {d!r}")
    return L0 * float(d) ** -2


def upa_grid(M):
    """Integer (m_x, m_y) coordinates of M elements.

    The array has ceil(sqrt(M)) rows filled row-major, so m_y is the row
    and m_x the position inside the row.
    """
    rows = int(np.ceil(np.sqrt(M)))
    cols = int(np.ceil(M / rows))
    idx = np.arange(M)
    return idx % cols, idx // cols


def upa_los_vector(M, theta, phi, f, spacing):
    """Far-field UPA steering vector at frequency ``f`` for element ``spacing`` (metres)."""
    m_x, m_y = upa_grid(M)
    k = 2 * np.pi * f / SPEED_OF_LIGHT
    proj = m_x * np.sin(theta) * np.cos(phi) + m_y * np.sin(theta) * np.sin(phi)
    return np.exp(1j * k * spacing * proj)


def make_rng(seed, realization, hop):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(realization), int(hop)])))


def tap_profile(L, alpha, bandwidth, rng):
    """Draw tap powers (uniform, normalized to sum 1) and uniformly spaced delays up to 2 / (alpha BW)."""
    if L < 1:
        raise ContractError("L must be >= 1")
    check_positive(alpha, "alpha")
    powers = rng.uniform(0.0, 1.0, L)
    powers = powers / powers.sum()
    max_delay = 2.0 / (alpha * bandwidth)
    delays = np.linspace(0.0, max_delay, L) if L > 1 else np.zeros(1)
    return TapProfile(powers=powers, delays=delays, alpha=float(alpha))


def draw_tap_gains(taps, n_elements, rng):
    """Circularly-symmetric Gaussian tap gains with variance p_l, shape (L, n_elements)."""
    scale = np.sqrt(taps.powers / 2)[:, None]
    return scale * (rng.standard_normal((taps.L, n_elements)) + 1j * rng.standard_normal((taps.L, n_elements)))


def nlos_frequency_response(taps, gains, frequencies):
    """h_n = sum_l g_l exp(j 2 pi f_n t_l); returns shape (N,) + gains.shape[1:]."""
    gains = np.asarray(gains, dtype=complex)
    phase = np.exp(2j * np.pi * np.outer(np.asarray(frequencies, dtype=float), taps.delays))
    return np.tensordot(phase, gains, axes=(1, 0))


def rician_combine(kappa, los, nlos):
    """sqrt(kappa/(kappa+1)) los + sqrt(1/(kappa+1)) nlos; kappa = inf gives pure LoS."""
    if np.isnan(kappa) or kappa < 0:
        raise ContractError(f"Rician factor must be >= 0, got {kappa!r}")
    if np.isinf(kappa):
        return np.asarray(los, dtype=complex).copy()
    return np.sqrt(kappa / (kappa + 1)) * np.asarray(los) + np.sqrt(1 / (kappa + 1)) * np.asarray(nlos)


def _hop(plan, n_elements, los, kappa, alpha, L, distance, rng):
    taps = tap_profile(L, alpha, plan.bandwidth, rng)
    nlos = nlos_frequency_response(taps, draw_tap_gains(taps, n_elements, rng), plan.frequencies)
    return np.sqrt(path_gain(distance)) * rician_combine(kappa, los, nlos)


def generate_channel_set(config, seed, realization=0):
    """Build one :class:`ChannelRealization` for ``config`` (a SystemConfig)."""
    plan, geo = config.carrier, config.geometry
    spacing = plan.wavelength / 2
    freqs = plan.frequencies
    kappa, alpha, L = config.kappa, config.alpha, config.n_taps
    los_I = np.stack([upa_los_vector(geo.M, geo.theta_I, geo.phi_I, f, spacing) for f in freqs])
    los_R = np.stack([upa_los_vector(geo.M, geo.theta_R, geo.phi_R, f, spacing) for f in freqs])
    h_I = _hop(plan, geo.M, los_I, kappa, alpha, L, geo.d_I, make_rng(seed, realization, HOP_INCIDENT))
    h_R = _hop(plan, geo.M, los_R, kappa, alpha, L, geo.d_R, make_rng(seed, realization, HOP_REFLECTIVE))
    h_D = None
    if geo.d_D is not None:
        los_D = np.ones((plan.N, 1), dtype=complex)
        h_D = _hop(plan, 1, los_D, kappa, alpha, L, geo.d_D, make_rng(seed, realization, HOP_DIRECT))[:, 0]
    return ChannelRealization(h_I=h_I, h_R=h_R, h_D=h_D, seed=int(seed), kappa=float(kappa), realization=int(realization))
