"""Channel generation and the SWIPT link-level quantities.

Geometry is collinear: the AP sits at the origin, the IRS at d_ap_irs, the
energy receivers between the two at d_irs_ehr from the IRS, and the
information receivers at d_ap_idr from the AP.  All internal quantities are
linear (watts / amplitude gains); the config loader converts dB and dBm
inputs at the boundary.
"""

import json
import warnings
from dataclasses import dataclass, field, asdict

import numpy as np


@dataclass
class ExperimentConfig:
    m: int = 4                         # AP antennas
    n: int = 50                        # IRS elements
    k_i: int = 2                       # information receivers
    k_e: int = 2                       # energy receivers
    power: float = 1.0                 # transmit budget, W
    gamma: object = 10.0               # per-IDR SINR target(s), linear
    alpha: object = 1.0                # per-EHR energy weight(s)
    sigma2: object = 1e-12             # per-IDR noise power(s), W (-90 dBm)
    d_ap_irs: float = 15.0             # m
    d_irs_ehr: float = 3.0             # m, EHR cluster distance from the IRS
    d_ap_idr: float = 50.0             # m
    fading_g: str = "los"              # "los" (all-ones) or "rayleigh"
    element_gain_db: float = 3.0
    element_gain_on: str = "irs_user"  # "irs_user" | "ap_irs" | "both"
    pathloss_ref_db: float = 30.0      # attenuation at 1 m
    exp_ap_irs: float = 2.2
    exp_irs_user: float = 2.2
    exp_ap_user: float = 3.6
    direct_links: bool = True          # set False to suppress AP-user links
    seed: int = 0
    # solver knobs
    eps: float = 1e-4                  # fractional-increase stopping threshold
    max_iter_p2: int = 100
    max_outer_p1: int = 30
    randomization_count: int = 1000
    phase_restarts: int = 5
    rank1_tol: float = 1e-6
    null_on_direct: bool = False       # separate-beams nulling on direct channels
    separate_beams_phases: str = "wpt"  # "wpt" | "zero"
    sdp_feas_tol: float = 1e-7
    sdp_gap_tol: float = 1e-7
    sdp_max_iter: int = 200

    def __post_init__(self):
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.n < 0:
            raise ValueError("n must be >= 0")
        if self.power <= 0:
            raise ValueError("power must be positive")
        if self.fading_g not in ("los", "rayleigh"):
            raise ValueError(f"fading_g must be 'los' or 'rayleigh', got {self.fading_g!r}")
        if self.element_gain_on not in ("irs_user", "ap_irs", "both"):
            raise ValueError(f"unknown element_gain_on {self.element_gain_on!r}")
        if self.separate_beams_phases not in ("wpt", "zero"):
            raise ValueError(f"unknown separate_beams_phases {self.separate_beams_phases!r}")
        if np.any(self.gamma_vec() <= 0):
            raise ValueError("gamma targets must be positive")
        if np.any(self.sigma2_vec() <= 0):
            raise ValueError("sigma2 must be positive")
        a = self.alpha_vec()
        if np.any(a < 0):
            raise ValueError("alpha weights must be nonnegative")
        if self.k_e >= 1 and not np.any(a > 0):
            raise ValueError("at least one alpha weight must be positive")
        for name in ("exp_ap_irs", "exp_irs_user", "exp_ap_user"):
            if getattr(self, name) < 2.0:
                warnings.warn(f"{name} below 2 is outside the usual model range")

    def gamma_vec(self):
        return np.broadcast_to(np.atleast_1d(np.asarray(self.gamma, float)),
                               (self.k_i,)).copy()

    def alpha_vec(self):
        return np.broadcast_to(np.atleast_1d(np.asarray(self.alpha, float)),
                               (self.k_e,)).copy()

    def sigma2_vec(self):
        return np.broadcast_to(np.atleast_1d(np.asarray(self.sigma2, float)),
                               (self.k_i,)).copy()

    def to_dict(self):
        d = asdict(self)
        for key in ("gamma", "alpha", "sigma2"):
            v = d[key]
            d[key] = list(np.atleast_1d(np.asarray(v, float)))
        return d


@dataclass
class ChannelRealization:
    """One Monte-Carlo draw of every link, as amplitude gains incl. pathloss.

    Vectors are stored as columns: the physical row channel of user i is the
    conjugate transpose of the stored vector.
    """
    g_mat: np.ndarray   # (N, M) AP -> IRS
    h_d: np.ndarray     # (K_I, M) AP -> IDR
    h_r: np.ndarray     # (K_I, N) IRS -> IDR
    g_d: np.ndarray     # (K_E, M) AP -> EHR
    g_r: np.ndarray     # (K_E, N) IRS -> EHR


@dataclass
class PhaseVector:
    """IRS phase configuration; u_n = e^{j theta_n} with unit amplitude."""
    theta: np.ndarray

    def __post_init__(self):
        self.theta = np.mod(np.asarray(self.theta, float), 2 * np.pi)

    @property
    def u(self):
        return np.exp(1j * self.theta)

    @classmethod
    def zeros(cls, n):
        return cls(np.zeros(n))


def pathloss_linear(d, exponent, ref_db=30.0):
    """Linear power gain 10^(-(ref_db + 10 exponent log10 d)/10); d in meters."""
    if d < 1.0:
        raise ValueError(f"pathloss model undefined below the 1 m reference (d={d})")
    return 10.0 ** (-(ref_db + 10.0 * exponent * np.log10(d)) / 10.0)


def _cn(rng, shape):
    """i.i.d. circularly-symmetric complex Gaussian with unit variance."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def sample_channels(cfg: ExperimentConfig, rng) -> ChannelRealization:
    """Draw one channel realization.

    Every link uses its own child stream of `rng`, so the AP-user draws are
    identical across configs that differ only in N (the no-IRS comparison
    sees the same direct channels).
    """
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    rg, rhd, rhr, rgd, rgr = rng.spawn(5)

    m, n = cfg.m, cfg.n
    ref = cfg.pathloss_ref_db
    ge = 10.0 ** (cfg.element_gain_db / 20.0)
    gain_ap_irs = ge if cfg.element_gain_on in ("ap_irs", "both") else 1.0
    gain_irs_user = ge if cfg.element_gain_on in ("irs_user", "both") else 1.0

    if n > 0:
        amp_g = np.sqrt(pathloss_linear(cfg.d_ap_irs, cfg.exp_ap_irs, ref)) * gain_ap_irs
        if cfg.fading_g == "los":
            g_mat = amp_g * np.ones((n, m), dtype=complex)
        else:
            g_mat = amp_g * _cn(rg, (n, m))
    else:
        g_mat = np.zeros((0, m), dtype=complex)

    d_ap_ehr = cfg.d_ap_irs - cfg.d_irs_ehr
    amp_hd = np.sqrt(pathloss_linear(cfg.d_ap_idr, cfg.exp_ap_user, ref)) if cfg.k_i else 0.0
    amp_gd = np.sqrt(pathloss_linear(d_ap_ehr, cfg.exp_ap_user, ref)) if cfg.k_e else 0.0
    h_d = amp_hd * _cn(rhd, (cfg.k_i, m))
    g_d = amp_gd * _cn(rgd, (cfg.k_e, m))
    if not cfg.direct_links:
        h_d = np.zeros_like(h_d)
        g_d = np.zeros_like(g_d)

    if n > 0:
        d_irs_idr = abs(cfg.d_ap_idr - cfg.d_ap_irs)
        amp_hr = (np.sqrt(pathloss_linear(d_irs_idr, cfg.exp_irs_user, ref))
                  * gain_irs_user if cfg.k_i else 0.0)
        amp_gr = (np.sqrt(pathloss_linear(cfg.d_irs_ehr, cfg.exp_irs_user, ref))
                  * gain_irs_user if cfg.k_e else 0.0)
        h_r = amp_hr * _cn(rhr, (cfg.k_i, n))
        g_r = amp_gr * _cn(rgr, (cfg.k_e, n))
    else:
        h_r = np.zeros((cfg.k_i, 0), dtype=complex)
        g_r = np.zeros((cfg.k_e, 0), dtype=complex)

    return ChannelRealization(g_mat=g_mat, h_d=h_d, h_r=h_r, g_d=g_d, g_r=g_r)


def effective_channel(direct, reflected, phases: PhaseVector, g_mat):
    """Composite channel column h = G^H Theta^H h_r + h_d.

    Its conjugate transpose is the physical row channel
    h^H = h_r^H Theta G + h_d^H.
    """
    direct = np.asarray(direct, dtype=complex)
    reflected = np.asarray(reflected, dtype=complex)
    if reflected.size == 0:
        return direct.copy()
    return g_mat.conj().T @ (np.conj(phases.u) * reflected) + direct


def effective_channels(ch: ChannelRealization, phases: PhaseVector):
    """(h_eff, g_eff) stacks for all IDRs and EHRs at the given phases."""
    h_eff = np.array([effective_channel(ch.h_d[i], ch.h_r[i], phases, ch.g_mat)
                      for i in range(ch.h_d.shape[0])]).reshape(ch.h_d.shape)
    g_eff = np.array([effective_channel(ch.g_d[j], ch.g_r[j], phases, ch.g_mat)
                      for j in range(ch.g_d.shape[0])]).reshape(ch.g_d.shape)
    return h_eff, g_eff


def energy_matrix(g_eff, alpha):
    """S = sum_j alpha_j g_j g_j^H over the effective EHR channels."""
    m = g_eff.shape[1]
    s_mat = np.zeros((m, m), dtype=complex)
    for j in range(g_eff.shape[0]):
        s_mat += alpha[j] * np.outer(g_eff[j], g_eff[j].conj())
    return 0.5 * (s_mat + s_mat.conj().T)


def harvested_power(g_eff, precoders, alpha):
    """Per-EHR received RF power and the weighted sum.

    E_j = sum_k |g_j^H w_k|^2 + sum_k |g_j^H v_k|^2; returns (E, sum_j alpha_j E_j).
    `precoders` is anything with .w (K_I, M) and .v (K_v, M) arrays.
    """
    g_eff = np.atleast_2d(np.asarray(g_eff, dtype=complex))
    alpha = np.asarray(alpha, dtype=float)
    e = np.zeros(g_eff.shape[0])
    for beams in (precoders.w, precoders.v):
        if beams is not None and len(beams):
            prods = g_eff.conj() @ np.asarray(beams, dtype=complex).T
            e += np.sum(np.abs(prods) ** 2, axis=1)
    return e, float(alpha @ e)


def sinr(h_eff, precoders, sigma2):
    """Per-IDR SINR (linear): own-beam power over interference plus noise."""
    h_eff = np.atleast_2d(np.asarray(h_eff, dtype=complex))
    sigma2 = np.asarray(sigma2, dtype=float)
    k_i = h_eff.shape[0]
    w = np.asarray(precoders.w, dtype=complex)
    prods_w = h_eff.conj() @ w.T                        # (K_I, K_I), [i,k] = h_i^H w_k
    sig = np.abs(np.diag(prods_w)) ** 2
    interf = np.sum(np.abs(prods_w) ** 2, axis=1) - sig
    if precoders.v is not None and len(precoders.v):
        prods_v = h_eff.conj() @ np.asarray(precoders.v, dtype=complex).T
        interf = interf + np.sum(np.abs(prods_v) ** 2, axis=1)
    return sig / (interf + sigma2[:k_i])


# --- config file handling -------------------------------------------------

_DB_KEYS = {
    "sigma2_dbm": ("sigma2", lambda v: 10.0 ** ((np.asarray(v, float) - 30.0) / 10.0)),
    "power_dbm": ("power", lambda v: 10.0 ** ((float(v) - 30.0) / 10.0)),
    "gamma_db": ("gamma", lambda v: 10.0 ** (np.asarray(v, float) / 10.0)),
}


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build a config from a flat key-value mapping.

    Keys match ExperimentConfig fields; dB/dBm variants (sigma2_dbm,
    power_dbm, gamma_db) are converted to linear units.  Unknown keys raise
    ValueError naming the offending key.
    """
    fields = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    kwargs = {}
    for key, value in data.items():
        if key in _DB_KEYS:
            target, conv = _DB_KEYS[key]
            converted = conv(value)
            kwargs[target] = converted.tolist() if hasattr(converted, "tolist") else converted
        elif key in fields:
            kwargs[key] = value
        else:
            raise ValueError(f"unknown config key: {key!r}")
    return ExperimentConfig(**kwargs)


def load_config(path) -> ExperimentConfig:
    """Load a flat JSON config file."""
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ValueError("config file must contain a flat JSON object")
    return config_from_dict(data)
