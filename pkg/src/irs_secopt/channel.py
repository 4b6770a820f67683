"""Scenario geometry, Rician fading and IRS-effective channels."""

import dataclasses
import hashlib
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NonPositiveDistance, NonUnitModulus, ShapeMismatch
from .numerics import TOL, as_complex_matrix

__all__ = [
    "LINKS",
    "ScenarioConfig",
    "ChannelSet",
    "dbm_to_watts",
    "db_to_linear",
    "path_loss_db",
    "ula_steering",
    "los_matrix",
    "sample_rician",
    "realization_rng",
    "scenario_channels",
    "effective_channels",
    "as_reflect_vector",
    "random_theta",
]

# stream keys; the integer is mixed into the per-realization seed
LINKS = {"tr": 1, "te": 2, "ts": 3, "sr": 4, "se": 5}
THETA_STREAM = 101


def dbm_to_watts(dbm):
    return 10.0 ** ((dbm - 30.0) / 10.0)


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


@dataclass(frozen=True)
class ScenarioConfig:
    """Node layout, antenna counts, powers and propagation parameters.

    Powers are stored in watts. The defaults reproduce the two-dimensional
    layout with AP, user, eavesdropper and IRS at (0, 0), (45, 0), (55, 0)
    and (50, 5) m, four antennas everywhere, 1 W budget and -40 dBm noise.
    """

    n_t: int = 4
    n_r: int = 4
    n_e: int = 4
    m: int = 20
    ap_pos: tuple = (0.0, 0.0)
    user_pos: tuple = (45.0, 0.0)
    eve_pos: tuple = (55.0, 0.0)
    irs_pos: tuple = (50.0, 5.0)
    p_max: float = 1.0
    sigma_r2: float = dbm_to_watts(-40.0)
    sigma_e2: float = dbm_to_watts(-40.0)
    kappa: dict = field(default_factory=lambda: {"tr": 0.0, "te": 0.0, "ts": 0.0, "sr": 1.0, "se": 1.0})
    alpha: dict = field(default_factory=lambda: {k: 2.0 for k in LINKS})
    beta0_db: float = -30.0
    d0: float = 1.0
    los_model: str = "steering"
    master_seed: int = 0

    def __post_init__(self):
        for name in ("n_t", "n_r", "n_e", "m"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if not self.p_max > 0:
            raise ConfigError("p_max must be positive")
        if not (self.sigma_r2 > 0 and self.sigma_e2 > 0):
            raise ConfigError("noise powers must be positive")
        if set(self.kappa) != set(LINKS) or set(self.alpha) != set(LINKS):
            raise ConfigError(f"kappa and alpha need exactly the links {sorted(LINKS)}")
        if any(v < 0 for v in self.kappa.values()):
            raise ConfigError("Rician factors must be >= 0")
        if any(not v > 0 for v in self.alpha.values()):
            raise ConfigError("path loss exponents must be positive")
        if not self.d0 > 0:
            raise ConfigError("d0 must be positive")
        if self.los_model not in ("steering", "ones"):
            raise ConfigError(f"unknown los_model {self.los_model!r}")
        if self.master_seed < 0:
            raise ConfigError("master_seed must be non-negative")
        nodes = [self.ap_pos, self.user_pos, self.eve_pos, self.irs_pos]
        for i, a in enumerate(nodes):
            for b in nodes[i + 1:]:
                if np.hypot(a[0] - b[0], a[1] - b[1]) <= 0:
                    raise ConfigError("two nodes share the same coordinates")

    def link_endpoints(self):
        """Map link name to (transmitter position, receiver position)."""
        return {
            "tr": (self.ap_pos, self.user_pos),
            "te": (self.ap_pos, self.eve_pos),
            "ts": (self.ap_pos, self.irs_pos),
            "sr": (self.irs_pos, self.user_pos),
            "se": (self.irs_pos, self.eve_pos),
        }

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def swapped(self):
        """Same scenario with the user and eavesdropper coordinates exchanged."""
        return self.replace(user_pos=self.eve_pos, eve_pos=self.user_pos)


@dataclass(frozen=True, eq=False)
class ChannelSet:
    h_tr: np.ndarray
    h_te: np.ndarray
    h_sr: np.ndarray
    h_se: np.ndarray
    h_ts: np.ndarray
    sigma_r2: float
    sigma_e2: float

    def __post_init__(self):
        for name in ("h_tr", "h_te", "h_sr", "h_se", "h_ts"):
            object.__setattr__(self, name, as_complex_matrix(getattr(self, name), name))
        n_r, n_t = self.h_tr.shape
        n_e = self.h_te.shape[0]
        m = self.h_ts.shape[0]
        expected = {
            "h_te": (n_e, n_t),
            "h_sr": (n_r, m),
            "h_se": (n_e, m),
            "h_ts": (m, n_t),
        }
        for name, shape in expected.items():
            if getattr(self, name).shape != shape:
                raise ShapeMismatch(f"{name} has shape {getattr(self, name).shape}, expected {shape}")
        if not (self.sigma_r2 > 0 and self.sigma_e2 > 0):
            raise ConfigError("noise powers must be positive")

    @property
    def n_t(self):
        return self.h_tr.shape[1]

    @property
    def n_r(self):
        return self.h_tr.shape[0]

    @property
    def n_e(self):
        return self.h_te.shape[0]

    @property
    def m(self):
        return self.h_ts.shape[0]

    def without_irs(self):
        """Copy with the IRS reflection paths zeroed."""
        return dataclasses.replace(
            self, h_sr=np.zeros_like(self.h_sr), h_se=np.zeros_like(self.h_se)
        )

    def digest(self):
        """SHA-256 over every matrix and noise power (used for pairing checks)."""
        h = hashlib.sha256()
        for name in ("h_tr", "h_te", "h_sr", "h_se", "h_ts"):
            arr = np.ascontiguousarray(getattr(self, name))
            h.update(str(arr.shape).encode())
            h.update(arr.tobytes())
        h.update(np.array([self.sigma_r2, self.sigma_e2]).tobytes())
        return h.hexdigest()


def path_loss_db(d, alpha, beta0_db, d0=1.0):
    """Log-distance path loss ``beta0 - 10 alpha log10(d / d0)`` in dB."""
    if not d > 0 or not d0 > 0:
        raise NonPositiveDistance(f"distances must be positive (d={d}, d0={d0})")
    return beta0_db - 10.0 * alpha * np.log10(d / d0)


def ula_steering(n, angle):
    """Half-wavelength ULA response; array axis along y, angle from the x axis."""
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def los_matrix(n_rx, n_tx, tx_pos, rx_pos, model="steering"):
    if model == "ones":
        return np.ones((n_rx, n_tx), dtype=np.complex128)
    dx, dy = rx_pos[0] - tx_pos[0], rx_pos[1] - tx_pos[1]
    departure = np.arctan2(dy, dx)
    arrival = np.arctan2(-dy, -dx)
    return np.outer(ula_steering(n_rx, arrival), ula_steering(n_tx, departure).conj())


def sample_rician(rows, cols, kappa, beta_linear, los, rng):
    """Draw ``sqrt(beta/(kappa+1)) (sqrt(kappa) H_los + H_nlos)``.

    ``H_nlos`` has i.i.d. CN(0, 1) entries. Values are consumed from ``rng``
    in row-major order, real part first, so a prefix of columns is stable
    when ``cols`` grows.
    """
    los = np.asarray(los, dtype=np.complex128)
    if los.shape != (rows, cols):
        raise ShapeMismatch(f"LoS matrix has shape {los.shape}, expected {(rows, cols)}")
    if not beta_linear > 0 or kappa < 0:
        raise ConfigError("need beta_linear > 0 and kappa >= 0")
    if kappa > 0 and np.max(np.abs(np.abs(los) - 1.0)) > 1e-9:
        raise ConfigError("LoS component must have unit-modulus entries")
    g = rng.standard_normal((rows, cols, 2))
    nlos = (g[..., 0] + 1j * g[..., 1]) / np.sqrt(2.0)
    return np.sqrt(beta_linear / (kappa + 1.0)) * (np.sqrt(kappa) * los + nlos)


def realization_rng(master_seed, realization_index, *keys):
    """Independent generator for one (seed, realization, stream) triple."""
    seq = np.random.SeedSequence([int(master_seed), int(realization_index), *map(int, keys)])
    return np.random.default_rng(seq)


def _link_shape(cfg, link):
    return {
        "tr": (cfg.n_r, cfg.n_t),
        "te": (cfg.n_e, cfg.n_t),
        "ts": (cfg.m, cfg.n_t),
        "sr": (cfg.n_r, cfg.m),
        "se": (cfg.n_e, cfg.m),
    }[link]


def scenario_channels(cfg, realization_index):
    """Deterministic channel draw for realization ``realization_index``.

    Every matrix row has its own random stream, so growing ``m`` or ``n_r``
    keeps the already-existing entries, and the direct links do not depend
    on the IRS size at all.
    """
    mats = {}
    for link, (tx, rx) in cfg.link_endpoints().items():
        rows, cols = _link_shape(cfg, link)
        d = float(np.hypot(rx[0] - tx[0], rx[1] - tx[1]))
        beta = db_to_linear(path_loss_db(d, cfg.alpha[link], cfg.beta0_db, cfg.d0))
        los = los_matrix(rows, cols, tx, rx, cfg.los_model)
        out = np.empty((rows, cols), dtype=np.complex128)
        for r in range(rows):
            rng = realization_rng(cfg.master_seed, realization_index, LINKS[link], r)
            out[r] = sample_rician(1, cols, cfg.kappa[link], beta, los[r:r + 1], rng)[0]
        mats[link] = out
    return ChannelSet(
        h_tr=mats["tr"],
        h_te=mats["te"],
        h_sr=mats["sr"],
        h_se=mats["se"],
        h_ts=mats["ts"],
        sigma_r2=cfg.sigma_r2,
        sigma_e2=cfg.sigma_e2,
    )


def as_reflect_vector(theta, m=None):
    theta = np.asarray(theta, dtype=np.complex128).ravel()
    if m is not None and theta.size != m:
        raise ShapeMismatch(f"theta has length {theta.size}, expected {m}")
    if np.any(np.abs(np.abs(theta) - 1.0) > TOL.unit_modulus):
        raise NonUnitModulus("reflection coefficients must have unit modulus")
    return theta


def random_theta(m, rng):
    """Unit-modulus vector with i.i.d. uniform phases on [0, 2 pi)."""
    return np.exp(1j * 2.0 * np.pi * rng.random(m))


def effective_channels(chs, theta):
    """Return ``(G_TR, G_TE)`` for reflection vector ``theta``."""
    theta = as_reflect_vector(theta, chs.m)
    cascade = theta[:, None] * chs.h_ts
    return chs.h_tr + chs.h_sr @ cascade, chs.h_te + chs.h_se @ cascade
