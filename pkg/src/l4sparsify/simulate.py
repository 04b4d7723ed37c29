"""Uncoded MU-MIMO uplink BER simulation.

``y = H s + n`` with unit-energy Gray-mapped QPSK/16QAM symbols and circular
Gaussian noise of per-entry variance ``n0``. SNR is per receive antenna,
``E||H s||^2 / (B n0) = ||H||_F^2 / (B n0)``.

Detectors: antenna-domain LMMSE, and the beamspace largest-entry (LE)
detector that keeps the ``ceil(density B)`` beamspace rows with the most
channel energy before running LMMSE on the reduced system.
"""
import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DetectionError, InvalidArguments
from .matkit import as_unitary, dft_matrix
from .models import philox

STREAM_BER = 5
# condition number above which the LMMSE normal matrix counts as singular
SINGULAR_COND = 1e12


@dataclass(frozen=True)
class Constellation:
    name: str
    points: np.ndarray  # (K,) complex, unit mean energy
    bits: np.ndarray  # (K, bits_per_symbol) uint8, MSB first

    @property
    def bits_per_symbol(self):
        return self.bits.shape[1]

    def map(self, bits):
        """``(..., bps)`` bit array -> symbols."""
        bits = np.asarray(bits)
        idx = bits.astype(np.int64) @ (1 << np.arange(self.bits_per_symbol - 1, -1, -1))
        return self.points[idx]

    def decide(self, z):
        """Nearest point per entry; ties go to the lower index."""
        z = np.asarray(z)
        d = np.abs(z[..., None] - self.points) ** 2
        idx = np.argmin(d, axis=-1)
        return self.points[idx], self.bits[idx]


def _int_bits(k, n):
    return np.array([[(v >> (n - 1 - j)) & 1 for j in range(n)] for v in range(k)], dtype=np.uint8)


def _qpsk():
    bits = _int_bits(4, 2)
    b = bits.astype(int)
    pts = ((1 - 2 * b[:, 0]) + 1j * (1 - 2 * b[:, 1])) / np.sqrt(2)
    return Constellation("QPSK", pts, bits)


def _qam16():
    # per-axis Gray map 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3
    level = {(0, 0): -3, (0, 1): -1, (1, 1): 1, (1, 0): 3}
    bits = _int_bits(16, 4)
    pts = np.array([level[tuple(b[:2])] + 1j * level[tuple(b[2:])] for b in bits]) / np.sqrt(10)
    return Constellation("16QAM", pts, bits)


_CONSTELLATIONS = {"QPSK": _qpsk(), "16QAM": _qam16()}


def constellation(name):
    if isinstance(name, Constellation):
        return name
    try:
        return _CONSTELLATIONS[name.upper()]
    except KeyError:
        raise InvalidArguments(f"unknown constellation {name!r}") from None


def uplink_rx(h, s, n0, rng):
    """``H s`` plus circular Gaussian noise; ``s`` may hold one symbol vector
    per column. ``n0 = 0`` gives the noiseless output."""
    h = np.asarray(h, dtype=np.complex128)
    s = np.asarray(s, dtype=np.complex128)
    if n0 < 0:
        raise InvalidArguments("n0 must be >= 0")
    if h.ndim != 2 or s.shape[0] != h.shape[1]:
        raise InvalidArguments(f"channel {h.shape} and symbols {s.shape} disagree")
    y = h @ s
    if n0 > 0:
        noise = rng.standard_normal((2,) + y.shape)
        y = y + np.sqrt(n0 / 2.0) * (noise[0] + 1j * noise[1])
    return y


def _check_system(y, h):
    h = np.asarray(h, dtype=np.complex128)
    y = np.asarray(y, dtype=np.complex128)
    if h.ndim != 2 or y.shape[0] != h.shape[0]:
        raise InvalidArguments(f"receive vector {y.shape} does not match channel {h.shape}")
    if h.shape[1] > h.shape[0]:
        raise InvalidArguments(f"more users ({h.shape[1]}) than receive rows ({h.shape[0]})")
    return y, h


def lmmse_filter(h, n0):
    """``(H^H H + n0 I)^{-1} H^H``."""
    gram = h.conj().T @ h + n0 * np.eye(h.shape[1])
    if not np.isfinite(gram).all() or np.linalg.cond(gram) > SINGULAR_COND:
        raise DetectionError("singular LMMSE normal matrix")
    return np.linalg.solve(gram, h.conj().T)


def lmmse_detect(y, h, n0, constellation_name="QPSK"):
    """Returns ``(symbols, bits)``; ``bits`` has a trailing bits-per-symbol axis."""
    y, h = _check_system(y, h)
    if n0 < 0:
        raise InvalidArguments("n0 must be >= 0")
    return constellation(constellation_name).decide(lmmse_filter(h, n0) @ y)


def le_rows(ht, density):
    """Indices of the ``ceil(density B)`` rows of largest energy, ascending.
    Equal energies keep the lower row."""
    if not 0.0 < density <= 1.0:
        raise InvalidArguments(f"density must be in (0, 1], got {density}")
    b = ht.shape[0]
    keep = min(b, max(1, math.ceil(round(density * b, 9))))
    energy = np.sum(np.abs(ht) ** 2, axis=1)
    return np.sort(np.argsort(-energy, kind="stable")[:keep])


def le_detect(y, h, n0, density, transform, constellation_name="QPSK", h_est=None):
    """Largest-entry beamspace detection.

    ``h_est`` (antenna domain) replaces ``h`` for row selection and filtering
    when given, modelling imperfect CSI.
    """
    y, h = _check_system(y, h)
    a = np.asarray(transform, dtype=np.complex128)
    if a.shape != (h.shape[0], h.shape[0]):
        raise InvalidArguments(f"transform {a.shape} does not match {h.shape[0]} antennas")
    ht = a @ (h if h_est is None else np.asarray(h_est, dtype=np.complex128))
    rows = le_rows(ht, density)
    if rows.size < h.shape[1] and n0 == 0:
        raise DetectionError(f"{rows.size} rows cannot separate {h.shape[1]} users without regularisation")
    return lmmse_detect((a @ y)[rows], ht[rows], n0, constellation_name)


@dataclass
class UplinkConfig:
    b: int
    u: int
    constellation: str = "QPSK"
    snr_db_grid: tuple = (0.0, 5.0, 10.0, 15.0, 20.0)
    trials_per_point: int = 1000
    seed: int = 0
    csi: str = "perfect"  # or "shrinkage"

    def __post_init__(self):
        if self.trials_per_point < 1:
            raise InvalidArguments("trials_per_point must be >= 1")
        if not 1 <= self.u <= self.b:
            raise InvalidArguments(f"need 1 <= u <= b, got u={self.u}, b={self.b}")
        if self.csi not in ("perfect", "shrinkage"):
            raise InvalidArguments(f"unknown csi mode {self.csi!r}")
        constellation(self.constellation)

    def to_dict(self):
        return {
            "b": self.b,
            "u": self.u,
            "constellation": self.constellation,
            "snr_db_grid": [float(s) for s in self.snr_db_grid],
            "trials_per_point": self.trials_per_point,
            "seed": self.seed,
            "csi": self.csi,
        }


@dataclass
class DetectorKind:
    kind: str = "lmmse_antenna"
    density: float = 1.0
    transform: np.ndarray = None

    def __post_init__(self):
        if self.kind not in ("lmmse_antenna", "le_beamspace"):
            raise InvalidArguments(f"unknown detector {self.kind!r}")
        if not 0.0 < self.density <= 1.0:
            raise InvalidArguments(f"density must be in (0, 1], got {self.density}")
        if self.kind == "le_beamspace":
            if self.transform is None:
                raise InvalidArguments("le_beamspace needs a transform")
            self.transform = as_unitary(self.transform)

    @classmethod
    def lmmse(cls):
        return cls("lmmse_antenna")

    @classmethod
    def le(cls, transform, density=0.125):
        return cls("le_beamspace", density, transform)


@dataclass
class BerCurve:
    snr_db: list = field(default_factory=list)
    ber: list = field(default_factory=list)
    bit_count: list = field(default_factory=list)
    bit_errors: list = field(default_factory=list)

    def stderr(self):
        p = np.asarray(self.ber)
        n = np.asarray(self.bit_count)
        return np.sqrt(p * (1 - p) / n)

    def to_dict(self):
        return {
            "snr_db": [float(s) for s in self.snr_db],
            "ber": [float(b) for b in self.ber],
            "bit_count": [int(n) for n in self.bit_count],
            "bit_errors": [int(e) for e in self.bit_errors],
        }

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["snr_db", "ber", "bits"])
            for s, b, n in zip(self.snr_db, self.ber, self.bit_count):
                w.writerow([repr(float(s)), repr(float(b)), int(n)])

    def write_json(self, path, extra=None):
        with open(path, "w") as fh:
            json.dump({**(extra or {}), **self.to_dict()}, fh, indent=2)


def shrink_channel(h, n0, rng, transform=None):
    """Noisy channel observation denoised by soft thresholding in beamspace
    at ``sqrt(n0) sqrt(2 log B)``. Returns the antenna-domain estimate."""
    b = h.shape[0]
    a = dft_matrix(b) if transform is None else np.asarray(transform)
    noise = rng.standard_normal((2,) + h.shape)
    obs = a @ (h + np.sqrt(n0 / 2.0) * (noise[0] + 1j * noise[1]))
    thr = np.sqrt(n0) * np.sqrt(2.0 * np.log(b))
    mag = np.abs(obs)
    obs = np.where(mag > thr, obs * (1.0 - thr / np.maximum(mag, 1e-300)), 0.0)
    return a.conj().T @ obs


def ber_sweep(cfg, det, channels):
    """BER per SNR point. Trials cycle through ``channels``; every
    (SNR point, channel) pair draws bits, noise and CSI noise from its own
    Philox substream, so results do not depend on evaluation order."""
    channels = [np.asarray(h, dtype=np.complex128) for h in channels]
    if not channels:
        raise InvalidArguments("need at least one channel")
    for h in channels:
        if h.shape != (cfg.b, cfg.u):
            raise InvalidArguments(f"channel shape {h.shape} != ({cfg.b}, {cfg.u})")
    const = constellation(cfg.constellation)
    bps = const.bits_per_symbol
    n_ch = len(channels)
    curve = BerCurve()
    for j, snr_db in enumerate(cfg.snr_db_grid):
        snr = 10.0 ** (snr_db / 10.0)
        errors = 0
        total = 0
        for c, h in enumerate(channels):
            n_trials = cfg.trials_per_point // n_ch + (1 if c < cfg.trials_per_point % n_ch else 0)
            if n_trials == 0:
                break
            rng = philox(cfg.seed, STREAM_BER, j, c)
            n0 = float(np.sum(np.abs(h) ** 2)) / (cfg.b * snr)
            bits = rng.integers(0, 2, size=(cfg.u, n_trials, bps), dtype=np.uint8)
            y = uplink_rx(h, const.map(bits), n0, rng)
            h_est = None
            if cfg.csi == "shrinkage":
                h_est = shrink_channel(h, n0, rng, det.transform)
            if det.kind == "lmmse_antenna":
                _, got = lmmse_detect(y, h if h_est is None else h_est, n0, const)
            else:
                _, got = le_detect(y, h, n0, det.density, det.transform, const, h_est=h_est)
            errors += int(np.count_nonzero(got != bits))
            total += bits.size
        curve.snr_db.append(float(snr_db))
        curve.bit_count.append(total)
        curve.bit_errors.append(errors)
        curve.ber.append(errors / total)
    return curve
