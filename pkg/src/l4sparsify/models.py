"""Generative signal models, synthetic MU-MIMO scenes and sample persistence.

Randomness comes from numpy's counter-based Philox generator. Every draw is
keyed by ``(seed, stream, chunk)`` where a chunk holds :data:`CHUNK` samples,
so the first ``n`` samples of a model do not depend on how many are requested
in total and chunks can be generated independently.
"""
import math
from dataclasses import dataclass, field

import numpy as np

from . import cmx
from .errors import FormatError, InfeasibleScene, InvalidArguments, InvalidFraction

CHUNK = 4096

# stream ids, one per consumer of randomness
STREAM_MULTIPATH = 1
STREAM_SINUSOID = 2
STREAM_SCENE = 3
STREAM_SPLIT = 4


def philox(seed, *key):
    """Generator for substream ``key`` of ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def _chunked_uniform(seed, stream, rows, n):
    """``rows x n`` Unif(0, 2 pi) draws, generated chunk by chunk."""
    out = np.empty((rows, n))
    for c in range(math.ceil(n / CHUNK)):
        lo, hi = c * CHUNK, min(n, (c + 1) * CHUNK)
        out[:, lo:hi] = philox(seed, stream, c).uniform(0.0, 2 * np.pi, (rows, CHUNK))[:, : hi - lo]
    return out


@dataclass(frozen=True)
class SampleSet:
    """Columns ``y[:, m]`` are the samples."""

    y: np.ndarray

    def __post_init__(self):
        y = np.asarray(self.y, dtype=np.complex128)
        if y.ndim != 2 or y.shape[0] < 1 or y.shape[1] < 1:
            raise InvalidArguments(f"sample set needs shape (N >= 1, M >= 1), got {y.shape}")
        object.__setattr__(self, "y", y)

    @property
    def dim(self):
        return self.y.shape[0]

    @property
    def count(self):
        return self.y.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.y if dtype is None else self.y.astype(dtype)


@dataclass(frozen=True)
class MultipathModel:
    """``y_b = sum_l c_l exp(j Omega_l b)`` with i.i.d. uniform ``Omega_l``."""

    b: int
    gains: tuple = (1.0,)
    seed: int = 0

    def __post_init__(self):
        gains = tuple(complex(g) for g in np.atleast_1d(self.gains))
        object.__setattr__(self, "gains", gains)
        if self.b < 1 or len(gains) < 1:
            raise InvalidArguments("need b >= 1 and at least one path")
        if not any(g != 0 for g in gains):
            raise InvalidArguments("all path gains are zero")

    @property
    def l(self):
        return len(self.gains)


@dataclass(frozen=True)
class SinusoidModel:
    """Real sinusoid ``y_b = cos(Omega b + Phi)``, Omega and Phi uniform."""

    b: int
    seed: int = 0

    def __post_init__(self):
        if self.b < 1:
            raise InvalidArguments("need b >= 1")


def array_response(b, omega):
    """ULA steering vectors ``[1, e^{j w}, ..., e^{j (b-1) w}]`` as columns."""
    omega = np.atleast_1d(np.asarray(omega, dtype=float))
    return np.exp(1j * np.outer(np.arange(b), omega))


def sample_multipath(model, n, omegas=None):
    """Draw ``n`` samples; ``omegas`` (shape ``(L,)`` or ``(L, n)``) pins the
    angular frequencies for testing."""
    if n < 1:
        raise InvalidArguments("n must be >= 1")
    if omegas is None:
        om = _chunked_uniform(model.seed, STREAM_MULTIPATH, model.l, n)
    else:
        om = np.broadcast_to(np.asarray(omegas, dtype=float).reshape(model.l, -1), (model.l, n))
    b = np.arange(model.b)[:, None]
    y = np.zeros((model.b, n), dtype=np.complex128)
    for ell, c in enumerate(model.gains):
        y += c * np.exp(1j * b * om[ell][None, :])
    return SampleSet(y)


def sample_sinusoid(model, n, omega=None, phi=None):
    """Draw ``n`` real-valued sinusoid samples. ``omega``/``phi`` pin either
    parameter (scalar or length ``n``)."""
    if n < 1:
        raise InvalidArguments("n must be >= 1")
    draws = _chunked_uniform(model.seed, STREAM_SINUSOID, 2, n)
    om = draws[0] if omega is None else np.broadcast_to(np.asarray(omega, dtype=float), (n,))
    ph = draws[1] if phi is None else np.broadcast_to(np.asarray(phi, dtype=float), (n,))
    b = np.arange(model.b)[:, None]
    return SampleSet(np.cos(b * om[None, :] + ph[None, :]).astype(np.complex128))


@dataclass(frozen=True)
class MuMimoScene:
    """Synthetic uplink scene standing in for a ray-traced LoS dataset.

    UEs sit in a ``sector_deg`` sector at ``dmin..dmax`` metres with pairwise
    angular gaps of at least ``min_sep_deg``. Each UE has a LoS path with
    free-space amplitude ``1/d`` plus ``paths_per_ue - 1`` scattered paths
    ``nlos_rel_db`` below it. Power control scales down strong UEs so that the
    received energy spread is at most ``power_cap_db``.
    """

    b: int = 32
    u: int = 4
    sector_deg: float = 120.0
    dmin: float = 10.0
    dmax: float = 110.0
    min_sep_deg: float = 5.0
    power_cap_db: float = 6.0
    paths_per_ue: int = 1
    seed: int = 0
    nlos_rel_db: float = -10.0

    def __post_init__(self):
        if self.u < 1 or self.b < 1 or self.paths_per_ue < 1:
            raise InvalidArguments("need b, u, paths_per_ue >= 1")
        if self.min_sep_deg * (self.u - 1) > self.sector_deg:
            raise InvalidArguments("min_sep_deg * (u - 1) exceeds the sector")
        if not self.dmin < self.dmax:
            raise InvalidArguments("need dmin < dmax")


@dataclass
class SceneDraw:
    h: np.ndarray
    angles_deg: np.ndarray  # (u, paths) incidence angles
    gains: np.ndarray  # (u, paths) complex path gains after power control
    distances: np.ndarray = field(default=None)


MAX_REJECTIONS = 10**6


def _draw_ue_angles(scene, rng):
    half = scene.sector_deg / 2.0
    for _ in range(MAX_REJECTIONS):
        ang = rng.uniform(-half, half, scene.u)
        if scene.u == 1 or np.min(np.diff(np.sort(ang))) >= scene.min_sep_deg:
            return ang
    raise InfeasibleScene(f"no valid UE placement after {MAX_REJECTIONS} draws")


def draw_scene(scene, index):
    """Draw scene number ``index`` (own substream) with its metadata."""
    rng = philox(scene.seed, STREAM_SCENE, index)
    los = _draw_ue_angles(scene, rng)
    dist = rng.uniform(scene.dmin, scene.dmax, scene.u)
    npath = scene.paths_per_ue
    angles = np.empty((scene.u, npath))
    angles[:, 0] = los
    gains = np.empty((scene.u, npath), dtype=np.complex128)
    gains[:, 0] = np.exp(1j * rng.uniform(0, 2 * np.pi, scene.u)) / dist
    if npath > 1:
        angles[:, 1:] = rng.uniform(-90.0, 90.0, (scene.u, npath - 1))
        rel = 10.0 ** (scene.nlos_rel_db / 20.0)
        z = (rng.standard_normal((scene.u, npath - 1)) + 1j * rng.standard_normal((scene.u, npath - 1))) / np.sqrt(2)
        gains[:, 1:] = rel * z * np.abs(gains[:, :1])
    omega = np.pi * np.sin(np.deg2rad(angles))
    bidx = np.arange(scene.b)[:, None, None]
    h = np.sum(gains[None] * np.exp(1j * bidx * omega[None]), axis=2)
    energy = np.sum(np.abs(h) ** 2, axis=0)
    cap = energy.min() * 10.0 ** (scene.power_cap_db / 10.0)
    scale = np.sqrt(np.minimum(1.0, cap / energy))
    # normalise so the average UE column energy is b
    scale *= np.sqrt(scene.b * scene.u / np.sum(energy * scale**2))
    h = h * scale[None, :]
    gains = gains * scale[:, None]
    return SceneDraw(h=h, angles_deg=angles, gains=gains, distances=dist)


def synth_scene_channels(scene, n_scenes):
    """List of ``n_scenes`` channel matrices of shape ``(b, u)``."""
    return [draw_scene(scene, s).h for s in range(n_scenes)]


def channel_columns(channels):
    """Stack all UE columns of a list of channel matrices into a SampleSet."""
    return SampleSet(np.concatenate([np.asarray(h) for h in channels], axis=1))


def save_samples(s, path):
    cmx.write_cmx1(path, np.asarray(s))


def load_samples(path):
    y = cmx.read_cmx1(path)
    if y.shape[0] < 1 or y.shape[1] < 1:
        raise FormatError(f"sample file has shape {y.shape}; need at least one row and column")
    return SampleSet(y)


def split(s, train_frac, seed):
    """Random disjoint split of the columns into ``(train, test)``."""
    if not 0.0 < train_frac < 1.0:
        raise InvalidFraction(f"train_frac must be in (0, 1), got {train_frac}")
    y = np.asarray(s)
    m = y.shape[1]
    n_train = int(round(train_frac * m))
    if n_train < 1 or n_train >= m:
        raise InvalidFraction(f"fraction {train_frac} of {m} samples leaves an empty part")
    perm = philox(seed, STREAM_SPLIT).permutation(m)
    return SampleSet(y[:, np.sort(perm[:n_train])]), SampleSet(y[:, np.sort(perm[n_train:])])
