"""Clustered mmWave channel synthesis and channel-file import/export.

Large-scale model: distance-dependent LoS probability, log-distance path
loss with log-normal shadowing. Small-scale model: C clusters of L
subpaths, each a rank-1 outer product of UE and BS planar-array steering
vectors, power-weighted per cluster and normalized by 1/sqrt(C*L).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Mapping

import numpy as np

SPEED_OF_LIGHT = 299792458.0  # m/s


class LinkState(Enum):
    LOS = "LoS"
    NLOS = "NLoS"


@dataclass(frozen=True)
class PropagationParams:
    """Large-scale propagation constants (defaults: 28 GHz urban measurements).

    LoS probability: [min(d_bp/d, 1) * (1 - exp(-d/decay)) + exp(-d/decay)]^2.
    Path loss: 20*log10(4*pi*d0/lambda) + 10*n*log10(d/d0) + X_sigma.
    """

    wavelength_m: float = SPEED_OF_LIGHT / 28e9
    breakpoint_m: float = 27.0     # distance below which p_LoS = 1
    decay_m: float = 71.0
    ref_distance_m: float = 1.0
    exponent_los: float = 2.1
    exponent_nlos: float = 3.4
    shadow_sigma_los_db: float = 3.6
    shadow_sigma_nlos_db: float = 9.7

    def exponent(self, state: LinkState) -> float:
        return self.exponent_los if state is LinkState.LOS else self.exponent_nlos

    def shadow_sigma_db(self, state: LinkState) -> float:
        return self.shadow_sigma_los_db if state is LinkState.LOS else self.shadow_sigma_nlos_db


@dataclass(frozen=True)
class AngleSpreads:
    """Angular distribution parameters for cluster synthesis (radians).

    Cluster-center azimuths are uniform on [0, 2pi); cluster-center
    elevations uniform within +/- elevation_range of horizon (pi/2).
    Subpath offsets around the center are Laplacian with the stated
    standard deviations. Stand-ins for tabulated 3GPP statistics.
    """

    elevation_range: float = np.pi / 12          # +/- 15 deg around horizon
    azimuth_subpath_std: float = np.deg2rad(5.0)
    elevation_subpath_std: float = np.deg2rad(2.5)


DEFAULT_PROPAGATION = PropagationParams()
DEFAULT_SPREADS = AngleSpreads()


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar array of n_rows x n_cols elements (ULA when n_cols=1)."""

    n_rows: int                       # U
    n_cols: int                       # V
    wavelength: float
    spacing_wavelengths: float = 0.5  # d_a in wavelengths

    def __post_init__(self):
        if self.n_rows < 1 or self.n_cols < 1:
            raise ValueError("array dimensions must be >= 1")
        if self.spacing_wavelengths <= 0:
            raise ValueError("element spacing must be positive")
        if self.wavelength <= 0:
            raise ValueError("wavelength must be positive")

    @property
    def n_elements(self) -> int:
        return self.n_rows * self.n_cols

    @property
    def wavenumber(self) -> float:
        return 2.0 * np.pi / self.wavelength

    @property
    def spacing_m(self) -> float:
        return self.spacing_wavelengths * self.wavelength


@dataclass(frozen=True)
class ClusterSet:
    """Small-scale parameters of one link: C cluster gains and C x L subpath angles.

    Angles are radians: azimuths in [0, 2pi), elevations in [0, pi]
    (elevation measured from zenith; pi/2 is the horizon). subpath_phases
    holds one uniform phase per subpath, or None for the literal coherent
    sum of the clustered-channel equation.
    """

    gains: np.ndarray          # (C,), linear, sums to 1
    aoa_azimuth: np.ndarray    # (C, L) UE-side arrival azimuth
    aoa_elevation: np.ndarray  # (C, L)
    aod_azimuth: np.ndarray    # (C, L) BS-side departure azimuth
    aod_elevation: np.ndarray  # (C, L)
    subpath_phases: np.ndarray | None = None  # (C, L) or None

    def __post_init__(self):
        gains = np.asarray(self.gains, dtype=float)
        object.__setattr__(self, "gains", gains)
        if gains.ndim != 1 or gains.size < 1:
            raise ValueError("gains must be a 1-D array with C >= 1")
        if np.any(gains < 0):
            raise ValueError("cluster gains must be non-negative")
        if abs(gains.sum() - 1.0) > 1e-9:
            raise ValueError("cluster gains must sum to 1 within 1e-9")
        shape = (gains.size, None)
        for name in ("aoa_azimuth", "aoa_elevation", "aod_azimuth", "aod_elevation"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)
            if arr.ndim != 2 or arr.shape[0] != gains.size:
                raise ValueError(f"{name} must have shape (C, L)")
            if shape[1] is None:
                shape = (gains.size, arr.shape[1])
            elif arr.shape != shape:
                raise ValueError("angle arrays must share one (C, L) shape")
        for name in ("aoa_azimuth", "aod_azimuth"):
            arr = getattr(self, name)
            if np.any(arr < 0) or np.any(arr >= 2 * np.pi):
                raise ValueError(f"{name} must lie in [0, 2*pi)")
        for name in ("aoa_elevation", "aod_elevation"):
            arr = getattr(self, name)
            if np.any(arr < 0) or np.any(arr > np.pi):
                raise ValueError(f"{name} must lie in [0, pi]")
        if self.subpath_phases is not None:
            ph = np.asarray(self.subpath_phases, dtype=float)
            object.__setattr__(self, "subpath_phases", ph)
            if ph.shape != shape:
                raise ValueError("subpath_phases must have shape (C, L)")

    @property
    def n_clusters(self) -> int:
        return self.gains.size

    @property
    def n_subpaths(self) -> int:
        return self.aoa_azimuth.shape[1]


@dataclass(frozen=True)
class ChannelRealization:
    """One link's channel: matrix (N_rx x M_tx, large-scale gain included)."""

    matrix: np.ndarray
    link_state: LinkState
    path_loss_db: float
    clusters: ClusterSet | None = None  # None for imported channels

    def __post_init__(self):
        h = np.asarray(self.matrix, dtype=complex)
        object.__setattr__(self, "matrix", h)
        if h.ndim != 2:
            raise ValueError("channel matrix must be 2-D")
        if not np.all(np.isfinite(h.real)) or not np.all(np.isfinite(h.imag)):
            raise ValueError("channel matrix must be finite")

    @property
    def n_rx(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_tx(self) -> int:
        return self.matrix.shape[1]


# One drop's full channel set, keyed by (ue index, bs index).
ChannelSet = Mapping[tuple[int, int], ChannelRealization]


def los_probability(distance: float, params: PropagationParams = DEFAULT_PROPAGATION) -> float:
    """LoS probability at 3D distance d (meters); 1 for d <= breakpoint."""
    if distance <= 0:
        raise ValueError("distance must be positive")
    decay = np.exp(-distance / params.decay_m)
    bracket = min(params.breakpoint_m / distance, 1.0) * (1.0 - decay) + decay
    return float(bracket * bracket)


def sample_link_state(distance: float, rng: np.random.Generator,
                      params: PropagationParams = DEFAULT_PROPAGATION) -> LinkState:
    """Bernoulli LoS/NLoS draw with probability los_probability(distance)."""
    p = los_probability(distance, params)
    return LinkState.LOS if rng.random() < p else LinkState.NLOS


def mean_path_loss_db(distance: float, state: LinkState,
                      params: PropagationParams = DEFAULT_PROPAGATION) -> float:
    """Path loss in dB with shadowing averaged out (the log-distance part)."""
    if distance < params.ref_distance_m:
        raise ValueError(f"distance must be >= reference distance {params.ref_distance_m} m")
    fspl = 20.0 * np.log10(4.0 * np.pi * params.ref_distance_m / params.wavelength_m)
    return float(fspl + 10.0 * params.exponent(state)
                 * np.log10(distance / params.ref_distance_m))


def path_loss_db(distance: float, state: LinkState, rng: np.random.Generator,
                 params: PropagationParams = DEFAULT_PROPAGATION) -> float:
    """Path loss in dB including a zero-mean log-normal shadowing draw."""
    shadow = params.shadow_sigma_db(state) * rng.standard_normal()
    return mean_path_loss_db(distance, state, params) + shadow


def array_response(geom: ArrayGeometry, azimuth, elevation) -> np.ndarray:
    """Steering vector(s) of the planar array for the given angle(s).

    Element (u, v), u in 0..U-1 and v in 0..V-1, has phase
    k * d_a * (u*sin(az)*sin(el) + v*cos(el)); elements are flattened
    row-major (index u*V + v). Scalar angles give shape (U*V,); equal-shape
    angle arrays give (U*V,) + angle shape. Entries have unit modulus.
    """
    az = np.asarray(azimuth, dtype=float)
    el = np.asarray(elevation, dtype=float)
    u = np.repeat(np.arange(geom.n_rows), geom.n_cols).astype(float)
    v = np.tile(np.arange(geom.n_cols), geom.n_rows).astype(float)
    sin_az_sin_el = np.sin(az) * np.sin(el)
    cos_el = np.cos(el)
    scale = geom.wavenumber * geom.spacing_m
    extra = (np.newaxis,) * az.ndim
    phase = scale * (u[(...,) + extra] * sin_az_sin_el + v[(...,) + extra] * cos_el)
    return np.exp(1j * phase)


def sample_cluster_set(n_clusters: int, n_subpaths: int, rng: np.random.Generator,
                       spreads: AngleSpreads = DEFAULT_SPREADS,
                       subpath_phase: bool = True) -> ClusterSet:
    """Draw cluster gains, subpath angles, and (optionally) subpath phases.

    Gains are i.i.d. exponential(1) normalized to sum 1. Draw order is
    fixed (gains, centers, offsets, phases) so that disabling the phase
    term does not perturb the other draws.
    """
    if n_clusters < 1 or n_subpaths < 1:
        raise ValueError("cluster and subpath counts must be >= 1")
    gains = rng.exponential(1.0, size=n_clusters)
    gains = gains / gains.sum()

    two_pi = 2.0 * np.pi
    el_lo = np.pi / 2 - spreads.elevation_range
    aod_az_c = rng.uniform(0.0, two_pi, size=n_clusters)
    aod_el_c = el_lo + rng.uniform(0.0, 2 * spreads.elevation_range, size=n_clusters)
    aoa_az_c = rng.uniform(0.0, two_pi, size=n_clusters)
    aoa_el_c = el_lo + rng.uniform(0.0, 2 * spreads.elevation_range, size=n_clusters)

    # Laplace scale = std / sqrt(2)
    b_az = spreads.azimuth_subpath_std / np.sqrt(2.0)
    b_el = spreads.elevation_subpath_std / np.sqrt(2.0)
    shape = (n_clusters, n_subpaths)
    aod_az = np.mod(aod_az_c[:, None] + rng.laplace(0.0, b_az, size=shape), two_pi)
    aod_el = np.clip(aod_el_c[:, None] + rng.laplace(0.0, b_el, size=shape), 0.0, np.pi)
    aoa_az = np.mod(aoa_az_c[:, None] + rng.laplace(0.0, b_az, size=shape), two_pi)
    aoa_el = np.clip(aoa_el_c[:, None] + rng.laplace(0.0, b_el, size=shape), 0.0, np.pi)

    phases = rng.uniform(0.0, two_pi, size=shape) if subpath_phase else None
    return ClusterSet(gains=gains, aoa_azimuth=aoa_az, aoa_elevation=aoa_el,
                      aod_azimuth=aod_az, aod_elevation=aod_el, subpath_phases=phases)


def assemble_channel(clusters: ClusterSet, bs_geom: ArrayGeometry, ue_geom: ArrayGeometry,
                     path_loss_db: float, link_state: LinkState = LinkState.NLOS,
                     ue_boresight: float = 0.0) -> ChannelRealization:
    """Build the N_rx x M_tx channel matrix from cluster parameters.

    Small-scale part: (1/sqrt(C*L)) * sum_{c,l} sqrt(gain_c) * e^{j*psi_cl}
    * a_ue(aoa) * a_bs(aod)^H, with psi = 0 when subpath_phases is None.
    The result is scaled by the amplitude gain 10^(-path_loss_db/20).
    ue_boresight rotates the UE panel: it is subtracted from all arrival
    azimuths before evaluating the UE steering vectors.
    """
    if not np.isfinite(path_loss_db):
        raise ValueError("path_loss_db must be finite")
    c, sp = clusters.n_clusters, clusters.n_subpaths
    aoa_az = np.mod(clusters.aoa_azimuth - ue_boresight, 2.0 * np.pi)
    a_ue = array_response(ue_geom, aoa_az.ravel(), clusters.aoa_elevation.ravel())
    a_bs = array_response(bs_geom, clusters.aod_azimuth.ravel(), clusters.aod_elevation.ravel())
    weights = np.repeat(np.sqrt(clusters.gains), sp) / np.sqrt(c * sp)
    if clusters.subpath_phases is not None:
        weights = weights * np.exp(1j * clusters.subpath_phases.ravel())
    small_scale = (a_ue * weights) @ a_bs.conj().T
    amplitude = 10.0 ** (-path_loss_db / 20.0)
    return ChannelRealization(matrix=amplitude * small_scale, link_state=link_state,
                              path_loss_db=float(path_loss_db), clusters=clusters)


class ChannelFileError(ValueError):
    """Malformed, incomplete, or inconsistent channel file."""


def export_channels(path, channels: ChannelSet) -> None:
    """Write a channel set as line-delimited JSON, one record per link.

    Record fields: ue, bs, n_rx, n_tx, state ("LoS"/"NLoS"), path_loss_db,
    h (row-major interleaved re/im). Floats are written with full
    round-trip precision. Records are sorted by (ue, bs).
    """
    with open(path, "w", encoding="utf-8") as fh:
        for (k, j) in sorted(channels):
            ch = channels[(k, j)]
            flat = np.column_stack([ch.matrix.real.ravel(), ch.matrix.imag.ravel()]).ravel()
            record = {
                "ue": int(k), "bs": int(j),
                "n_rx": ch.n_rx, "n_tx": ch.n_tx,
                "state": ch.link_state.value,
                "path_loss_db": ch.path_loss_db,
                "h": [float(x) for x in flat],
            }
            fh.write(json.dumps(record) + "\n")


def import_channels(path, n_ue: int, n_bs: int, n_rx: int, n_tx: int) -> dict:
    """Read a channel file and validate it against the configured sizes.

    Requires exactly one record per (ue, bs) link for ue in [0, n_ue) and
    bs in [0, n_bs), each with an n_rx x n_tx matrix. Any missing link,
    malformed entry, or dimension mismatch raises ChannelFileError naming
    the offending link.
    """
    channels: dict[tuple[int, int], ChannelRealization] = {}
    states = {s.value: s for s in LinkState}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ChannelFileError(f"line {lineno}: invalid JSON ({exc})") from exc
            try:
                key = (int(record["ue"]), int(record["bs"]))
            except (KeyError, TypeError, ValueError) as exc:
                raise ChannelFileError(f"line {lineno}: missing or invalid ue/bs index") from exc
            link = f"link (ue={key[0]}, bs={key[1]})"
            if key in channels:
                raise ChannelFileError(f"{link}: duplicate record at line {lineno}")
            try:
                rows, cols = int(record["n_rx"]), int(record["n_tx"])
                state = states[record["state"]]
                pl = float(record["path_loss_db"])
                flat = np.asarray(record["h"], dtype=float)
            except (KeyError, TypeError, ValueError) as exc:
                raise ChannelFileError(f"{link}: malformed record ({exc})") from exc
            if (rows, cols) != (n_rx, n_tx):
                raise ChannelFileError(
                    f"{link}: matrix is {rows}x{cols}, expected {n_rx}x{n_tx}")
            if flat.ndim != 1 or flat.size != 2 * rows * cols:
                raise ChannelFileError(
                    f"{link}: expected {2 * rows * cols} interleaved entries, got {flat.size}")
            if not np.all(np.isfinite(flat)):
                raise ChannelFileError(f"{link}: non-finite matrix entry")
            matrix = (flat[0::2] + 1j * flat[1::2]).reshape(rows, cols)
            channels[key] = ChannelRealization(matrix=matrix, link_state=state, path_loss_db=pl)
    for k in range(n_ue):
        for j in range(n_bs):
            if (k, j) not in channels:
                raise ChannelFileError(f"missing channel record for link (ue={k}, bs={j})")
    extra = [key for key in channels if key[0] >= n_ue or key[1] >= n_bs]
    if extra:
        k, j = extra[0]
        raise ChannelFileError(f"link (ue={k}, bs={j}) outside the configured {n_ue}x{n_bs} grid")
    return channels
