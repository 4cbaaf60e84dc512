"""Deployment geometry: BS grid, uniform UE placement, 3D distances."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_BS_HEIGHT = 10.0  # m, small-cell rooftop
DEFAULT_UE_HEIGHT = 1.5   # m, handheld


@dataclass(frozen=True)
class NetworkLayout:
    """Positions of all BSs and UEs inside a square deployment area.

    Positions are (x, y, z) in meters. Treated as immutable once built;
    safe to share across parallel drop workers.
    """

    area_side: float
    bs_positions: np.ndarray  # (J, 3)
    ue_positions: np.ndarray  # (K, 3)
    bs_height: float = DEFAULT_BS_HEIGHT
    ue_height: float = DEFAULT_UE_HEIGHT

    def __post_init__(self):
        bs = np.asarray(self.bs_positions, dtype=float)
        ue = np.asarray(self.ue_positions, dtype=float)
        object.__setattr__(self, "bs_positions", bs)
        object.__setattr__(self, "ue_positions", ue)
        if bs.ndim != 2 or bs.shape[1] != 3 or bs.shape[0] < 1:
            raise ValueError("bs_positions must be a (J, 3) array with J >= 1")
        if ue.ndim != 2 or ue.shape[1] != 3 or ue.shape[0] < 1:
            raise ValueError("ue_positions must be a (K, 3) array with K >= 1")
        for name, pos in (("bs", bs), ("ue", ue)):
            xy = pos[:, :2]
            if np.any(xy < 0) or np.any(xy > self.area_side):
                raise ValueError(f"{name} horizontal coordinates outside [0, {self.area_side}]^2")
        if not np.allclose(bs[:, 2], self.bs_height):
            raise ValueError("all BS heights must equal bs_height")
        if not np.allclose(ue[:, 2], self.ue_height):
            raise ValueError("all UE heights must equal ue_height")

    @property
    def n_bs(self) -> int:
        return self.bs_positions.shape[0]

    @property
    def n_ue(self) -> int:
        return self.ue_positions.shape[0]


def deploy_grid_bs(area_side: float, rows: int, cols: int,
                   height: float = DEFAULT_BS_HEIGHT) -> np.ndarray:
    """Place rows*cols BSs at the centers of equal subrectangles.

    Axis convention: x varies along columns, y along rows, so cell (r, c)
    sits at ((c + 1/2) * area_side / cols, (r + 1/2) * area_side / rows).
    Output is flattened row-major: index = r * cols + c. Deterministic.
    """
    if area_side <= 0:
        raise ValueError("area_side must be positive")
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be >= 1")
    x = (np.arange(cols) + 0.5) * (area_side / cols)
    y = (np.arange(rows) + 0.5) * (area_side / rows)
    yy, xx = np.meshgrid(y, x, indexing="ij")
    out = np.column_stack([xx.ravel(), yy.ravel(), np.full(rows * cols, float(height))])
    return out


def deploy_uniform_ues(area_side: float, n_ue: int, rng: np.random.Generator,
                       height: float = DEFAULT_UE_HEIGHT) -> np.ndarray:
    """Drop n_ue UEs i.i.d. uniform over the square, at fixed height."""
    if area_side <= 0:
        raise ValueError("area_side must be positive")
    if n_ue < 1:
        raise ValueError("n_ue must be >= 1")
    xy = rng.uniform(0.0, area_side, size=(n_ue, 2))
    return np.column_stack([xy, np.full(n_ue, float(height))])


def distance_3d(a, b) -> float:
    """Euclidean distance between two 3D points, height difference included."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return float(np.linalg.norm(a - b))


def link_distances(layout: NetworkLayout) -> np.ndarray:
    """(K, J) matrix of 3D UE-to-BS distances."""
    diff = layout.ue_positions[:, None, :] - layout.bs_positions[None, :, :]
    return np.linalg.norm(diff, axis=2)
