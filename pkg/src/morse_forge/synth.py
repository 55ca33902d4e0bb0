"""Seeded synthetic fields: Gaussian mixtures with uniform noise on grids."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .complex import CellComplex, grid_complex
from .field import ScalarField, load_field


@dataclass(frozen=True)
class Bump:
    center: tuple[float, float]
    amplitude: float
    width: float


@dataclass
class MixtureConfig:
    nx: int = 32
    ny: int = 32
    bumps: list[Bump] = field(default_factory=list)
    noise: float = 0.0
    seed: int = 0


def mixture_values(coords: np.ndarray, bumps, noise: float = 0.0, seed: int = 0) -> np.ndarray:
    """Sum of Gaussians evaluated at ``coords`` plus uniform noise in ``[-noise, noise]``."""
    rng = np.random.default_rng(seed)
    xy = np.asarray(coords, dtype=np.float64)[:, :2]
    out = np.zeros(len(xy))
    for b in bumps:
        d2 = np.sum((xy - np.asarray(b.center)) ** 2, axis=1)
        out += b.amplitude * np.exp(-d2 / (2.0 * b.width ** 2))
    if noise:
        out += rng.uniform(-noise, noise, size=len(xy))
    return out


def mixture_field(cfg: MixtureConfig) -> ScalarField:
    c = grid_complex(cfg.nx, cfg.ny)
    return load_field(c, mixture_values(c.coords, cfg.bumps, cfg.noise, cfg.seed))


def two_bump_config(seed: int = 0) -> MixtureConfig:
    """A tall bump and a small one on a 32x32 grid with light noise."""
    return MixtureConfig(
        nx=32,
        ny=32,
        bumps=[Bump((10.0, 10.0), 10.0, 4.0), Bump((24.0, 22.0), 0.3, 2.0)],
        noise=0.1,
        seed=seed,
    )


def random_field(c: CellComplex, seed: int) -> ScalarField:
    """Uniform values in [0, 1) on every vertex."""
    return load_field(c, np.random.default_rng(seed).random(c.n_vertices))
