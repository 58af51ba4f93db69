"""Synthetic vasculature phantoms and the augmentation pipeline.

The base phantom is drawn by branching random walks: walkers start on
the canvas border, wander with curvature-bounded headings, taper in
width, and occasionally spawn children.  Strokes are stamped with
anti-aliased Gaussian cross-sections.  The procedure is deterministic
in its integer seed through the toolkit's portable generator; its free
parameters are calibrated against a foreground-fraction band of
0.02..0.30 (pixels above 0.1) rather than any fixed reference image.

Augmentation layers scale (0.5..2) + rotate (0..360 deg) the base with
bilinear resampling and zero padding, take a random 128x128 crop,
shift it by up to 10 px per axis via zero fill, sums up to five such
layers, and min-max normalizes the result.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCrop, DegenerateRange
from .geometry import Grid
from .rng import Xoshiro256StarStar, mix_seed
from .wavesim import ImageField

DEFAULT_BASE_SIZE = 340
CROP_SIZE = 128


@dataclass(frozen=True)
class AugmentConfig:
    seed: int = 0
    scale_lo: float = 0.5
    scale_hi: float = 2.0
    rotation_deg: float = 360.0
    crop_size: int = CROP_SIZE
    shift_max_px: int = 10
    max_layers: int = 5

    def __post_init__(self):
        if not (0 < self.scale_lo <= self.scale_hi):
            raise ValueError("invalid scale range")
        if self.crop_size < 8 or self.max_layers < 1 or self.shift_max_px < 0:
            raise ValueError("invalid augmentation bounds")


def normalize(img: ImageField) -> ImageField:
    """Affine rescale to [0, 1]."""
    v = img.values
    lo = float(v.min())
    hi = float(v.max())
    if hi == lo:
        raise DegenerateRange("cannot normalize an image whose values are all equal")
    return ImageField(grid=img.grid, values=(v - lo) / (hi - lo))


def _stamp(img: np.ndarray, ci: float, cj: float, width: float) -> None:
    # gaussian cross-section, blended by max so values stay in [0, 1]
    sigma = max(width, 0.7) / 2.0
    rad = int(math.ceil(3.0 * sigma))
    size = img.shape[0]
    i0 = max(int(math.floor(ci)) - rad, 0)
    i1 = min(int(math.floor(ci)) + rad + 1, size)
    j0 = max(int(math.floor(cj)) - rad, 0)
    j1 = min(int(math.floor(cj)) + rad + 1, size)
    if i0 >= i1 or j0 >= j1:
        return
    ii = np.arange(i0, i1, dtype=np.float64)[:, None]
    jj = np.arange(j0, j1, dtype=np.float64)[None, :]
    d2 = (ii - ci) ** 2 + (jj - cj) ** 2
    patch = np.exp(-d2 / (2.0 * sigma * sigma))
    np.maximum(img[i0:i1, j0:j1], patch, out=img[i0:i1, j0:j1])


def synth_vasculature(seed: int, size: int = DEFAULT_BASE_SIZE) -> ImageField:
    """Branching curvilinear phantom in [0, 1], deterministic in seed."""
    if size < 64:
        raise ValueError("size must be at least 64")
    rng = Xoshiro256StarStar(seed)
    img = np.zeros((size, size))

    n_walkers = 8 + rng.randint(13)  # 8..20 starting branches
    queue = []
    for _ in range(n_walkers):
        side = rng.randint(4)
        along = rng.uniform() * (size - 1)
        if side == 0:
            pos, heading = (0.0, along), math.pi / 2
        elif side == 1:
            pos, heading = (size - 1.0, along), -math.pi / 2
        elif side == 2:
            pos, heading = (along, 0.0), 0.0
        else:
            pos, heading = (along, size - 1.0), math.pi
        heading += rng.uniform_in(-0.7, 0.7)
        queue.append((pos[0], pos[1], heading, rng.uniform_in(1.0, 6.0)))

    # taper calibrated against the foreground-fraction band; a faster decay
    # leaves the image too sparse on small-width seeds
    taper = 0.985
    max_walkers = 220
    spawned = len(queue)
    while queue:
        ci, cj, heading, width = queue.pop()
        steps = 0
        while width >= 0.4 and steps < 600:
            _stamp(img, ci, cj, width)
            heading += rng.uniform_in(-0.22, 0.22)
            ci += math.sin(heading)
            cj += math.cos(heading)
            width *= taper
            steps += 1
            if not (-8.0 <= ci < size + 8.0 and -8.0 <= cj < size + 8.0):
                break
            if rng.uniform() < 0.02 and spawned < max_walkers:
                branch_heading = heading + rng.sign() * rng.uniform_in(0.4, 1.1)
                queue.append((ci, cj, branch_heading, width * 0.8))
                spawned += 1

    np.clip(img, 0.0, 1.0, out=img)
    return ImageField(grid=Grid(size, size), values=img)


def _scale_rotate(base: np.ndarray, scale: float, angle_deg: float) -> np.ndarray:
    """Bilinear scale-then-rotate about the canvas center, zeros outside."""
    in_h, in_w = base.shape
    out_h = max(2, int(round(in_h * scale)))
    out_w = max(2, int(round(in_w * scale)))
    theta = math.radians(angle_deg)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    ci_out = (out_h - 1) / 2.0
    cj_out = (out_w - 1) / 2.0
    ci_in = (in_h - 1) / 2.0
    cj_in = (in_w - 1) / 2.0

    io = np.arange(out_h, dtype=np.float64)[:, None] - ci_out
    jo = np.arange(out_w, dtype=np.float64)[None, :] - cj_out
    # inverse map: rotate by -theta, then unscale
    si = (cos_t * io + sin_t * jo) / scale + ci_in
    sj = (-sin_t * io + cos_t * jo) / scale + cj_in

    i0 = np.floor(si).astype(np.int64)
    j0 = np.floor(sj).astype(np.int64)
    fi = si - i0
    fj = sj - j0

    out = np.zeros((out_h, out_w))
    padded = np.zeros((in_h + 2, in_w + 2))
    padded[1:-1, 1:-1] = base
    inside = (i0 >= -1) & (i0 <= in_h - 1) & (j0 >= -1) & (j0 <= in_w - 1)
    ip = np.clip(i0 + 1, 0, in_h)
    jp = np.clip(j0 + 1, 0, in_w)
    top = (1 - fj) * padded[ip, jp] + fj * padded[ip, jp + 1]
    bot = (1 - fj) * padded[ip + 1, jp] + fj * padded[ip + 1, jp + 1]
    out = np.where(inside, (1 - fi) * top + fi * bot, 0.0)
    return out


def augment(base: ImageField, cfg: AugmentConfig, draw_index: int) -> ImageField:
    """One augmented 128x128 training image, deterministic in
    (cfg.seed, draw_index)."""
    rng = Xoshiro256StarStar(mix_seed(cfg.seed, draw_index))
    crop = cfg.crop_size

    for _attempt in range(10):
        n_layers = 1 + rng.randint(cfg.max_layers)
        total = np.zeros((crop, crop))
        ok = True
        for _ in range(n_layers):
            layer = None
            for _retry in range(10):
                scale = rng.uniform_in(cfg.scale_lo, cfg.scale_hi)
                angle = rng.uniform() * cfg.rotation_deg
                canvas = _scale_rotate(base.values, scale, angle)
                if canvas.shape[0] >= crop and canvas.shape[1] >= crop:
                    layer = canvas
                    break
            if layer is None:
                raise DegenerateCrop(
                    f"base {base.values.shape} cannot produce a {crop}x{crop} crop"
                )
            ci = rng.randint(layer.shape[0] - crop + 1)
            cj = rng.randint(layer.shape[1] - crop + 1)
            tile = layer[ci:ci + crop, cj:cj + crop]

            di = rng.sign() * rng.randint(cfg.shift_max_px + 1)
            dj = rng.sign() * rng.randint(cfg.shift_max_px + 1)
            shifted = np.zeros((crop, crop))
            src_i = slice(max(0, -di), crop - max(0, di))
            src_j = slice(max(0, -dj), crop - max(0, dj))
            dst_i = slice(max(0, di), crop - max(0, -di))
            dst_j = slice(max(0, dj), crop - max(0, -dj))
            shifted[dst_i, dst_j] = tile[src_i, src_j]
            total += shifted

        if float(total.max()) == float(total.min()):
            ok = False  # empty draw, e.g. crop landed in blank space
        if ok:
            field = ImageField(grid=Grid(crop, crop), values=total)
            return normalize(field)

    raise DegenerateRange("augmentation repeatedly produced an empty image")


class SyntheticPhantomSource:
    """Indexable stream of augmented phantom crops from one base image."""

    def __init__(
        self, master_seed: int, base_size: int = DEFAULT_BASE_SIZE, crop_size: int = CROP_SIZE
    ):
        self.master_seed = master_seed
        self.base_size = base_size
        self.config = AugmentConfig(seed=master_seed, crop_size=crop_size)
        self._base: ImageField | None = None

    def base(self) -> ImageField:
        if self._base is None:
            self._base = synth_vasculature(self.master_seed, self.base_size)
        return self._base

    def __call__(self, index: int) -> ImageField:
        return augment(self.base(), self.config, index)


class ImagePhantomSource:
    """Augmented phantoms drawn from an externally supplied base image
    (already normalized grayscale), for imported datasets."""

    def __init__(self, base: ImageField, seed: int, crop_size: int = CROP_SIZE):
        self.base_image = base
        self.config = AugmentConfig(seed=seed, crop_size=crop_size)

    def __call__(self, index: int) -> ImageField:
        return augment(self.base_image, self.config, index)
