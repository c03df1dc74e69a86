"""
Dominant gradient orientations from localized gradient matrices
"""
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from volumes.containers import Volume

# components this small are treated as exact zeros before the sign convention
SNAP = 1e-14

HALF_PI = np.pi / 2


@dataclass(frozen=True)
class OrientationMaps:
    """θ and φ per voxel in radians; NaN outside the ROI"""
    theta: Volume
    phi: Volume


def local_gradient_matrix(grads: Sequence, c: Tuple[int, int, int], window: int) -> np.ndarray:
    """
    Gradient vectors of the N³ neighborhood of c, one row per voxel, x fastest.

    The window is clamped to the volume, so edge voxels give fewer rows.
    """
    arrays = [g.data if isinstance(g, Volume) else np.asarray(g) for g in grads]
    h = window // 2
    slices = tuple(
        slice(max(ci - h, 0), min(ci + h, n - 1) + 1)
        for ci, n in zip(c, arrays[0].shape)
    )
    return np.stack([a[slices].ravel(order='F') for a in arrays], axis=1)


def canonical_sign(psi: np.ndarray) -> np.ndarray:
    """Flip vectors so ψx ≥ 0, then ψy ≥ 0 when ψx = 0, then ψz ≥ 0"""
    psi = np.where(np.abs(psi) < SNAP, 0.0, psi)
    x, y, z = psi[..., 0], psi[..., 1], psi[..., 2]
    flip = (x < 0) | ((x == 0) & ((y < 0) | ((y == 0) & (z < 0))))
    # adding 0.0 turns -0.0 into +0.0 so arctan2 stays in range
    return np.where(flip[..., None], -psi, psi) + 0.0


def angles_from_vectors(psi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """θ = atan(ψy/ψx), φ = atan(ψz/√(ψx²+ψy²)) for canonical ψ"""
    psi = canonical_sign(psi)
    theta = np.arctan2(psi[..., 1], psi[..., 0])
    phi = np.arctan2(psi[..., 2], np.hypot(psi[..., 0], psi[..., 1]))
    return theta, phi


def dominant_orientations(F: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Batched (θ, φ) for matrices of shape (..., rows, 3).

    ψ is the right-singular vector of the largest singular value. Zero
    matrices give (0, 0).
    """
    F = np.asarray(F, dtype=np.float64)
    _, s, vh = np.linalg.svd(F, full_matrices=False)
    theta, phi = angles_from_vectors(vh[..., 0, :])
    flat = s[..., 0] <= 0
    theta = np.where(flat, 0.0, theta)
    phi = np.where(flat, 0.0, phi)
    return theta, phi


def dominant_orientation(F: np.ndarray) -> Tuple[float, float]:
    """(θ, φ) of a single N³×3 gradient matrix"""
    theta, phi = dominant_orientations(np.asarray(F)[None])
    return float(theta[0]), float(phi[0])


def window_displacements(window: int) -> np.ndarray:
    """All offsets of an N³ window in x-fastest order, shape (N³, 3)"""
    h = window // 2
    r = np.arange(-h, h + 1)
    dz, dy, dx = np.meshgrid(r, r, r, indexing='ij')
    return np.stack([dx.ravel(), dy.ravel(), dz.ravel()], axis=1)


def orientations_at(grads: Sequence[np.ndarray], centers: np.ndarray, window: int,
                    chunk: int = 512) -> Tuple[np.ndarray, np.ndarray]:
    """
    (θ, φ) at each center voxel, shape (n,) each.

    Gradients are zero-padded, which leaves the right-singular vectors of a
    clamped window unchanged.
    """
    h = window // 2
    padded = np.stack([np.pad(np.asarray(g, dtype=np.float64), h) for g in grads], axis=-1)
    shape = padded.shape[:3]
    flat = padded.reshape(-1, 3)
    deltas = np.ravel_multi_index((window_displacements(window) + h).T, shape) - np.ravel_multi_index((h, h, h), shape)
    linear = np.ravel_multi_index((np.asarray(centers) + h).T, shape)

    theta = np.empty(len(linear))
    phi = np.empty(len(linear))
    for start in range(0, len(linear), chunk):
        block = linear[start:start + chunk]
        F = flat[block[:, None] + deltas[None, :]]
        theta[start:start + chunk], phi[start:start + chunk] = dominant_orientations(F)
    return theta, phi


def quantize(angles: np.ndarray, bins: int) -> np.ndarray:
    """Uniform bins over (−π/2, π/2]; bin b holds (−π/2 + b·w, −π/2 + (b+1)·w]"""
    width = np.pi / bins
    index = np.ceil((np.asarray(angles) + HALF_PI) / width) - 1
    return np.clip(index, 0, bins - 1).astype(np.int32)
