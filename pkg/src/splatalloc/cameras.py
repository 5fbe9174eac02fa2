"""Camera pose alignment, focal transfer, and the scene-scale penalty.

Predicted cameras live in an arbitrary similarity frame, so evaluation maps
ground-truth poses into that frame: view n1 anchors rotation and translation,
and the n1-n2 baseline ratio fixes the scale.  The transform acts on a pose
by scaling the anchor-relative translation, which makes the anchor map back
to its prediction exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateBaselineError

_ORTHO_TOL = 1e-9
_REORTHO_TOL = 1e-12


def _check_rotation(r: np.ndarray, tol: float, what: str) -> None:
    drift = np.abs(r.T @ r - np.eye(3)).max()
    if drift > tol:
        raise ValueError(f"{what} is not orthonormal (drift {drift:.3e})")
    det = float(np.linalg.det(r))
    if abs(det - 1.0) > tol:
        raise ValueError(f"{what} has determinant {det:.12f}, expected +1")


@dataclass(frozen=True)
class Pose:
    """Camera-to-world transform as a 4x4 matrix."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.float64, copy=True)
        if m.shape != (4, 4):
            raise ValueError(f"pose matrix must be 4x4, got {m.shape}")
        if not np.isfinite(m).all():
            raise ValueError("pose matrix must be finite")
        if not np.array_equal(m[3], [0.0, 0.0, 0.0, 1.0]):
            raise ValueError("pose matrix last row must be (0, 0, 0, 1)")
        _check_rotation(m[:3, :3], _ORTHO_TOL, "pose rotation block")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @classmethod
    def from_rt(cls, rotation: np.ndarray, center: np.ndarray) -> "Pose":
        m = np.eye(4)
        m[:3, :3] = rotation
        m[:3, 3] = center
        return cls(m)

    @property
    def rotation(self) -> np.ndarray:
        return self.matrix[:3, :3]

    @property
    def center(self) -> np.ndarray:
        """Camera center in world coordinates (translation column)."""
        return self.matrix[:3, 3]


@dataclass(frozen=True)
class SimilarityTransform:
    """Uniform scale + rotation + translation acting on points as
    s * (R @ p) + t."""

    scale: float
    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        if not (self.scale > 0.0 and np.isfinite(self.scale)):
            raise ValueError(f"scale must be positive and finite, got {self.scale}")
        r = np.array(self.rotation, dtype=np.float64, copy=True)
        t = np.array(self.translation, dtype=np.float64, copy=True)
        if r.shape != (3, 3):
            raise ValueError("rotation must be 3x3")
        if t.shape != (3,):
            raise ValueError("translation must be a 3-vector")
        _check_rotation(r, _ORTHO_TOL, "similarity rotation")
        if not np.isfinite(t).all():
            raise ValueError("translation must be finite")
        r.flags.writeable = False
        t.flags.writeable = False
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "SimilarityTransform":
        return cls(scale=1.0, rotation=np.eye(3), translation=np.zeros(3))

    def apply_point(self, point: np.ndarray) -> np.ndarray:
        p = np.asarray(point, dtype=np.float64)
        return self.scale * (self.rotation @ p) + self.translation

    def as_matrix(self) -> np.ndarray:
        m = np.eye(4)
        m[:3, :3] = self.scale * self.rotation
        m[:3, 3] = self.translation
        return m


@dataclass(frozen=True)
class GaussianCenterSet:
    """World-space Gaussian centers as an (n, 3) array."""

    centers: np.ndarray

    def __post_init__(self):
        c = np.array(self.centers, dtype=np.float64, copy=True)
        if c.ndim != 2 or c.shape[1] != 3:
            raise ValueError(f"centers must be (n, 3), got {c.shape}")
        if not np.isfinite(c).all():
            raise ValueError("centers must be finite")
        c.flags.writeable = False
        object.__setattr__(self, "centers", c)

    def __len__(self) -> int:
        return int(self.centers.shape[0])


def estimate_alignment(
    gt_n1: Pose, gt_n2: Pose, pred_n1: Pose, pred_n2: Pose
) -> SimilarityTransform:
    """Similarity mapping the ground-truth frame onto the predicted frame.

    View n1 is the anchor: rotation is pred_n1 composed with the inverse
    ground-truth rotation, and the translation is chosen so the anchor center
    maps to its prediction with no rounding residue.  Scale is the ratio of
    the n1-n2 camera baselines.
    """
    gt_base = float(np.linalg.norm(gt_n1.center - gt_n2.center))
    pred_base = float(np.linalg.norm(pred_n1.center - pred_n2.center))
    if gt_base == 0.0 or pred_base == 0.0:
        raise DegenerateBaselineError(
            "views n1 and n2 share a camera center; baseline scale is undefined"
        )
    scale = pred_base / gt_base
    rotation = pred_n1.rotation @ gt_n1.rotation.T
    # Same association as apply_point so the anchor cancels exactly.
    translation = pred_n1.center - scale * (rotation @ gt_n1.center)
    return SimilarityTransform(scale=scale, rotation=rotation, translation=translation)


def align_target(transform: SimilarityTransform, gt_target: Pose) -> Pose:
    """Map a ground-truth pose into the predicted frame.

    The rotation block is re-orthonormalized via SVD only when accumulated
    product drift exceeds 1e-12, keeping exact inputs bit-stable.
    """
    rotation = transform.rotation @ gt_target.rotation
    drift = np.abs(rotation.T @ rotation - np.eye(3)).max()
    if drift > _REORTHO_TOL:
        u, _, vt = np.linalg.svd(rotation)
        rotation = u @ vt
        if np.linalg.det(rotation) < 0.0:
            u[:, -1] = -u[:, -1]
            rotation = u @ vt
    center = transform.apply_point(gt_target.center)
    return Pose.from_rt(rotation, center)


def transfer_focal(pred_f_n1: float, gt_f_n1: float, gt_f_target: float) -> float:
    """Rescale a ground-truth target focal by the predicted/ground-truth
    ratio at the anchor view."""
    if gt_f_n1 <= 0.0:
        raise ValueError(f"ground-truth anchor focal must be positive, got {gt_f_n1}")
    return (pred_f_n1 / gt_f_n1) * gt_f_target


def scene_scale_loss(centers: GaussianCenterSet) -> float:
    """Distance of the mean center radius from 1."""
    if len(centers) == 0:
        raise ValueError("scene scale is undefined for an empty center set")
    radii = np.linalg.norm(centers.centers, axis=1)
    return abs(float(radii.mean()) - 1.0)


def pose_to_json(pose: Pose) -> list:
    return pose.matrix.tolist()


def pose_from_json(obj) -> Pose:
    return Pose(np.asarray(obj, dtype=np.float64))


def save_pose(pose: Pose, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        json.dump(pose_to_json(pose), fh)
        fh.write("\n")


def load_pose(path) -> Pose:
    with open(path, encoding="ascii") as fh:
        return pose_from_json(json.load(fh))
