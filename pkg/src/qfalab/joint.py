"""Finite joint laws of (X, Y) and the classical information quantities on them."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .density import binary_entropy, shannon_entropy
from .errors import DimensionMismatch, NotADistribution

DIST_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class JointDistribution:
    """``mass[i, j] = Pr[X = labels_x[i], Y = labels_y[j]]``."""

    labels_x: tuple
    labels_y: tuple
    mass: np.ndarray

    def __post_init__(self):
        mass = np.array(self.mass, dtype=float)
        if mass.shape != (len(self.labels_x), len(self.labels_y)):
            raise DimensionMismatch(f"mass has shape {mass.shape}, labels give {(len(self.labels_x), len(self.labels_y))}")
        if np.any(mass < -DIST_TOL) or abs(mass.sum() - 1.0) > DIST_TOL:
            raise NotADistribution(f"joint mass must be nonnegative and sum to 1 (sum {mass.sum():.12g})")
        mass = np.clip(mass, 0.0, None)
        mass.setflags(write=False)
        object.__setattr__(self, "labels_x", tuple(self.labels_x))
        object.__setattr__(self, "labels_y", tuple(self.labels_y))
        object.__setattr__(self, "mass", mass)

    @property
    def marginal_x(self) -> np.ndarray:
        return self.mass.sum(axis=1)

    @property
    def marginal_y(self) -> np.ndarray:
        return self.mass.sum(axis=0)

    def entropy_x(self) -> float:
        return _entropy(self.marginal_x)

    def entropy_y(self) -> float:
        return _entropy(self.marginal_y)

    def entropy_xy(self) -> float:
        return _entropy(self.mass.ravel())

    def conditional_entropy_x_given_y(self) -> float:
        """H(X|Y) = H(X, Y) - H(Y); zero-probability outcomes contribute nothing."""
        return max(self.entropy_xy() - self.entropy_y(), 0.0)


def _entropy(p: np.ndarray) -> float:
    # renormalise away float drift; the joint was already checked to sum to 1
    return shannon_entropy(p / p.sum())


def mutual_information(joint: JointDistribution) -> float:
    """I(X:Y) = H(X) + H(Y) - H(X, Y), with tiny negative round-off clamped to 0."""
    value = joint.entropy_x() + joint.entropy_y() - joint.entropy_xy()
    return 0.0 if value < 0 else value


def fano_floor(p: float) -> float:
    """1 - H(p): least I(X:Y) for an unbiased bit X recovered from Y with probability p."""
    return 1.0 - binary_entropy(p)


def binary_symmetric_joint(p: float) -> JointDistribution:
    """Unbiased bit X and Y = X with probability p."""
    return JointDistribution(("0", "1"), (0, 1), [[p / 2, (1 - p) / 2], [(1 - p) / 2, p / 2]])
