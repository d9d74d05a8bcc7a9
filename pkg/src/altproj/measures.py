"""Measures on a finite product space X x Y restricted to a support set.

Everything is stored densely as ``(nx, ny)`` arrays together with a boolean
support mask; entries off the mask are hard zeros (``-inf`` for log views).
All objects are immutable once built.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exceptions import AxisMismatch, ShapeMismatch, SupportMismatch, ZeroMarginal

PROBABILITY = "probability"
DENORMALIZED = "denormalized"
LOG_LIKELIHOOD = "logLikelihood"
VIEWS = (PROBABILITY, DENORMALIZED, LOG_LIKELIHOOD)

Y_GIVEN_X = "y|x"
X_GIVEN_Y = "x|y"

NORM_TOL = 1e-12


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.flags.writeable = False
    return a


def conditioning_axis(direction):
    if direction == Y_GIVEN_X:
        return "x"
    if direction == X_GIVEN_Y:
        return "y"
    raise ValueError(f"unknown direction {direction!r}")


def _axis_index(axis):
    if axis == "x":
        return 0
    if axis == "y":
        return 1
    raise ValueError(f"axis must be 'x' or 'y', got {axis!r}")


@dataclass(frozen=True, eq=False)
class SupportSet:
    """The set of admissible pairs, as a boolean ``(nx, ny)`` mask."""

    mask: np.ndarray

    def __post_init__(self):
        mask = _frozen(self.mask, dtype=bool)
        if mask.ndim != 2:
            raise ShapeMismatch("support mask must be two-dimensional")
        if not mask.any():
            raise SupportMismatch("support set is empty")
        if not mask.any(axis=1).all():
            raise SupportMismatch(f"x states {np.flatnonzero(~mask.any(axis=1)).tolist()} have no pair")
        if not mask.any(axis=0).all():
            raise SupportMismatch(f"y states {np.flatnonzero(~mask.any(axis=0)).tolist()} have no pair")
        object.__setattr__(self, "mask", mask)

    @classmethod
    def full(cls, nx, ny):
        return cls(np.ones((nx, ny), dtype=bool))

    @classmethod
    def from_pairs(cls, nx, ny, pairs):
        mask = np.zeros((nx, ny), dtype=bool)
        for x, y in pairs:
            mask[int(x), int(y)] = True
        return cls(mask)

    @property
    def nx(self):
        return self.mask.shape[0]

    @property
    def ny(self):
        return self.mask.shape[1]

    @property
    def shape(self):
        return self.mask.shape

    @property
    def size(self):
        return int(self.mask.sum())

    def pairs(self):
        """Support pairs in lexicographic order."""
        return [(int(x), int(y)) for x, y in zip(*np.nonzero(self.mask))]

    def __eq__(self, other):
        return isinstance(other, SupportSet) and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.shape, self.mask.tobytes()))


@dataclass(frozen=True, eq=False)
class JointMeasure:
    """Weights on the support, in one of three views.

    ``probability`` weights are nonnegative and sum to one, ``denormalized``
    weights are strictly positive on the support, and ``logLikelihood``
    weights are arbitrary reals on the support (``-inf`` off it).
    """

    support: SupportSet
    weights: np.ndarray
    view: str = PROBABILITY

    def __post_init__(self):
        w = _frozen(self.weights)
        mask = self.support.mask
        if w.shape != mask.shape:
            raise ShapeMismatch(f"weights shape {w.shape} != support shape {mask.shape}")
        if self.view not in VIEWS:
            raise ValueError(f"unknown view {self.view!r}")
        if self.view == LOG_LIKELIHOOD:
            if np.isnan(w[mask]).any() or np.isposinf(w[mask]).any():
                raise ValueError("log-likelihood must be finite on the support")
            w = w.copy()
            w[~mask] = -np.inf
            w.flags.writeable = False
        else:
            if (w[~mask] != 0).any():
                raise SupportMismatch("nonzero weight off the support")
            if self.view == PROBABILITY:
                if (w < 0).any():
                    raise ValueError("probability weights must be nonnegative")
                total = math.fsum(w.ravel())
                if abs(total - 1.0) > NORM_TOL:
                    raise ValueError(f"probability weights sum to {total!r}")
            elif not (w[mask] > 0).all():
                raise ValueError("denormalized weights must be positive on the support")
        object.__setattr__(self, "weights", w)

    @property
    def shape(self):
        return self.weights.shape

    def on_support(self):
        """Weights as a flat vector over the support pairs."""
        return self.weights[self.support.mask]

    def total(self):
        return math.fsum(self.on_support())

    def has_full_support(self):
        if self.view == LOG_LIKELIHOOD:
            return True
        return bool((self.on_support() > 0).all())

    def positive_mask(self):
        if self.view == LOG_LIKELIHOOD:
            return self.support.mask.copy()
        return self.weights > 0


@dataclass(frozen=True, eq=False)
class MarginalDistribution:
    axis: str
    weights: np.ndarray

    def __post_init__(self):
        _axis_index(self.axis)
        w = _frozen(self.weights)
        if w.ndim != 1:
            raise ShapeMismatch("marginal must be a vector")
        if (w < 0).any():
            raise ValueError("marginal weights must be nonnegative")
        total = math.fsum(w)
        if abs(total - 1.0) > NORM_TOL:
            raise ValueError(f"marginal sums to {total!r}")
        object.__setattr__(self, "weights", w)

    def __len__(self):
        return len(self.weights)


@dataclass(frozen=True, eq=False)
class ConditionalKernel:
    """A row-stochastic family of conditionals on the support.

    ``rows[a, b]`` is the probability of ``b`` given the conditioning state
    ``a``: shape ``(nx, ny)`` for ``y|x`` and ``(ny, nx)`` for ``x|y``.
    """

    direction: str
    rows: np.ndarray
    support: SupportSet

    def __post_init__(self):
        axis = conditioning_axis(self.direction)
        rows = _frozen(self.rows)
        mask = self.support.mask if axis == "x" else self.support.mask.T
        if rows.shape != mask.shape:
            raise ShapeMismatch(f"kernel rows shape {rows.shape} != {mask.shape}")
        if (rows < 0).any():
            raise ValueError("kernel entries must be nonnegative")
        if (rows[~mask] != 0).any():
            raise SupportMismatch("kernel has mass off the support")
        sums = np.array([math.fsum(r) for r in rows])
        bad = np.flatnonzero(np.abs(sums - 1.0) > NORM_TOL)
        if bad.size:
            raise ValueError(f"kernel rows {bad.tolist()} do not sum to one")
        object.__setattr__(self, "rows", rows)

    @property
    def axis(self):
        return conditioning_axis(self.direction)

    def as_xy(self):
        """Kernel values laid out on the ``(nx, ny)`` grid."""
        return self.rows if self.direction == Y_GIVEN_X else self.rows.T


def from_weights(weights, support=None, view=PROBABILITY):
    weights = np.asarray(weights, dtype=float)
    if support is None:
        mask = weights != 0 if view != LOG_LIKELIHOOD else np.isfinite(weights)
        support = SupportSet(mask)
    return JointMeasure(support, weights, view)


def normalized(weights, support):
    """Probability measure proportional to ``weights`` (exact-sum rescaling)."""
    weights = np.where(support.mask, np.asarray(weights, dtype=float), 0.0)
    return JointMeasure(support, weights / math.fsum(weights.ravel()), PROBABILITY)


def dirac(support, x, y):
    if not support.mask[x, y]:
        raise SupportMismatch(f"({x}, {y}) is not in the support")
    w = np.zeros(support.shape)
    w[x, y] = 1.0
    return JointMeasure(support, w)


def uniform(support):
    return normalized(support.mask.astype(float), support)


def marginal(pi, axis):
    """Marginal of a probability measure on ``axis`` ('x' or 'y')."""
    if pi.view != PROBABILITY:
        raise ValueError("marginal requires a probability measure")
    other = 1 - _axis_index(axis)
    w = np.sum(pi.weights, axis=other)
    return MarginalDistribution(axis, w / math.fsum(w))


def conditional(pi, direction):
    """Disintegrate ``pi`` into the kernel of the given direction.

    Raises ZeroMarginal when a conditioning state carries no mass.
    """
    axis = conditioning_axis(direction)
    m = marginal(pi, axis).weights
    zero = np.flatnonzero(m <= 0)
    if zero.size:
        raise ZeroMarginal(axis, int(zero[0]))
    grid = pi.weights if axis == "x" else pi.weights.T
    rows = grid / grid.sum(axis=1, keepdims=True)
    return ConditionalKernel(direction, rows, pi.support)


def joint_from(kernel, marg):
    """Joint measure with conditioning marginal ``marg`` and the kernel's conditionals."""
    if kernel.axis != marg.axis:
        raise AxisMismatch(f"kernel conditions on {kernel.axis}, marginal is over {marg.axis}")
    if len(marg) != kernel.rows.shape[0]:
        raise ShapeMismatch("marginal length does not match kernel")
    grid = kernel.rows * marg.weights[:, None]
    if kernel.axis == "y":
        grid = grid.T
    return JointMeasure(kernel.support, grid)


def resample(pi, kernel):
    """Keep the conditioning marginal of ``pi``, replace its conditionals by ``kernel``.

    The result is rescaled to sum to one exactly.
    """
    nxt = joint_from(kernel, marginal(pi, kernel.axis))
    return normalized(nxt.weights, nxt.support)


def check_disintegration(pi, kernel):
    """Largest absolute deviation of ``pi`` from ``kernel`` times its own marginal."""
    if pi.shape != kernel.support.shape:
        raise ShapeMismatch("measure and kernel live on different grids")
    m = marginal(pi, kernel.axis).weights
    grid = kernel.rows * m[:, None]
    if kernel.axis == "y":
        grid = grid.T
    return float(np.max(np.abs(pi.weights - grid)))
