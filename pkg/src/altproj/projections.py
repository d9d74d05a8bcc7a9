"""Reverse-KL projections onto the fixed-conditional sets S1 / S2.

S1 holds the joints whose y|x-conditional is a given kernel, S2 those whose
x|y-conditional is.  The closed-form projection keeps the conditioning
marginal of the input and swaps in the kernel.  ``oracle_project`` reaches
the same point by numerically minimizing the reverse KL over the convex hull
of the extreme points ``mu_a = delta_a (x) kernel[a]`` and never uses that
closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .divergences import kl
from .exceptions import DegenerateSupport, NonPositiveEntry, NotConverged
from .measures import (
    LOG_LIKELIHOOD,
    X_GIVEN_Y,
    Y_GIVEN_X,
    JointMeasure,
    resample,
)

ORACLE_TOL = 1e-9
GRID_RESOLUTION = 1000
GRID_MAX_DIM = 3
ARMIJO_SLACK = 1e-14


def _require_full_support(pi):
    if not pi.has_full_support():
        raise DegenerateSupport("projection input must have full support on the support set")


def project(pi, kernel):
    """Reverse-KL projection of ``pi`` onto the set fixed by ``kernel``."""
    _require_full_support(pi)
    return resample(pi, kernel)


def project_s1(pi, kernel_y_given_x):
    if kernel_y_given_x.direction != Y_GIVEN_X:
        raise ValueError("project_s1 needs a y|x kernel")
    return project(pi, kernel_y_given_x)


def project_s2(pi, kernel_x_given_y):
    if kernel_x_given_y.direction != X_GIVEN_Y:
        raise ValueError("project_s2 needs an x|y kernel")
    return project(pi, kernel_x_given_y)


# -- numerical oracle -------------------------------------------------------


def project_to_simplex(v):
    """Euclidean projection onto the probability simplex (sort-based)."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    ind = np.arange(1, v.size + 1)
    rho = np.count_nonzero(u - css / ind > 0)
    theta = css[rho - 1] / rho
    return np.maximum(v - theta, 0.0)


@lru_cache(maxsize=4)
def _simplex_grid(dim, resolution):
    """All points of the simplex with coordinates in multiples of 1/resolution."""
    if dim == 1:
        pts = np.array([[resolution]])
    elif dim == 2:
        i = np.arange(resolution + 1)
        pts = np.stack([i, resolution - i], axis=1)
    else:
        i, j = np.meshgrid(np.arange(resolution + 1), np.arange(resolution + 1), indexing="ij")
        keep = i + j <= resolution
        i, j = i[keep], j[keep]
        pts = np.stack([i, j, resolution - i - j], axis=1)
    w = pts / resolution
    with np.errstate(divide="ignore"):
        logw = np.log(w)
    return w, logw


@dataclass(frozen=True)
class OracleResult:
    projection: JointMeasure
    weights: np.ndarray
    objective: float
    iterations: int


def _extreme_points(kernel):
    """``mu_a`` for each conditioning state ``a`` as rows over the (nx, ny) grid."""
    k = kernel.rows.shape[0]
    pts = np.zeros((k,) + kernel.support.shape)
    for a in range(k):
        if kernel.axis == "x":
            pts[a, a, :] = kernel.rows[a]
        else:
            pts[a, :, a] = kernel.rows[a]
    return pts


def oracle_project(pi, kernel, tol=ORACLE_TOL, max_iter=10_000, details=False):
    """Minimize ``kl(pi, sum_a w_a mu_a)`` over the weight simplex.

    Small hulls (at most three extreme points) are first searched
    exhaustively on a simplex grid; the best grid point, or the barycenter
    for larger hulls, seeds a spectral projected-gradient descent with
    Armijo backtracking that stops once the gradient projected to the
    simplex tangent space has sup-norm at most ``tol``.
    """
    _require_full_support(pi)
    mus = _extreme_points(kernel)
    k = mus.shape[0]
    p = pi.weights
    live = p > 0
    # mass of pi sitting on each extreme point's face
    face_mass = np.array([math.fsum(p[mu > 0]) for mu in mus])
    if (face_mass <= 0).any():
        raise DegenerateSupport("input puts no mass on some extreme point")

    def objective(w):
        q = np.tensordot(w, mus, axes=1)
        return kl(p, q)

    def gradient(w):
        q = np.tensordot(w, mus, axes=1)
        ratio = np.where(live, p / np.where(live, q, 1.0), 0.0)
        return -np.tensordot(mus, ratio, axes=([1, 2], [0, 1]))

    if k <= GRID_MAX_DIM:
        grid, loggrid = _simplex_grid(k, GRID_RESOLUTION)
        # on the hull, kl(pi, q_w) = const - sum_a face_mass[a] log w[a]
        with np.errstate(invalid="ignore"):
            scores = loggrid @ face_mass
        w = grid[int(np.nanargmax(scores))].astype(float)
        w = np.maximum(w, 1.0 / (10 * GRID_RESOLUTION))
        w /= w.sum()
    else:
        w = np.full(k, 1.0 / k)

    f = objective(w)
    g = gradient(w)
    step = 1.0 / max(np.abs(g).max(), 1.0)
    for it in range(1, max_iter + 1):
        tangent = g - g.mean()
        if np.abs(tangent).max() <= tol:
            break
        while True:
            cand = project_to_simplex(w - step * g)
            d = cand - w
            if not (cand > 0).all():
                step *= 0.5
                continue
            # objective change without cancellation; the slack absorbs the
            # rounding of sum(d) == 0, which otherwise stalls the search
            delta_f = -math.fsum(face_mass * np.log1p(d / w))
            if delta_f <= 1e-4 * float(tangent @ d) + ARMIJO_SLACK:
                break
            step *= 0.5
            if step < 1e-30:
                raise NotConverged(it, "line search failed in projection oracle")
        g_new = gradient(cand)
        s, y = cand - w, g_new - g
        w, g = cand, g_new
        sy = float(s @ y)
        step = float(s @ s) / sy if sy > 0 else 1.0
    else:
        raise NotConverged(max_iter)
    f = objective(w)
    q = np.tensordot(w, mus, axes=1)
    proj = JointMeasure(kernel.support, q / math.fsum(q.ravel()))
    if details:
        return OracleResult(proj, w, f, it)
    return proj


def oracle_project_s1(pi, kernel_y_given_x, tol=ORACLE_TOL):
    return oracle_project(pi, kernel_y_given_x, tol)


def oracle_project_s2(pi, kernel_x_given_y, tol=ORACLE_TOL):
    return oracle_project(pi, kernel_x_given_y, tol)


# -- log-denormalization ----------------------------------------------------


def log_denormalize(pi):
    """Coordinate-wise logarithm of a positive measure on its support."""
    vals = pi.on_support()
    if not (vals > 0).all():
        raise NonPositiveEntry("log-denormalization needs strictly positive weights on the support")
    out = np.full(pi.shape, -np.inf)
    out[pi.support.mask] = np.log(vals)
    return JointMeasure(pi.support, out, LOG_LIKELIHOOD)


def exp_likelihood(l):
    """Inverse of ``log_denormalize``: a denormalized measure."""
    return JointMeasure(l.support, np.exp(l.weights), "denormalized")


@dataclass(frozen=True, eq=False)
class AffineSubspace:
    """``offset + span(basis)`` in coordinates over the support pairs.

    ``blocks[i]`` is the conditioning state of support pair ``i``; the basis
    vector for state ``a`` is the indicator of ``blocks == a``.
    """

    support: object
    offset: np.ndarray
    blocks: np.ndarray

    @property
    def basis(self):
        n = int(self.blocks.max()) + 1
        return (self.blocks[None, :] == np.arange(n)[:, None]).astype(float)

    @property
    def dim(self):
        return int(self.blocks.max()) + 1

    def point(self, coeffs):
        """``offset + sum_a coeffs[a] * basis[a]`` as a log-likelihood measure."""
        vec = self.offset + np.asarray(coeffs, dtype=float)[self.blocks]
        out = np.full(self.support.shape, -np.inf)
        out[self.support.mask] = vec
        return JointMeasure(self.support, out, LOG_LIKELIHOOD)


def affine_subspace(kernel):
    """The log-denormalization of the set of joints with this kernel's conditionals."""
    mask = kernel.support.mask
    grid = kernel.as_xy()
    if not (grid[mask] > 0).all():
        raise NonPositiveEntry("kernel must be positive on the support")
    xs, ys = np.nonzero(mask)
    blocks = xs if kernel.axis == "x" else ys
    return AffineSubspace(kernel.support, np.log(grid[mask]), blocks.astype(int))


def affine_residual(l, sub):
    """Euclidean distance from ``l`` to the affine subspace ``sub``."""
    v = l.on_support() - sub.offset
    n = sub.dim
    counts = np.bincount(sub.blocks, minlength=n)
    means = np.bincount(sub.blocks, weights=v, minlength=n) / counts
    r = v - means[sub.blocks]
    return math.sqrt(math.fsum(r * r))
