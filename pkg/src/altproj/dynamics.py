"""Alternating chains on X x Y and the exact evolution of their distributions.

Half-step convention: at even ``t`` the y-coordinate is resampled from
P[y|x] (the x-marginal is kept); at odd ``t`` the x-coordinate is resampled
from P[x|y].
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from .exceptions import (
    CapExceeded,
    CompatibilityViolation,
    NotConverged,
    NotErgodic,
    SpecValidationError,
)
from .measures import (
    NORM_TOL,
    X_GIVEN_Y,
    Y_GIVEN_X,
    ConditionalKernel,
    JointMeasure,
    MarginalDistribution,
    check_disintegration,
    joint_from,
    marginal,
    normalized,
    resample,
)

COMPAT_TOL = 1e-8
SPEC_TOL = 1e-10
STATIONARY_TOL = 1e-13
STATIONARY_MAX_ITER = 10**6


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    space: str
    rows: np.ndarray

    def __post_init__(self):
        rows = np.array(self.rows, dtype=float)
        if rows.ndim != 2 or rows.shape[0] != rows.shape[1]:
            raise ValueError("transition matrix must be square")
        if (rows < 0).any():
            raise ValueError("transition matrix has negative entries")
        if (np.abs(rows.sum(axis=1) - 1.0) > NORM_TOL).any():
            raise ValueError("transition matrix rows must sum to one")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def n(self):
        return self.rows.shape[0]


@dataclass(frozen=True)
class Ergodicity:
    irreducible: bool
    aperiodic: bool
    period: int

    @property
    def ergodic(self):
        return self.irreducible and self.aperiodic


@dataclass(frozen=True)
class ChainState:
    t: int
    pi: JointMeasure


@dataclass(frozen=True, eq=False)
class AlternatingChain:
    """A compatible pair of kernels together with their ES coupling.

    Build with :meth:`from_kernels`, which derives the ES measure and the
    burn-in time and validates every invariant.  The bare constructor does no
    checking, so deliberately corrupted chains can be fed to the verifiers.
    """

    kernel_y_given_x: ConditionalKernel
    kernel_x_given_y: ConditionalKernel
    es: JointMeasure
    burn_in: int
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def support(self):
        return self.es.support

    @property
    def nx(self):
        return self.support.nx

    @property
    def ny(self):
        return self.support.ny

    @classmethod
    def from_kernels(cls, kernel_y_given_x, kernel_x_given_y, *, burn_in_cap=None, meta=None):
        es = es_from_kernels(kernel_y_given_x, kernel_x_given_y)
        chain = cls(kernel_y_given_x, kernel_x_given_y, es, -1, dict(meta or {}))
        chain.raise_for_violations()
        t0 = burn_in(chain, cap=burn_in_cap)
        return cls(kernel_y_given_x, kernel_x_given_y, es, t0, dict(meta or {}))

    def violations(self, tol=SPEC_TOL):
        """List of ``(invariant, message)`` pairs this chain breaks."""
        out = []
        kyx, kxy = self.kernel_y_given_x, self.kernel_x_given_y
        if kyx.direction != Y_GIVEN_X or kxy.direction != X_GIVEN_Y:
            out.append(("kernel-direction", "kernels given in the wrong directions"))
            return out
        mask = self.support.mask
        for name, k in (("y|x", kyx), ("x|y", kxy)):
            grid = k.as_xy()
            if k.support != self.support or not (grid[mask] > 0).all():
                out.append(("kernel-support", f"P[{name}] is not supported exactly on the support set"))
        for name, k in (("y|x", kyx), ("x|y", kxy)):
            v = check_disintegration(self.es, k)
            if v > tol:
                out.append(("disintegration", f"ES measure violates the P[{name}] disintegration by {v:.3e}"))
        if not check_ergodic(primal_kernel(self)).ergodic:
            out.append(("ergodicity", "primal chain is not irreducible and aperiodic"))
        for axis in ("x", "y"):
            if not (marginal(self.es, axis).weights > 0).all():
                out.append(("es-marginal-support", f"ES {axis}-marginal lacks full support"))
        return out

    def raise_for_violations(self, tol=SPEC_TOL):
        bad = self.violations(tol)
        if bad:
            raise SpecValidationError(*bad[0])


def half_step(state, chain):
    """Resample one coordinate: y|x at even ``t``, x|y at odd ``t``."""
    kernel = chain.kernel_y_given_x if state.t % 2 == 0 else chain.kernel_x_given_y
    return ChainState(state.t + 1, resample(state.pi, kernel))


def run(chain, pi0, steps):
    """Iterate ``half_step`` ``steps`` times; returns ``steps + 1`` states."""
    if pi0.shape != chain.support.shape or (pi0.weights[~chain.support.mask] != 0).any():
        raise ValueError("initial distribution must be supported within the support set")
    pi0 = JointMeasure(chain.support, pi0.weights)
    states = [ChainState(0, pi0)]
    for _ in range(steps):
        states.append(half_step(states[-1], chain))
    return states


def primal_kernel(chain):
    """M(x, x') = sum_y P[y|x] P[x'|y]."""
    m = chain.kernel_y_given_x.rows @ chain.kernel_x_given_y.rows
    return TransitionMatrix("x", m / m.sum(axis=1, keepdims=True))


def dual_kernel(chain):
    """N(y, y') = sum_x P[x|y] P[y'|x]."""
    n = chain.kernel_x_given_y.rows @ chain.kernel_y_given_x.rows
    return TransitionMatrix("y", n / n.sum(axis=1, keepdims=True))


def _bfs_levels(adj, start):
    level = np.full(adj.shape[0], -1)
    level[start] = 0
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for v in np.flatnonzero(adj[u]):
            if level[v] < 0:
                level[v] = level[u] + 1
                queue.append(v)
    return level


def check_ergodic(m):
    """Irreducibility and period of the positive-entry digraph of ``m``."""
    rows = m.rows if isinstance(m, TransitionMatrix) else np.asarray(m)
    adj = rows > 0
    level = _bfs_levels(adj, 0)
    irreducible = bool((level >= 0).all() and (_bfs_levels(adj.T, 0) >= 0).all())
    if not irreducible:
        return Ergodicity(False, False, 0)
    # period = gcd over edges u->v of level[u] + 1 - level[v]
    src, dst = np.nonzero(adj)
    diffs = (level[src] + 1 - level[dst]).tolist()
    period = reduce(math.gcd, diffs, 0)
    return Ergodicity(True, period == 1, int(period))


def stationary(m, tol=STATIONARY_TOL, max_iter=STATIONARY_MAX_ITER):
    """Stationary distribution by power iteration from the uniform vector."""
    if not check_ergodic(m).ergodic:
        raise NotErgodic()
    p = np.full(m.n, 1.0 / m.n)
    for it in range(1, max_iter + 1):
        nxt = p @ m.rows
        nxt /= math.fsum(nxt)
        if np.abs(nxt - p).sum() <= tol:
            return MarginalDistribution(m.space, nxt)
        p = nxt
    raise NotConverged(max_iter)


def _stationary_direct(m):
    n = m.n
    a = np.vstack([m.rows.T - np.eye(n), np.ones(n)])
    b = np.zeros(n + 1)
    b[-1] = 1.0
    p = np.linalg.lstsq(a, b, rcond=None)[0]
    p = np.clip(p, 0.0, None)
    return MarginalDistribution(m.space, p / math.fsum(p))


def es_from_kernels(kernel_y_given_x, kernel_x_given_y, tol=COMPAT_TOL):
    """The unique joint measure compatible with both kernels.

    Raises NotErgodic if the induced primal chain is not ergodic and
    CompatibilityViolation if the kernels admit no common coupling.
    """
    if kernel_y_given_x.direction != Y_GIVEN_X or kernel_x_given_y.direction != X_GIVEN_Y:
        raise SpecValidationError("kernel-direction", "expected a y|x and an x|y kernel")
    m = kernel_y_given_x.rows @ kernel_x_given_y.rows
    m = TransitionMatrix("x", m / m.sum(axis=1, keepdims=True))
    if not check_ergodic(m).ergodic:
        raise NotErgodic("primal chain is not irreducible and aperiodic")
    try:
        mu = stationary(m)
    except NotConverged:
        mu = _stationary_direct(m)
    es = joint_from(kernel_y_given_x, mu)
    es = normalized(es.weights, es.support)
    violation = check_disintegration(es, kernel_x_given_y)
    if violation > tol:
        raise CompatibilityViolation(violation)
    return es


def _support_step(sup, mask, t):
    # sup: (starts, nx, ny) boolean supports
    if t % 2 == 0:
        return sup.any(axis=2)[:, :, None] & mask[None]
    return sup.any(axis=1)[:, None, :] & mask[None]


def default_burn_in_cap(nx, ny):
    return 2 * (nx * nx + ny * ny)


def burn_in(chain, cap=None):
    """Smallest half-step index from which every start has support equal to the support set.

    Propagates support indicators from every Dirac start; a mixture's
    support is the union of its components', so Dirac starts are the worst
    case.
    """
    mask = chain.support.mask
    if cap is None:
        cap = default_burn_in_cap(*mask.shape)
    xs, ys = np.nonzero(mask)
    sup = np.zeros((xs.size,) + mask.shape, dtype=bool)
    sup[np.arange(xs.size), xs, ys] = True
    first_full = None
    t = 0
    while t <= cap:
        full = bool((sup == mask[None]).all())
        if full and first_full is None:
            first_full = t
        elif not full:
            first_full = None
        # two extra half-steps confirm the full support is stable
        if first_full is not None and t >= first_full + 2:
            return first_full
        sup = _support_step(sup, mask, t)
        t += 1
    raise CapExceeded(f"support not full within {cap} half-steps")
