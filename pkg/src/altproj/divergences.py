"""KL / reverse-KL divergences and the entropy Bregman machinery.

Divergences are plain floats; ``math.inf`` is returned (never summed) when
absolute continuity fails.  All sums go through ``math.fsum`` so results do
not depend on accumulation order.
"""
from __future__ import annotations

import math

import numpy as np

from .exceptions import (
    AbsoluteContinuityViolation,
    NonPositiveInput,
    ShapeMismatch,
    SupportMismatch,
)
from .measures import JointMeasure, MarginalDistribution, _axis_index


def _vector(m):
    if isinstance(m, (JointMeasure, MarginalDistribution)):
        return m.weights
    return np.asarray(m, dtype=float)


def _same_shape(p, q):
    a, b = _vector(p), _vector(q)
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {b.shape}")
    return a.ravel(), b.ravel()


def kl(p, q):
    """Kullback-Leibler divergence ``sum p log(p/q)`` with ``0 log 0 = 0``."""
    a, b = _same_shape(p, q)
    live = a > 0
    if (b[live] <= 0).any():
        return math.inf
    a, b = a[live], b[live]
    return max(math.fsum(a * (np.log(a) - np.log(b))), 0.0)


def rkl(p, q):
    """Reverse KL: ``rkl(p, q) == kl(q, p)``."""
    return kl(q, p)


def b_h(a, b):
    """Bregman divergence of the scalar entropy ``x log x - x``."""
    if not (a > 0 and b > 0):
        raise NonPositiveInput(f"b_h needs positive arguments, got {a!r}, {b!r}")
    return max(math.fsum((a * (math.log(a) - math.log(b)), -a, b)), 0.0)


def _positive_pair(pi, rho):
    if isinstance(pi, JointMeasure) and isinstance(rho, JointMeasure):
        if pi.support != rho.support:
            raise SupportMismatch("measures live on different supports")
        a, b = pi.on_support(), rho.on_support()
    else:
        a, b = _same_shape(pi, rho)
    if not ((a > 0).all() and (b > 0).all()):
        raise SupportMismatch("denormalized measures must be positive on the support")
    return a, b


def entropy(pi):
    """``H(pi) = sum pi log pi - pi`` over the support."""
    a = pi.on_support() if isinstance(pi, JointMeasure) else np.asarray(pi, dtype=float).ravel()
    live = a > 0
    return math.fsum(np.where(live, a * np.log(np.where(live, a, 1.0)), 0.0) - a)


def entropy_gradient(pi):
    """Gradient of ``entropy``: the coordinate-wise logarithm."""
    a = pi.on_support() if isinstance(pi, JointMeasure) else np.asarray(pi, dtype=float)
    return np.log(a)


def bregman_entropy(pi, rho):
    """``B_H(pi, rho) = sum pi log(pi/rho) - pi + rho`` for positive measures."""
    a, b = _positive_pair(pi, rho)
    terms = np.concatenate([a * (np.log(a) - np.log(b)), -a, b])
    return max(math.fsum(terms), 0.0)


def decompose_bregman_entropy(pi, rho):
    """Split ``B_H(pi, rho)`` into a total-mass part and a scaled KL part.

    Returns ``(b_h(|pi|, |rho|), |pi| * kl(pi/|pi|, rho/|rho|))``.
    """
    a, b = _positive_pair(pi, rho)
    ma, mb = math.fsum(a), math.fsum(b)
    return b_h(ma, mb), ma * kl(a / ma, b / mb)


def bregman_dual(l1, l2):
    """Bregman divergence of the Fenchel dual of the entropy on log-likelihoods.

    ``sum exp(l1) - exp(l2) - exp(l2) * (l1 - l2)``.  Satisfies
    ``bregman_dual(log q, log p) == bregman_entropy(p, q)``.
    """
    if isinstance(l1, JointMeasure) and isinstance(l2, JointMeasure):
        if l1.support != l2.support:
            raise SupportMismatch("log-likelihoods live on different supports")
        u, v = l1.on_support(), l2.on_support()
    else:
        u, v = _same_shape(l1, l2)
    eu, ev = np.exp(u), np.exp(v)
    terms = np.concatenate([eu, -ev, -ev * (u - v)])
    return max(math.fsum(terms), 0.0)


def kl_chain_rule(p, q, axis):
    """Chain-rule split of ``kl(p, q)`` along ``axis``.

    Returns ``(marginal_term, conditional_term)`` where the conditional term
    is the ``p``-average of the KL between the conditionals given ``axis``.
    """
    a, b = _vector(p), _vector(q)
    if a.shape != b.shape or a.ndim != 2:
        raise ShapeMismatch("chain rule needs two joint measures on the same grid")
    if ((a > 0) & (b <= 0)).any():
        raise AbsoluteContinuityViolation("p is not absolutely continuous w.r.t. q")
    if _axis_index(axis) == 1:
        a, b = a.T, b.T
    pa = np.sum(a, axis=1)
    qa = np.sum(b, axis=1)
    cond = []
    for i in np.flatnonzero(pa > 0):
        cond.append(pa[i] * kl(a[i] / pa[i], b[i] / qa[i]))
    return kl(pa, qa), math.fsum(cond)
