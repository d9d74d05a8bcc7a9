"""Instance generators: seeded random chains and Potts / Edwards-Sokal chains."""
from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .dynamics import AlternatingChain, check_ergodic, primal_kernel
from .exceptions import CapExceeded, GenerationFailed, SpecValidationError
from .measures import (
    X_GIVEN_Y,
    Y_GIVEN_X,
    SupportSet,
    conditional,
    normalized,
)

DEFAULT_MAX_STATES = 200_000
MAX_ATTEMPTS = 100
CLOSED_FORM_TOL = 1e-12


def max_states():
    """Instance size cap, overridable through ``ALTPROJ_MAX_STATES``."""
    return int(os.environ.get("ALTPROJ_MAX_STATES", DEFAULT_MAX_STATES))


def _random_mask(rng, nx, ny, density):
    mask = rng.random((nx, ny)) < density
    for x in np.flatnonzero(~mask.any(axis=1)):
        mask[x, rng.integers(ny)] = True
    for y in np.flatnonzero(~mask.any(axis=0)):
        mask[rng.integers(nx), y] = True
    return mask


def random_joint(nx, ny, density, rng):
    """A random probability measure with weights uniform on [0.1, 1] before normalizing."""
    mask = _random_mask(rng, nx, ny, density) if density < 1 else np.ones((nx, ny), dtype=bool)
    support = SupportSet(mask)
    w = np.where(mask, rng.uniform(0.1, 1.0, size=(nx, ny)), 0.0)
    return normalized(w, support)


def chain_from_joint(pi, **kwargs):
    """The alternating chain whose kernels are the conditionals of ``pi``."""
    return AlternatingChain.from_kernels(conditional(pi, Y_GIVEN_X), conditional(pi, X_GIVEN_Y), **kwargs)


def random_instance(nx, ny, density, seed, *, return_joint=False):
    """Seeded random ergodic chain of size ``nx`` x ``ny``.

    Masks are redrawn until the primal chain is ergodic, at most 100 times.
    """
    if nx < 1 or ny < 1:
        raise ValueError("nx and ny must be positive")
    if not 0 < density <= 1:
        raise ValueError("density must lie in (0, 1]")
    if nx * ny > max_states():
        raise CapExceeded(f"{nx}x{ny} exceeds the state cap {max_states()}")
    rng = np.random.default_rng(seed)
    meta = {"generator": "random", "nx": nx, "ny": ny, "density": density, "seed": seed}
    for _ in range(MAX_ATTEMPTS):
        pi = random_joint(nx, ny, density, rng)
        kyx, kxy = conditional(pi, Y_GIVEN_X), conditional(pi, X_GIVEN_Y)
        probe = AlternatingChain(kyx, kxy, pi, -1)
        if not check_ergodic(primal_kernel(probe)).ergodic:
            continue
        try:
            chain = AlternatingChain.from_kernels(kyx, kxy, meta=meta)
        except SpecValidationError:
            continue
        return (chain, pi) if return_joint else chain
    raise GenerationFailed(f"no ergodic {nx}x{ny} instance in {MAX_ATTEMPTS} attempts")


@dataclass(frozen=True)
class PottsInstance:
    """Potts model on a small graph; ``p = 1 - exp(-beta)`` is the bond probability."""

    n_vertices: int
    edges: tuple
    q: int
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple((int(a), int(b)) for a, b in self.edges))
        if self.n_vertices < 1 or self.q < 1:
            raise ValueError("need at least one vertex and one color")
        if self.beta < 0 or not math.isfinite(self.beta):
            raise ValueError("beta must be finite and nonnegative")
        for a, b in self.edges:
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ValueError(f"edge ({a}, {b}) out of range")

    @property
    def p(self):
        return -math.expm1(-self.beta)

    @property
    def n_colorings(self):
        return self.q**self.n_vertices

    @property
    def n_subsets(self):
        return 2 ** len(self.edges)


def colorings(n_vertices, q):
    """All colorings, base-q little-endian: vertex i has color ``(k // q**i) % q``."""
    k = np.arange(q**n_vertices)
    return np.stack([(k // q**i) % q for i in range(n_vertices)], axis=1)


def edge_subsets(n_edges):
    """Membership matrix of all edge subsets; bit j of the index is edge j."""
    k = np.arange(2**n_edges)
    return ((k[:, None] >> np.arange(n_edges)[None, :]) & 1).astype(bool)


def monochromatic(inst):
    cols = colorings(inst.n_vertices, inst.q)
    if not inst.edges:
        return np.zeros((len(cols), 0), dtype=bool)
    a = np.array([e[0] for e in inst.edges])
    b = np.array([e[1] for e in inst.edges])
    return cols[:, a] == cols[:, b]


def potts_weights(inst):
    """Unnormalized Edwards-Sokal weights ``p^|A| (1-p)^(|E|-|A|) 1[A in mono(sigma)]``."""
    p = inst.p
    subsets = edge_subsets(len(inst.edges))
    sizes = subsets.sum(axis=1)
    bond = p**sizes * (1.0 - p) ** (len(inst.edges) - sizes)
    mono = monochromatic(inst)
    # A is allowed for sigma iff no edge of A is bichromatic under sigma
    allowed = ~(subsets[None, :, :] & ~mono[:, None, :]).any(axis=2)
    return np.where(allowed, bond[None, :], 0.0)


def _components(n_vertices, edges):
    parent = list(range(n_vertices))

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for a, b in edges:
        parent[find(a)] = find(b)
    return [find(v) for v in range(n_vertices)]


def closed_form_kernels(inst, y_states):
    """Edwards-Sokal conditionals written out directly.

    y|x: each monochromatic edge is kept independently with probability p.
    x|y: colors are uniform and constant on each cluster of the kept edges.
    Returns ``(nx, len(y_states))`` and ``(len(y_states), nx)`` arrays.
    """
    p = inst.p
    cols = colorings(inst.n_vertices, inst.q)
    mono = monochromatic(inst)
    subsets = edge_subsets(len(inst.edges))[y_states]
    ygx = np.ones((len(cols), len(y_states)))
    for j in range(len(inst.edges)):
        keep = subsets[None, :, j]
        m = mono[:, j, None]
        ygx *= np.where(m, np.where(keep, p, 1.0 - p), np.where(keep, 0.0, 1.0))
    xgy = np.zeros((len(y_states), len(cols)))
    for i, sub in enumerate(subsets):
        kept = [e for e, on in zip(inst.edges, sub) if on]
        comp = _components(inst.n_vertices, kept)
        ok = np.ones(len(cols), dtype=bool)
        for v, root in enumerate(comp):
            ok &= cols[:, v] == cols[:, root]
        xgy[i] = ok / ok.sum()
    return ygx, xgy


def potts_joint(inst):
    """Enumerated ES joint (before pruning) and the kept edge-subset indices."""
    w = potts_weights(inst)
    y_states = np.flatnonzero(w.sum(axis=0) > 0)
    return w / math.fsum(w.ravel()), y_states


def potts_instance(inst, cap=None):
    """Alternating chain of the Swendsen-Wang dynamics for ``inst``.

    X is every coloring, Y every edge subset that carries mass (all of them
    unless ``beta == 0``).  The derived conditionals are checked against
    :func:`closed_form_kernels`.
    """
    cap = max_states() if cap is None else cap
    if inst.n_colorings * inst.n_subsets > cap:
        raise CapExceeded(f"{inst.n_colorings} x {inst.n_subsets} states exceed the cap {cap}")
    w, y_states = potts_joint(inst)
    w = w[:, y_states]
    support = SupportSet(w > 0)
    pi = normalized(w, support)
    kyx, kxy = conditional(pi, Y_GIVEN_X), conditional(pi, X_GIVEN_Y)
    ygx, xgy = closed_form_kernels(inst, y_states)
    err = max(np.abs(kyx.rows - ygx).max(), np.abs(kxy.rows - xgy).max())
    if err > CLOSED_FORM_TOL:
        raise SpecValidationError("potts-conditionals", f"derived conditionals deviate from closed form by {err:.3e}")
    meta = {
        "generator": "potts",
        "graph": {"vertices": inst.n_vertices, "edges": [list(e) for e in inst.edges]},
        "q": inst.q,
        "beta": inst.beta,
        "y_states": [int(s) for s in y_states],
    }
    return AlternatingChain.from_kernels(kyx, kxy, meta=meta)


def potts_gibbs(inst):
    """Potts Gibbs measure ``exp(-beta * #bichromatic edges)`` by enumeration."""
    cols = colorings(inst.n_vertices, inst.q)
    bichrom = np.zeros(len(cols))
    for a, b in inst.edges:
        bichrom += cols[:, a] != cols[:, b]
    w = np.exp(-inst.beta * bichrom)
    return w / math.fsum(w)
