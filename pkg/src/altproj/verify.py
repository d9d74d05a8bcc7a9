"""Numerical certificates for the projection and duality properties of a chain.

Every check records its worst violation against a tolerance; a report passes
when every check does.  Failures are data, never exceptions.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .divergences import bregman_dual, rkl
from .dynamics import ChainState, check_ergodic, half_step, primal_kernel, run
from .exceptions import AltProjError
from .measures import check_disintegration, marginal, normalized
from .projections import (
    affine_residual,
    affine_subspace,
    log_denormalize,
    oracle_project,
    project,
)

ORACLE_AGREEMENT_TOL = 1e-6
AFFINE_TOL = 1e-10
DUAL_FORM_TOL = 1e-8
PYTHAGOREAN_RTOL = 1e-10
SLACK_TOL = 1e-12
PRECHECK_TOL = 1e-10
DUAL_FORM_SAMPLES = 100


@dataclass(frozen=True)
class Check:
    name: str
    max_violation: float
    tolerance: float

    @property
    def passed(self):
        return bool(self.max_violation <= self.tolerance)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<32} max_violation={self.max_violation:.3e}  tol={self.tolerance:.1e}"


@dataclass(frozen=True)
class TraceRow:
    t: int
    d_joint: float
    d_mu: float
    d_nu: float
    progress: float


@dataclass
class DivergenceTrace:
    """Divergences to the ES measure along a run.

    ``progress`` at ``t`` is ``rkl(pi_t, pi_{t-1})``; at ``t = 0`` it is 0.
    """

    rows: list = field(default_factory=list)
    burn_in: int = 0

    HEADER = ("t", "d_joint", "d_mu", "d_nu", "progress")

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def to_csv(self, extra=None):
        """CSV text; floats use 17 significant digits and ``inf`` literally.

        ``extra`` maps additional column names to per-row values.
        """
        extra = extra or {}
        out = io.StringIO()
        out.write(",".join(self.HEADER + tuple(extra)) + "\n")
        for i, r in enumerate(self.rows):
            cells = [str(r.t)] + [_fmt(getattr(r, n)) for n in self.HEADER[1:]]
            cells += [_fmt(col[i]) for col in extra.values()]
            out.write(",".join(cells) + "\n")
        return out.getvalue()


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(v)
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return format(float(v), ".17g")


@dataclass
class VerificationReport:
    checks: list = field(default_factory=list)
    trace: DivergenceTrace | None = None

    @property
    def passed(self):
        return all(c.passed for c in self.checks)

    def add(self, name, violation, tol):
        # + 0.0 turns a negative zero into a plain zero
        self.checks.append(Check(name, float(violation) + 0.0, float(tol)))

    def extend(self, other):
        self.checks.extend(other.checks)
        if other.trace is not None:
            self.trace = other.trace

    def lines(self):
        return [c.line() for c in self.checks]

    def to_dict(self):
        return {
            "passed": self.passed,
            "checks": [
                {
                    "name": c.name,
                    "max_violation": c.max_violation if math.isfinite(c.max_violation) else "inf",
                    "tolerance": c.tolerance,
                    "pass": c.passed,
                }
                for c in self.checks
            ],
        }


def precheck(chain, tol=PRECHECK_TOL):
    """Consistency of the stored ES measure with the chain's kernels."""
    rep = VerificationReport()
    rep.add("precheck.disintegration_y|x", check_disintegration(chain.es, chain.kernel_y_given_x), tol)
    rep.add("precheck.disintegration_x|y", check_disintegration(chain.es, chain.kernel_x_given_y), tol)
    erg = check_ergodic(primal_kernel(chain))
    rep.add("precheck.primal_ergodic", 0.0 if erg.ergodic else 1.0, 0.0)
    return rep


def random_full_support(support, rng):
    w = np.where(support.mask, rng.uniform(0.05, 1.0, size=support.shape), 0.0)
    return normalized(w, support)


def verify_projection_theorem(chain, trials=20, seed=0, oracle_tol=ORACLE_AGREEMENT_TOL):
    """Half-steps are reverse-KL projections, checked from random full-support starts.

    For each start and each parity: the half-step equals the closed-form
    projection, agrees with the numerical oracle, lands in the affine
    log-subspace, and beats random points of that subspace in the dual
    Bregman divergence.
    """
    rep = precheck(chain)
    rng = np.random.default_rng(seed)
    kernels = (chain.kernel_y_given_x, chain.kernel_x_given_y)
    subs = tuple(affine_subspace(k) for k in kernels)
    exact = oracle = affine = dual = 0.0
    for _ in range(trials):
        pi = random_full_support(chain.support, rng)
        l_pi = log_denormalize(pi)
        for parity, (kernel, sub) in enumerate(zip(kernels, subs)):
            stepped = half_step(ChainState(parity, pi), chain).pi
            proj = project(pi, kernel)
            exact = max(exact, np.abs(stepped.weights - proj.weights).max())
            try:
                orc = oracle_project(pi, kernel)
                oracle = max(oracle, np.abs(stepped.weights - orc.weights).max())
            except AltProjError:
                oracle = math.inf
            l_step = log_denormalize(stepped)
            affine = max(affine, affine_residual(l_step, sub))
            best = bregman_dual(l_step, l_pi)
            coeffs = rng.normal(scale=2.0, size=(DUAL_FORM_SAMPLES, sub.dim))
            for c in coeffs:
                dual = max(dual, best - bregman_dual(sub.point(c), l_pi))
    rep.add("projection.half_step_equals_closed_form", exact, 0.0)
    rep.add("projection.oracle_agreement", oracle, oracle_tol)
    rep.add("projection.affine_membership", affine, AFFINE_TOL)
    rep.add("projection.dual_form_minimality", max(dual, 0.0), DUAL_FORM_TOL)
    return rep


def emit_trace(chain, pi0, steps):
    """Trace of joint and marginal divergences to the ES measure along a run."""
    return trace_run(chain, pi0, steps)[0]


def trace_run(chain, pi0, steps):
    """``(trace, states)`` for a run of ``steps`` half-steps."""
    states = run(chain, pi0, steps)
    mu_es, nu_es = marginal(chain.es, "x"), marginal(chain.es, "y")
    rows = []
    prev = None
    for s in states:
        rows.append(
            TraceRow(
                s.t,
                rkl(chain.es, s.pi),
                rkl(mu_es, marginal(s.pi, "x")),
                rkl(nu_es, marginal(s.pi, "y")),
                0.0 if prev is None else rkl(s.pi, prev),
            )
        )
        prev = s.pi
    return DivergenceTrace(rows, chain.burn_in), states


def pythagorean_residuals(trace, states, es):
    """Per-step relative residuals of the three-term identity, for ``t`` past burn-in.

    Returns a dict ``t -> (probability-side residual, log-side residual)``.
    """
    l_es = log_denormalize(es)
    out = {}
    rows = trace.rows
    for t in range(trace.burn_in, len(rows) - 1):
        a, b = rows[t], rows[t + 1]
        scale = max(1.0, a.d_joint)
        r_prob = abs(a.d_joint - b.d_joint - b.progress) / scale
        l_t, l_next = log_denormalize(states[t].pi), log_denormalize(states[t + 1].pi)
        lhs = bregman_dual(l_es, l_t)
        r_log = abs(lhs - bregman_dual(l_es, l_next) - bregman_dual(l_next, l_t)) / max(1.0, lhs)
        out[t] = (r_prob, r_log)
    return out


def verify_pythagorean(chain, pi0, steps=100, rtol=PYTHAGOREAN_RTOL):
    """Three-term identity at every half-step past burn-in, in both parametrizations."""
    rep = VerificationReport()
    trace, states = trace_run(chain, pi0, steps)
    res = pythagorean_residuals(trace, states, chain.es)
    rep.add("pythagorean.identity", max((r[0] for r in res.values()), default=0.0), rtol)
    rep.add("pythagorean.bregman_equality", max((r[1] for r in res.values()), default=0.0), rtol)
    d = trace.column("d_joint")[chain.burn_in:]
    rise = np.max(np.diff(d), initial=0.0) if d.size > 1 else 0.0
    rep.add("pythagorean.monotone_joint", max(rise, 0.0), SLACK_TOL)
    rep.trace = trace
    return rep


def duality_slacks(trace):
    """For even ``t`` past burn-in, the four slacks of the primal/dual chain.

    ``d_mu(t) >= d_mu(t+1) >= d_nu(t+1) >= d_nu(t+2) >= d_mu(t+2)``.
    """
    rows = trace.rows
    start = trace.burn_in + (trace.burn_in % 2)
    out = {}
    for t in range(start, len(rows) - 2, 2):
        a, b, c = rows[t], rows[t + 1], rows[t + 2]
        out[t] = (a.d_mu - b.d_mu, b.d_mu - b.d_nu, b.d_nu - c.d_nu, c.d_nu - c.d_mu)
    return out


def verify_duality_chain(chain, pi0, steps=100, slack_tol=SLACK_TOL):
    """Primal/dual entropy-decay chain plus data processing and monotonicity."""
    rep = VerificationReport()
    trace = emit_trace(chain, pi0, steps)
    slacks = duality_slacks(trace)
    names = ("mu_t>=mu_t+1", "mu_t+1>=nu_t+1", "nu_t+1>=nu_t+2", "nu_t+2>=mu_t+2")
    for i, name in enumerate(names):
        worst = max((-s[i] for s in slacks.values()), default=0.0)
        rep.add(f"duality.{name}", max(worst, 0.0), slack_tol)
    dp = max(
        max(r.d_mu - r.d_joint, r.d_nu - r.d_joint) for r in trace.rows
    )
    rep.add("duality.data_processing", max(dp, 0.0), slack_tol)
    d = trace.column("d_joint")[chain.burn_in:]
    rise = np.max(np.diff(d), initial=0.0) if d.size > 1 else 0.0
    rep.add("duality.monotone_joint", max(rise, 0.0), slack_tol)
    rep.trace = trace
    return rep


def verify_all(chain, pi0, steps=100, trials=20, seed=0):
    rep = verify_projection_theorem(chain, trials=trials, seed=seed)
    rep.extend(verify_pythagorean(chain, pi0, steps))
    rep.extend(verify_duality_chain(chain, pi0, steps))
    return rep
