import numpy as np
import pytest

from altproj.dynamics import (
    AlternatingChain,
    ChainState,
    TransitionMatrix,
    burn_in,
    check_ergodic,
    dual_kernel,
    es_from_kernels,
    half_step,
    primal_kernel,
    run,
    stationary,
)
from altproj.divergences import kl
from altproj.exceptions import CompatibilityViolation, NotErgodic
from altproj.instances import chain_from_joint, random_instance, random_joint
from altproj.measures import (
    X_GIVEN_Y,
    Y_GIVEN_X,
    ConditionalKernel,
    SupportSet,
    conditional,
    dirac,
    from_weights,
    marginal,
    uniform,
)


def numeric_burn_in(chain, horizon=60):
    """Burn-in read off the exact evolution from every Dirac start."""
    mask = chain.support.mask
    worst = 0
    for x, y in chain.support.pairs():
        states = run(chain, dirac(chain.support, x, y), horizon)
        full = [bool(((s.pi.weights > 0) == mask).all()) for s in states]
        last_bad = max((t for t, f in enumerate(full) if not f), default=-1)
        assert last_bad < horizon - 2
        worst = max(worst, last_bad + 1)
    return worst


# y|x rows overlap only in column 1, so the primal chain is strictly positive
STAIRCASE = from_weights([[0.2, 0.3, 0.0], [0.0, 0.25, 0.25]])


class TestHalfStep:
    def test_es_is_fixed_point(self, random_chain):
        for t in (0, 1):
            out = half_step(ChainState(t, random_chain.es), random_chain)
            assert np.abs(out.pi.weights - random_chain.es.weights).max() <= 1e-12
            assert out.t == t + 1

    def test_uniform_chain_from_dirac(self, uniform_chain):
        out = half_step(ChainState(0, dirac(uniform_chain.support, 0, 0)), uniform_chain)
        np.testing.assert_allclose(out.pi.weights.ravel(), [0.5, 0.5, 0.0, 0.0])

    def test_even_step_keeps_x_marginal(self, random_chain, rng):
        w = np.where(random_chain.support.mask, rng.random(random_chain.support.shape), 0)
        pi = from_weights(w / w.sum(), random_chain.support)
        out = half_step(ChainState(0, pi), random_chain).pi
        assert np.abs(marginal(out, "x").weights - marginal(pi, "x").weights).max() <= 1e-14

    def test_odd_step_keeps_y_marginal(self, random_chain, rng):
        w = np.where(random_chain.support.mask, rng.random(random_chain.support.shape), 0)
        pi = from_weights(w / w.sum(), random_chain.support)
        out = half_step(ChainState(1, pi), random_chain).pi
        assert np.abs(marginal(out, "y").weights - marginal(pi, "y").weights).max() <= 1e-14


class TestRun:
    def test_zero_steps(self, uniform_chain):
        pi0 = dirac(uniform_chain.support, 1, 0)
        states = run(uniform_chain, pi0, 0)
        assert len(states) == 1 and states[0].t == 0
        assert np.array_equal(states[0].pi.weights, pi0.weights)

    def test_stationary_start(self, random_chain):
        for s in run(random_chain, random_chain.es, 10):
            assert np.abs(s.pi.weights - random_chain.es.weights).max() <= 1e-12

    def test_divergence_decreases(self):
        chain = random_instance(3, 3, 1.0, 42)
        states = run(chain, dirac(chain.support, 0, 0), 200)
        assert kl(states[200].pi, chain.es) < kl(states[chain.burn_in].pi, chain.es)

    def test_composition_is_one_primal_step(self, random_chain):
        m = primal_kernel(random_chain).rows
        states = run(random_chain, dirac(random_chain.support, *random_chain.support.pairs()[-1]), 12)
        for t in range(0, 10, 2):
            mu_t = marginal(states[t].pi, "x").weights
            mu_next = marginal(states[t + 2].pi, "x").weights
            assert np.abs(mu_next - mu_t @ m).max() <= 1e-12


class TestKernels:
    def test_uniform_primal(self, uniform_chain):
        np.testing.assert_allclose(primal_kernel(uniform_chain).rows, np.full((2, 2), 0.5))

    def test_deterministic_matching(self):
        diag = from_weights(np.diag([0.2, 0.3, 0.5]))
        kyx, kxy = conditional(diag, Y_GIVEN_X), conditional(diag, X_GIVEN_Y)
        probe = AlternatingChain(kyx, kxy, diag, -1)
        np.testing.assert_array_equal(primal_kernel(probe).rows, np.eye(3))
        np.testing.assert_array_equal(dual_kernel(probe).rows, np.eye(3))

    def test_es_marginals_are_stationary(self, random_chain):
        mu = marginal(random_chain.es, "x").weights
        nu = marginal(random_chain.es, "y").weights
        assert np.abs(mu @ primal_kernel(random_chain).rows - mu).max() <= 1e-10
        assert np.abs(nu @ dual_kernel(random_chain).rows - nu).max() <= 1e-10

    def test_uniform_dual(self, uniform_chain):
        np.testing.assert_allclose(dual_kernel(uniform_chain).rows, np.full((2, 2), 0.5))

    def test_primal_is_reversible(self, random_chain):
        mu = marginal(random_chain.es, "x").weights
        flow = mu[:, None] * primal_kernel(random_chain).rows
        assert np.abs(flow - flow.T).max() <= 1e-10


class TestErgodicity:
    def test_positive(self):
        e = check_ergodic(TransitionMatrix("x", [[0.5, 0.5], [0.3, 0.7]]))
        assert e.irreducible and e.aperiodic

    def test_swap_has_period_two(self):
        e = check_ergodic(TransitionMatrix("x", [[0.0, 1.0], [1.0, 0.0]]))
        assert (e.irreducible, e.aperiodic, e.period) == (True, False, 2)

    def test_block_diagonal(self):
        m = np.kron(np.eye(2), np.full((2, 2), 0.5))
        assert not check_ergodic(TransitionMatrix("x", m)).irreducible

    def test_three_cycle(self):
        m = np.roll(np.eye(3), 1, axis=1)
        assert check_ergodic(m).period == 3


class TestStationary:
    def test_doubly_stochastic(self):
        m = TransitionMatrix("x", [[0.2, 0.5, 0.3], [0.5, 0.3, 0.2], [0.3, 0.2, 0.5]])
        np.testing.assert_allclose(stationary(m).weights, np.full(3, 1 / 3), atol=1e-13)

    def test_two_state_balance(self):
        m = TransitionMatrix("x", [[0.9, 0.1], [0.2, 0.8]])
        np.testing.assert_allclose(stationary(m).weights, [2 / 3, 1 / 3], atol=1e-12)

    def test_reducible_rejected(self):
        with pytest.raises(NotErgodic):
            stationary(TransitionMatrix("x", np.eye(2)))

    def test_periodic_rejected(self):
        with pytest.raises(NotErgodic):
            stationary(TransitionMatrix("x", [[0.0, 1.0], [1.0, 0.0]]))


class TestESFromKernels:
    @pytest.mark.parametrize("seed", range(5))
    def test_recovers_generating_joint(self, seed):
        pi = random_joint(4, 3, 1.0, np.random.default_rng(seed))
        es = es_from_kernels(conditional(pi, Y_GIVEN_X), conditional(pi, X_GIVEN_Y))
        assert np.abs(es.weights - pi.weights).max() <= 1e-9

    def test_uniform(self, full22):
        u = uniform(full22)
        es = es_from_kernels(conditional(u, Y_GIVEN_X), conditional(u, X_GIVEN_Y))
        np.testing.assert_allclose(es.weights, np.full((2, 2), 0.25), atol=1e-15)

    def test_incompatible_pair(self, rng):
        a = random_joint(3, 3, 1.0, rng)
        b = random_joint(3, 3, 1.0, rng)
        with pytest.raises(CompatibilityViolation) as err:
            es_from_kernels(conditional(a, Y_GIVEN_X), conditional(b, X_GIVEN_Y))
        assert err.value.max_violation > 1e-3

    def test_swap_flavored_kernels_not_ergodic(self):
        diag = SupportSet(np.eye(2, dtype=bool))
        anti = SupportSet(np.eye(2, dtype=bool)[::-1])
        kyx = ConditionalKernel(Y_GIVEN_X, np.eye(2), diag)
        kxy = ConditionalKernel(X_GIVEN_Y, np.eye(2)[::-1], anti)
        with pytest.raises(NotErgodic):
            AlternatingChain.from_kernels(kyx, kxy)


class TestBurnIn:
    def test_positive_primal_with_ragged_rows(self):
        chain = chain_from_joint(STAIRCASE)
        assert (primal_kernel(chain).rows > 0).all()
        assert burn_in(chain) == 3
        assert numeric_burn_in(chain) == 3

    def test_all_positive_conditionals(self, rng):
        for _ in range(5):
            chain = chain_from_joint(random_joint(3, 4, 1.0, rng))
            assert burn_in(chain) <= 2
            assert burn_in(chain) == numeric_burn_in(chain)

    def test_matches_exact_evolution(self, random_chain):
        assert random_chain.burn_in == numeric_burn_in(random_chain)

    def test_support_law(self, random_chain):
        mask = random_chain.support.mask
        for x, y in random_chain.support.pairs():
            states = run(random_chain, dirac(random_chain.support, x, y), random_chain.burn_in + 8)
            for s in states[random_chain.burn_in:]:
                assert ((s.pi.weights > 0) == mask).all()

    def test_cap(self):
        from altproj.exceptions import CapExceeded

        chain = chain_from_joint(STAIRCASE)
        with pytest.raises(CapExceeded):
            burn_in(chain, cap=3)
