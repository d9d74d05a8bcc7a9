import dataclasses
import math
from pathlib import Path

import numpy as np
import pytest

from altproj.dynamics import AlternatingChain
from altproj.exceptions import CompatibilityViolation
from altproj.instances import PottsInstance, chain_from_joint, potts_instance, random_instance
from altproj.measures import X_GIVEN_Y, ConditionalKernel, SupportSet, dirac, uniform
from altproj.verify import (
    duality_slacks,
    emit_trace,
    precheck,
    trace_run,
    verify_all,
    verify_duality_chain,
    verify_projection_theorem,
    verify_pythagorean,
)

GOLDEN = Path(__file__).parent / "golden"
STEPS = 40


def golden_cases():
    uni = chain_from_joint(uniform(SupportSet.full(2, 2)))
    rnd = random_instance(3, 3, 1.0, 42)
    edge = potts_instance(PottsInstance(2, [(0, 1)], 2, math.log(2)))
    return {
        "uniform_2x2": (uni, dirac(uni.support, 0, 0)),
        "random_3x3_seed42": (rnd, dirac(rnd.support, 0, 0)),
        "potts_single_edge": (edge, dirac(edge.support, 0, 0)),
    }


def write_golden():
    for name, (chain, pi0) in golden_cases().items():
        (GOLDEN / f"{name}.csv").write_text(emit_trace(chain, pi0, STEPS).to_csv())


@pytest.mark.parametrize("name", sorted(golden_cases()))
def test_golden_traces(name):
    chain, pi0 = golden_cases()[name]
    assert emit_trace(chain, pi0, STEPS).to_csv() == (GOLDEN / f"{name}.csv").read_text()


def test_uniform_trace_closed_form():
    chain, pi0 = golden_cases()["uniform_2x2"]
    rows = emit_trace(chain, pi0, 3).rows
    ln2 = math.log(2)
    # Dirac -> half mass on row 0 -> uniform
    expect = [(2 * ln2, ln2, ln2, 0.0), (ln2, ln2, 0.0, ln2), (0.0, 0.0, 0.0, ln2), (0.0, 0.0, 0.0, 0.0)]
    for r, e in zip(rows, expect):
        np.testing.assert_allclose([r.d_joint, r.d_mu, r.d_nu, r.progress], e, atol=1e-15)


def test_potts_edge_trace_start():
    chain, pi0 = golden_cases()["potts_single_edge"]
    row = emit_trace(chain, pi0, 0).rows[0]
    # with p = 1/2 every allowed (coloring, subset) cell has weight 1/2 and there are
    # six of them (four on the empty subset, two monochromatic with the edge kept),
    # so pi_ES is uniform 1/6 on its support
    assert row.d_joint == pytest.approx(math.log(6), abs=1e-12)


class TestReports:
    def test_random_chains_pass(self, random_chain):
        rep = verify_all(random_chain, dirac(random_chain.support, *random_chain.support.pairs()[0]), steps=60, trials=5)
        assert rep.passed, "\n".join(rep.lines())

    def test_report_shape(self, uniform_chain):
        rep = verify_all(uniform_chain, dirac(uniform_chain.support, 0, 1), steps=10, trials=2)
        d = rep.to_dict()
        assert d["passed"] is True
        names = [c["name"] for c in d["checks"]]
        assert "projection.oracle_agreement" in names and "duality.data_processing" in names
        assert all(line.startswith("PASS") for line in rep.lines())

    def test_start_at_es(self, random_chain):
        trace = emit_trace(random_chain, random_chain.es, 8)
        for r in trace.rows:
            assert max(abs(r.d_joint), abs(r.d_mu), abs(r.d_nu), abs(r.progress)) <= 1e-14

    def test_run_of_zero_steps(self, uniform_chain):
        trace = emit_trace(uniform_chain, dirac(uniform_chain.support, 0, 0), 0)
        assert len(trace.rows) == 1 and trace.rows[0].progress == 0.0


class TestTraceProperties:
    @pytest.mark.parametrize("seed", range(5))
    def test_strictly_decreasing(self, seed):
        chain = random_instance(4, 4, 1.0, seed)
        d = emit_trace(chain, dirac(chain.support, 1, 2), 80).column("d_joint")
        for a, b in zip(d[1:], d[2:]):
            assert b < a or a <= 1e-12

    @pytest.mark.parametrize("seed", range(5))
    def test_parity_keeps_marginal(self, seed):
        chain = random_instance(4, 3, 0.7, seed)
        rows = emit_trace(chain, dirac(chain.support, *chain.support.pairs()[-1]), 30).rows
        for t in range(len(rows) - 1):
            kept = "d_mu" if t % 2 == 0 else "d_nu"
            assert getattr(rows[t + 1], kept) == pytest.approx(getattr(rows[t], kept), rel=1e-12, abs=1e-15)

    def test_duality_slacks_nonnegative(self, random_chain):
        trace = emit_trace(random_chain, uniform(random_chain.support), 50)
        slacks = duality_slacks(trace)
        assert slacks and min(min(s) for s in slacks.values()) >= -1e-12
        assert all(t % 2 == 0 and t >= trace.burn_in for t in slacks)

    def test_trace_states_align(self, uniform_chain):
        trace, states = trace_run(uniform_chain, dirac(uniform_chain.support, 1, 1), 5)
        assert [r.t for r in trace.rows] == [s.t for s in states] == list(range(6))

    def test_csv_format(self):
        chain, pi0 = golden_cases()["uniform_2x2"]
        text = emit_trace(chain, pi0, 2).to_csv({"flag": [True, False, True], "gap": [None, 1.5, math.inf]})
        lines = text.splitlines()
        assert lines[0] == "t,d_joint,d_mu,d_nu,progress,flag,gap"
        assert lines[1].endswith(",1,") and lines[3].endswith(",1,inf")
        assert float(lines[1].split(",")[1]) == 2 * math.log(2)


def _perturbed(chain, delta=0.05):
    rows = np.array(chain.kernel_x_given_y.rows)
    rows[0, 0] += delta
    rows[0, 1] -= delta
    return ConditionalKernel(X_GIVEN_Y, rows, chain.support)


class TestNegativeControls:
    @pytest.fixture
    def base(self):
        return random_instance(3, 3, 1.0, 42)

    def test_replace_fails_precheck(self, base):
        bad = dataclasses.replace(base, kernel_x_given_y=_perturbed(base))
        pre = precheck(bad)
        assert not pre.passed
        assert pre.checks[1].max_violation > 1e-3
        assert not verify_projection_theorem(bad, trials=2).passed

    def test_bare_constructor_fails_precheck(self, base):
        bad = AlternatingChain(base.kernel_y_given_x, _perturbed(base), base.es, base.burn_in)
        rep = verify_all(bad, dirac(bad.support, 0, 0), steps=20, trials=2)
        assert not rep.passed
        failed = {c.name for c in rep.checks if not c.passed}
        assert "precheck.disintegration_x|y" in failed

    def test_rebuild_raises(self, base):
        with pytest.raises(CompatibilityViolation) as info:
            AlternatingChain.from_kernels(base.kernel_y_given_x, _perturbed(base))
        assert info.value.max_violation > 1e-8
        assert info.value.invariant == "compatibility"

    def test_tight_tolerances_fail(self, base):
        pi0 = dirac(base.support, 0, 0)
        assert verify_pythagorean(base, pi0, 30, rtol=-1.0).passed is False
        assert verify_duality_chain(base, pi0, 30, slack_tol=-1.0).passed is False


if __name__ == "__main__":
    write_golden()
