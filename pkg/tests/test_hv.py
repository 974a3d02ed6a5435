import itertools
import math

import numpy as np
import pytest

from ctxbell.chsh import chsh_all_variants
from ctxbell.circle import TWO_PI, Density, EventRegion
from ctxbell.hv import (
    VERTICES,
    JointDistribution16,
    averages,
    bell_locality_check,
    chsh_theorem_check,
    conditional_density,
    context_tables_from_correlations,
    context_tables_from_table,
    marginal,
    ontic_conditional,
    polytope_membership,
    total_probability_check,
)
from ctxbell.local_model import ModelConfig, context_density, joint_prob
from ctxbell.table import Setting, Table, ValidationError

A, AP, B, BP = Setting.A, Setting.A_PRIME, Setting.B, Setting.B_PRIME
CONTEXTS = [(A, B), (A, BP), (AP, B), (AP, BP)]
SLOT = {A: 0, AP: 1, B: 2, BP: 3}


def brute_marginal(weights, fixed):
    total = 0.0
    for vertex, w in zip(itertools.product((1, -1), repeat=4), weights):
        if all(vertex[SLOT[s]] == v for s, v in fixed.items()):
            total += w
    return total


def test_marginals():
    assert marginal(JointDistribution16.uniform(), {A: 1}) == pytest.approx(0.5)
    d = JointDistribution16.point_mass((1, 1, 1, 1))
    assert marginal(d, {A: 1, B: 1}) == 1.0
    w = np.array([1 / 8 if v[0] == 1 else 0.0 for v in VERTICES])
    assert marginal(JointDistribution16(w), {A: 1}) == brute_marginal(w, {A: 1}) == 1.0


def test_marginals_against_brute_force():
    rng = np.random.default_rng(11)
    for _ in range(20):
        d = JointDistribution16.random(rng)
        for s1, s2 in CONTEXTS:
            for j, k in itertools.product((1, -1), repeat=2):
                assert marginal(d, {s1: j, s2: k}) == pytest.approx(
                    brute_marginal(d.weights, {s1: j, s2: k}), abs=1e-15)


def test_averages():
    quad, singles = averages(JointDistribution16.point_mass((1, 1, 1, 1)))
    assert quad.values() == (1.0, 1.0, 1.0, 1.0)
    assert all(v == 1.0 for v in singles.values())
    assert chsh_theorem_check(JointDistribution16.point_mass((1, 1, 1, 1))) == 2.0
    quad, _ = averages(JointDistribution16.uniform())
    assert quad.values() == (0.0, 0.0, 0.0, 0.0)
    assert chsh_theorem_check(JointDistribution16.uniform()) == 0.0
    mix = JointDistribution16({(1, 1, -1, -1): 0.5, (-1, -1, 1, 1): 0.5})
    assert averages(mix)[0].ab == -1.0


def test_vertices_give_two():
    # A(B + B') + A'(B' - B): one bracket is 0, the other +-2
    for v in VERTICES:
        d = JointDistribution16.point_mass(v)
        assert chsh_theorem_check(d) == 2.0
        assert {abs(x) for x in chsh_all_variants(averages(d)[0])} == {2.0}


def test_distribution_validation():
    with pytest.raises(ValidationError):
        JointDistribution16(np.full(16, 0.1))
    with pytest.raises(ValidationError):
        JointDistribution16(np.r_[-0.1, 1.1, np.zeros(14)])
    with pytest.raises(ValidationError):
        JointDistribution16(np.ones(4) / 4)


def basis_oracle(tables):
    """Exhaustive vertex-basis search: any nonnegative solution on <= 9 vertices."""
    rows, rhs = [], []
    for c, c2 in CONTEXTS:
        for j, k in itertools.product((1, -1), repeat=2):
            rows.append([float(v[SLOT[c]] == j and v[SLOT[c2]] == k) for v in VERTICES])
            rhs.append(tables[(c, c2)][(j, k)])
    a, b = np.array(rows), np.array(rhs)
    for subset in itertools.combinations(range(16), 9):
        cols = list(subset)
        w, *_ = np.linalg.lstsq(a[:, cols], b, rcond=None)
        if (w >= -1e-12).all() and np.abs(a[:, cols] @ w - b).max() < 1e-9:
            return True
    return False


def singlet_tables(a, ap, b, bp):
    cfg = ModelConfig.from_degrees(a=a, a_prime=ap, b=b, b_prime=bp)
    return {
        (c, c2): {(j, k): joint_prob(cfg, c, j, c2, k) for j in (1, -1) for k in (1, -1)}
        for c, c2 in CONTEXTS
    }


def test_polytope_singlet_infeasible():
    tables = singlet_tables(0, 90, 45, 135)
    result = polytope_membership(tables)
    assert not result.feasible
    assert result.certificate[1] == pytest.approx(2 * math.sqrt(2), abs=1e-12)
    assert not basis_oracle(tables)


def test_polytope_complete_table_feasible():
    rng = np.random.default_rng(5)
    t = Table(rng.choice([1, -1], size=(20, 4)))
    tables = context_tables_from_table(t)
    result = polytope_membership(tables)
    assert result.feasible and result.certificate is None
    for c, c2 in CONTEXTS:
        for (j, k), p in tables[(c, c2)].items():
            assert abs(marginal(result.witness, {c: j, c2: k}) - p) < 1e-9
    assert basis_oracle(tables)


def test_polytope_algebraic_maximum():
    tables = context_tables_from_correlations({("A", "B"): 1, ("A", "B'"): 1, ("A'", "B"): -1, ("A'", "B'"): 1})
    result = polytope_membership(tables)
    assert not result.feasible
    assert result.certificate[1] == pytest.approx(4.0)


def test_polytope_signalling_certificate():
    tables = context_tables_from_correlations({("A", "B"): 0, ("A", "B'"): 0, ("A'", "B"): 0, ("A'", "B'"): 0})
    tables[(A, BP)] = {(1, 1): 0.5, (1, -1): 0.3, (-1, 1): 0.1, (-1, -1): 0.1}
    result = polytope_membership(tables)
    assert not result.feasible
    assert result.certificate[0].startswith("no-signalling")


def test_polytope_matches_chsh_criterion_on_random_correlations():
    rng = np.random.default_rng(8)
    for _ in range(60):
        e = rng.uniform(-1, 1, size=4)
        tables = context_tables_from_correlations(dict(zip(CONTEXTS, e)))
        result = polytope_membership(tables)
        best = max(abs(e[0] + e[1] + e[2] + e[3] - 2 * x) for x in e)
        if best < 2 - 1e-6:
            assert result.feasible
        elif best > 2 + 1e-6:
            assert not result.feasible and result.certificate[1] == pytest.approx(best)


@pytest.mark.parametrize("bad", [
    {},
    {(A, B): {(1, 1): 1.0}},
    {(A, AP): {(1, 1): 1.0, (1, -1): 0, (-1, 1): 0, (-1, -1): 0}},
])
def test_polytope_malformed(bad):
    with pytest.raises(ValidationError):
        polytope_membership(bad)


def test_polytope_json_shape():
    out = polytope_membership(singlet_tables(0, 90, 45, 135)).to_json()
    assert set(out) == {"feasible", "witness", "certificate"}
    assert out["witness"] is None and set(out["certificate"]) == {"variant", "value"}


# ------------------------------------------------------------ conditioning

def uniform_density():
    return Density(lambda lam: 1.0 / TWO_PI, EventRegion.full(), (), 1.0)


def test_conditional_uniform_half():
    cond = conditional_density(uniform_density(), EventRegion.arc(0.0, math.pi))
    assert cond(1.0) == pytest.approx(1 / math.pi)
    assert cond(4.0) == 0.0
    assert cond.integrate() == pytest.approx(1.0, abs=1e-10)


def test_conditional_full_support_identity():
    rho = context_density(0.7)
    cond = conditional_density(rho, EventRegion.full())
    for lam in np.linspace(0, TWO_PI, 13):
        assert cond(lam) == pytest.approx(rho(lam) / rho.total_mass, abs=1e-10)


def test_conditional_on_plus_arc():
    rho = context_density(0.0)
    cond = conditional_density(rho, EventRegion.arc(-math.pi / 2, math.pi / 2))
    for lam in np.linspace(-1.5, 1.5, 11):
        assert cond(lam) == pytest.approx(math.cos(lam) / 2, abs=1e-10)
    assert cond.integrate() == pytest.approx(1.0, abs=1e-10)


def test_conditional_null_event():
    rho = Density(lambda lam: 1.0, EventRegion.arc(0.0, 1.0), (), 1.0)
    with pytest.raises(ValueError, match="null event"):
        conditional_density(rho, EventRegion.arc(2.0, 3.0))


def test_conditioning_composes():
    rng = np.random.default_rng(2)
    rho = context_density(1.1)
    for _ in range(10):
        s1, s2 = rng.uniform(0, TWO_PI, 2)
        b1 = EventRegion.arc(s1, s1 + rng.uniform(1.0, 5.0))
        b2 = EventRegion.arc(s2, s2 + rng.uniform(1.0, 5.0))
        if rho.integrate(b1 & b2) < 1e-6:
            continue
        twice = conditional_density(conditional_density(rho, b1), b2)
        once = conditional_density(rho, b1 & b2)
        for lam in rng.uniform(0, TWO_PI, 50):
            assert twice(lam) == pytest.approx(once(lam), rel=1e-9, abs=1e-12)


def test_ontic_conditional():
    half = EventRegion.arc(0.0, math.pi)
    assert ontic_conditional(half, 1.0) == 1
    assert ontic_conditional(half, 4.0) == 0
    assert ontic_conditional(EventRegion.arc(2.0, 3.0), 2.0) == 1


def test_total_probability_examples():
    lhs, rhs = total_probability_check(uniform_density(), EventRegion.arc(0.0, math.pi))
    assert lhs == pytest.approx(0.5, abs=1e-9) and rhs == pytest.approx(0.5, abs=1e-9)
    rho = context_density(0.0)
    lhs, rhs = total_probability_check(rho, EventRegion.arc(-math.pi / 2, math.pi / 2))
    assert lhs == pytest.approx(0.5, abs=1e-9) and rhs == pytest.approx(0.5, abs=1e-9)


def test_total_probability_on_joint_outcome_arc():
    # left plus arc of A at 0 meets the right plus arc of B at pi/2:
    # [-pi/2, pi/2) & [pi, 2pi) = [3pi/2, 2pi), where cos/4 integrates to 1/4
    rho = context_density(0.0)
    region = EventRegion.arc(-math.pi / 2, math.pi / 2) & EventRegion.arc(math.pi, TWO_PI)
    lhs, rhs = total_probability_check(rho, region)
    assert abs(lhs - rhs) < 1e-9
    assert lhs == pytest.approx(0.25, abs=1e-9)
    cfg = ModelConfig.from_degrees(a=0, b=90)
    assert joint_prob(cfg, A, 1, B, 1) == pytest.approx(lhs, abs=1e-9)


def test_bell_locality_examples():
    a = EventRegion.arc(0.0, 2.0)
    b = EventRegion.arc(1.0, 3.0)
    assert bell_locality_check(a, b, 1.5)
    assert bell_locality_check(a, b, 0.5)
    assert bell_locality_check(a, b, 5.0)
