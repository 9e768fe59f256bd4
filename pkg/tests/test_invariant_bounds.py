import itertools

import pytest
from hypothesis import given, settings, strategies as st

from conftest import RANDOM_GRAPHS, hypersurface, ell_chain, single
from src.corpus import CORPUS
from src.graph_core import (
    InvariantViolation,
    PreconditionError,
    blow_up,
    blow_up_sites,
    euler_chi,
    intersection_number,
    is_anti_nef_on,
    parse_graph,
)
from src.invariant_bounds import (
    ac_bound,
    ac_structure_check,
    all_modes,
    almost_cone_profile,
    br_bound_report,
    chi_l,
    connecting_cycle_W,
    elliptic_sequence,
    elliptic_sum,
    lambda_exact,
    restricted_B,
    vanishing_condition,
    zariski_formula,
)
from src.lattice_engine import fundamental_cycle, genus_invariants


# --- Restricted chain sets ---
def test_restricted_B_examples(chain3, b346):
    assert set(restricted_B(chain3, -chain3.reduced()).vectors) == {(0, 0, 1), (0, 1, 1), (1, 1, 1)}
    g = single(-2)
    assert restricted_B(g, -g.unit("E")).vectors == ((1,),)
    z = fundamental_cycle(b346)
    members = restricted_B(b346, -z)
    assert len(members) > 0
    assert all(c["F0"] > 0 for c in members)


def test_restricted_B_rejects_trivial(b346):
    with pytest.raises(PreconditionError):
        restricted_B(b346, b346.zero())


# --- Vanishing conditions ---
def test_condition_single_vertex_genus_three():
    g = single(-4, 3)
    verdict = vanishing_condition(g, -g.unit("E"), "exact")
    assert not verdict.holds
    assert verdict.margin == 0
    assert verdict.witness == g.unit("E")
    assert vanishing_condition(g, -2 * g.unit("E"), "exact").holds


@pytest.mark.parametrize("mode", ["rohr", "exact", "remark1", "remark2"])
def test_condition_rational_vertex(mode):
    g = single(-2)
    verdict = vanishing_condition(g, -g.unit("E"), mode)
    assert verdict.holds
    assert verdict.witness is None


def test_condition_chain_exact_margin(chain3):
    verdict = vanishing_condition(chain3, -chain3.reduced(), "exact")
    assert verdict.holds
    assert verdict.margin == 1
    assert verdict.chi_l == 0
    assert chi_l(-chain3.reduced()) == 0


def test_condition_rejects_unknown_mode(chain3):
    with pytest.raises(PreconditionError):
        vanishing_condition(chain3, -chain3.reduced(), "loose")


@settings(max_examples=80, deadline=None)
@given(st.data())
def test_modes_are_monotone(data):
    g = data.draw(st.sampled_from(RANDOM_GRAPHS))
    z = fundamental_cycle(g)
    scale = data.draw(st.integers(1, 3))
    verdicts = all_modes(g, -scale * z)
    assert verdicts["remark2"].margin <= verdicts["remark1"].margin <= verdicts["exact"].margin


@pytest.mark.parametrize("g", RANDOM_GRAPHS[:80])
def test_exact_condition_extends_to_positive_cycles(g):
    l = -fundamental_cycle(g)
    if not vanishing_condition(g, l, "exact").holds:
        return
    orth = {i for i, x in enumerate(g.pairings(l.coefficients)) if x == 0}
    side = 2 if len(g) <= 5 else 1
    for vec in itertools.product(range(side + 1), repeat=len(g)):
        d = g.cycle(vec)
        if d.is_zero() or set(d.support) <= orth:
            continue
        assert intersection_number(l, d) > -2 * euler_chi(d)


# --- lambda ---
@pytest.mark.parametrize("d", [4, 5, 6, 7, 8])
def test_lambda_on_hypersurfaces(d):
    g = hypersurface(d)
    lam = lambda_exact(g, g.unit("E"))
    assert lam.value == d - 3
    assert lam.all_degrees_at_least_two


def test_lambda_rational_and_b346(b346):
    g = single(-2)
    assert lambda_exact(g, g.unit("E")).value == -1
    lam = lambda_exact(b346, fundamental_cycle(b346))
    assert lam.value == 1
    assert lam.c1 == fundamental_cycle(b346)
    assert lam.c2.is_zero()


def test_lambda_rejects_bad_ideal(b346):
    with pytest.raises(PreconditionError):
        lambda_exact(b346, b346.reduced())
    with pytest.raises(PreconditionError):
        lambda_exact(b346, b346.zero())


@pytest.mark.parametrize("g", RANDOM_GRAPHS[:60])
def test_lambda_dominates_box_extensions(g):
    z = fundamental_cycle(g)
    lam = lambda_exact(g, z)
    orth = [i for i, x in enumerate(g.pairings(z.coefficients)) if x == 0]
    for c1 in restricted_B(g, z):
        admissible = [i for i in orth if g.pair_vertex(c1.coefficients, i) <= 0]
        for coeffs in itertools.product(range(3), repeat=len(admissible)):
            vec = list(c1.coefficients)
            for i, a in zip(admissible, coeffs):
                vec[i] += a
            d = g.cycle(vec)
            assert (-2 * euler_chi(d)) // -intersection_number(z, d) <= lam.value
    d = lam.c1 + lam.c2
    assert (-2 * euler_chi(d)) // -intersection_number(z, d) == lam.value


# --- Almost cone ---
@pytest.mark.parametrize("d", [3, 4, 5, 6])
def test_hypersurface_is_almost_cone(d):
    profile = almost_cone_profile(hypersurface(d))
    assert profile
    assert (profile.central, profile.degree_d, profile.delta) == ("E", d, max(2, d))


def test_elliptic_chain_is_not_almost_cone():
    for p in (1, 2):
        profile = almost_cone_profile(ell_chain(p, 3))
        assert not profile
        assert "Z_f.E1 = 0" in profile.reason


@pytest.mark.parametrize("p", [1, 2, 3])
def test_lone_elliptic_curve_is_almost_cone(p):
    profile = almost_cone_profile(ell_chain(p, 1))
    assert (profile.central, profile.genus_g, profile.degree_d) == ("E1", p, 1)


def test_star_is_almost_cone(star_ell):
    g, _ = star_ell
    profile = almost_cone_profile(g)
    assert (profile.central, profile.genus_g, profile.degree_d, profile.delta) == ("C", 1, 1, 2)
    assert ac_structure_check(g) == []


def test_singular_central_curve_is_excluded():
    g, _ = parse_graph("v E sq=-3 g=1 sing")
    assert "singular" in almost_cone_profile(g).reason


@pytest.mark.parametrize("entry", CORPUS, ids=lambda e: e.name)
def test_corpus_invariants_survive_every_blow_up(entry):
    g, cycles = entry.load()
    inv = genus_invariants(g)
    profile = almost_cone_profile(g)
    for site in blow_up_sites(g):
        blow = blow_up(g, site)
        other = genus_invariants(blow.graph)
        assert (other.p_f, other.p_a) == (inv.p_f, inv.p_a), site
        assert other.z_f == blow.total_transform(inv.z_f)
        for c in (inv.z_f, *cycles.values()):
            assert euler_chi(blow.total_transform(c)) == euler_chi(c)
        moved = almost_cone_profile(blow.graph)
        assert bool(moved) == bool(profile), site
        if profile:
            assert (moved.genus_g, moved.degree_d) == (profile.genus_g, profile.degree_d)


def test_ac_bound_cases(star_ell):
    g = hypersurface(4)
    assert ac_bound(g).bound == genus_invariants(g).p_f + 1
    g5 = hypersurface(5)
    case = ac_bound(g5, g5.unit("E"), gonality_lower=4)
    assert (case.bound, case.case) == (4, "ZC_negative")
    star, cycles = star_ell
    case = ac_bound(star, cycles["z"])
    assert (case.bound, case.case) == (2, "ZC_zero")


def test_ac_bound_preconditions(b346):
    with pytest.raises(PreconditionError):
        ac_bound(b346)
    with pytest.raises(PreconditionError):
        ac_bound(hypersurface(4), gonality_lower=1)


# --- Elliptic sequences ---
def test_elliptic_sequence_chain():
    seq = elliptic_sequence(ell_chain(1, 3))
    assert [z.coefficients for z in seq] == [(1, 1, 1), (1, 1, 0), (1, 0, 0)]
    total = elliptic_sum(seq)
    assert total.coefficients == (3, 2, 1)


def test_elliptic_sequence_m4():
    seq = elliptic_sequence(ell_chain(1, 4))
    assert len(seq) == 4
    assert [z.coefficients for z in seq][-1] == (1, 0, 0, 0)
    for z in seq:
        assert euler_chi(z) == 0
        assert is_anti_nef_on(z, sorted(z.support_ids))
        assert z["E1"] == 1


def test_elliptic_sequence_single_vertex():
    g = single(-1, 1)
    assert [z.coefficients for z in elliptic_sequence(g)] == [(1,)]


def test_elliptic_sequence_requires_chi_zero(b346):
    with pytest.raises(PreconditionError):
        elliptic_sequence(b346)


# --- Connecting cycle ---
def test_connecting_cycle_star(star_ac):
    g, cycles = star_ac
    w = connecting_cycle_W(g, cycles["z"])
    assert w == g.unit("C")
    assert intersection_number(w, g.unit("C")) == -2
    assert connecting_cycle_W(g, 2 * cycles["z"]) == w
    assert connecting_cycle_W(g, cycles["z"], b=["C"]) == w


def test_connecting_cycle_needs_orthogonal_block(b346):
    with pytest.raises(PreconditionError) as info:
        connecting_cycle_W(b346, fundamental_cycle(b346))
    assert "z-orthogonal" in str(info.value)


# --- Zariski formula ---
def test_zariski_formula():
    assert zariski_formula(2, 9) == 4
    assert zariski_formula(2, 2) == 1
    assert zariski_formula(3, 4) == 2
    with pytest.raises(PreconditionError):
        zariski_formula(3, 2)
    with pytest.raises(PreconditionError):
        zariski_formula(1, 5)


# --- Bound reports ---
def test_bound_report_hypersurface_quintic():
    g = hypersurface(5)
    report = br_bound_report(g, g.unit("E"), gonality_lower=4)
    assert {e.label: e.value for e in report.bounds} == {
        "pa_plus_one": 7, "lambda_plus_two": 4, "ac_gonality": 4
    }
    assert report.best == 4


def test_bound_report_b346(b346):
    report = br_bound_report(b346, fundamental_cycle(b346), pg=3)
    assert {e.label: e.value for e in report.bounds} == {
        "pa_plus_one": 3, "lambda_plus_two": 3, "pg_plus_one": 4
    }
    assert report.best == 3
    assert report.global_best == 3


def test_bound_report_rational():
    g = single(-2)
    report = br_bound_report(g, g.unit("E"))
    assert report.best == 1
    assert report.value("lambda_plus_two") == 1


@pytest.mark.parametrize("d", [3, 4, 5, 6, 7, 8])
def test_bound_report_hypersurfaces(d):
    g = hypersurface(d)
    p_f = (d - 1) * (d - 2) // 2
    assert br_bound_report(g, g.unit("E"), gonality_lower=d - 1).best == d - 1
    report = br_bound_report(g, g.unit("E"), gonality_lower=2)
    assert report.global_best == p_f + 1


def test_bound_report_twin(twin):
    report = br_bound_report(twin, fundamental_cycle(twin))
    assert report.value("pa_plus_one") >= zariski_formula(2, 9)


def test_bound_report_negative_pg(b346):
    with pytest.raises(PreconditionError):
        br_bound_report(b346, fundamental_cycle(b346), pg=-1)


def test_monotonicity_violation_is_reported(monkeypatch, chain3):
    from src import invariant_bounds
    from src.invariant_bounds import ConditionVerdict

    def fake(g, l, mode):
        return ConditionVerdict(mode, mode != "exact", None, 0)

    monkeypatch.setattr(invariant_bounds, "vanishing_condition", fake)
    with pytest.raises(InvariantViolation):
        invariant_bounds.all_modes(chain3, -chain3.reduced())
