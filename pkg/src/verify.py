import itertools
import os
import random
import sys

from src.graph_core import (
    PreconditionError,
    blow_up,
    blow_up_sites,
    euler_chi,
    intersection_number,
    is_anti_nef,
    validate_graph,
)
from src.invariant_bounds import (
    ac_structure_check,
    all_modes,
    almost_cone_profile,
    lambda_exact,
)
from src.lattice_engine import (
    ccc_decompose,
    ccc_violations,
    check_minimal_model_blow_up,
    enumerate_B,
    fundamental_cycle,
    genus_invariants,
    is_chain_connected_bruteforce,
    minimal_model,
    minimal_model_bruteforce,
    minimize_chi_box,
    minimize_chi_shifted,
    sequence_to,
)

# --- Configuration ---
MAX_BOX_ENV = "SINGLATTICE_MAX_BOX"
DEFAULT_MAX_BOX = 1_000_000
LAUFER_ORDER_SEEDS = (1, 2, 3)


def max_box():
    raw = os.environ.get(MAX_BOX_ENV)
    if raw is None:
        return DEFAULT_MAX_BOX
    try:
        value = int(raw)
    except ValueError:
        value = 0
    if value < 1:
        print(f"⚠️  Ignoring {MAX_BOX_ENV}={raw!r}; using {DEFAULT_MAX_BOX}", file=sys.stderr)
        return DEFAULT_MAX_BOX
    return value


def box_side(n, limit):
    """Largest N with (N + 1)^n <= limit."""
    side = 0
    while (side + 2) ** n <= limit:
        side += 1
    return side


def _box(g, side):
    return (g.cycle(v) for v in itertools.product(range(side + 1), repeat=len(g)) if any(v))


# --- Checks (each returns a detail string; raising or a falsy result fails) ---
def check_validation(g, cycles, side):
    report = validate_graph(g)
    return report.ok, report.diagnostic or "negative definite"


def check_fundamental_cycle(g, cycles, side):
    z = fundamental_cycle(g)
    orders = {fundamental_cycle(g, rng=random.Random(seed)) for seed in LAUFER_ORDER_SEEDS}
    minimal = all(not is_anti_nef(z - g.unit(i)) for i in z.support if z.coefficients[i] >= 2)
    return is_anti_nef(z) and orders == {z} and minimal, f"Z_f = {z.coefficients}"


def check_chain_set(g, cycles, side):
    chain = enumerate_B(g)
    z = fundamental_cycle(g)
    units = all(g.unit(i) in chain for i in range(len(g)))
    reachable = all(sequence_to(g, d)[-1] == z for d in chain)
    small = [d for d in chain if max(d.coefficients) <= side]
    brute = all(is_chain_connected_bruteforce(d) for d in small)
    return z in chain and units and reachable and brute, f"|B| = {len(chain)}, {len(small)} brute-checked"


def check_genera(g, cycles, side):
    inv = genus_invariants(g)
    if side == 0:
        return inv.p_a >= inv.p_f, f"p_f = {inv.p_f}, p_a = {inv.p_a}, box oracle skipped"
    oracle = minimize_chi_box(g, None, bound=side)
    certified = minimize_chi_shifted(g, None).search_bound
    ok = oracle.value >= 1 - inv.p_a and inv.p_a >= inv.p_f
    if all(hi <= side for _, _, hi in certified):
        ok = ok and oracle.value == 1 - inv.p_a
    return ok, f"p_f = {inv.p_f}, p_a = {inv.p_a}, box minimum {oracle.value} at N = {side}"


def check_minimal_model(g, cycles, side):
    inv = genus_invariants(g)
    if inv.p_f < 1:
        return True, "rational fundamental cycle, skipped"
    mc = minimal_model(inv.z_f)
    return mc == minimal_model_bruteforce(inv.z_f), f"mc(Z_f) = {mc.coefficients}"


def check_ccc(g, cycles, side):
    targets = [c for c in cycles.values() if c.is_positive()] + [fundamental_cycle(g) * 2]
    for c in targets:
        dec = ccc_decompose(c)
        if ccc_violations(c, dec.parts) or dec.total() != c:
            return False, f"CCC of {c.coefficients} failed"
    return True, f"{len(targets)} cycles decomposed"


def check_conditions(g, cycles, side):
    checked = 0
    for c in cycles.values():
        if all(x == 0 for x in g.pairings(c.coefficients)):
            continue
        verdicts = all_modes(g, c)
        checked += 1
        nef = all(x >= 0 for x in g.pairings(c.coefficients))
        if verdicts["exact"].holds and nef:
            orth = {i for i, x in enumerate(g.pairings(c.coefficients)) if x == 0}
            for d in _box(g, side):
                if set(d.support) <= orth:
                    continue
                if intersection_number(c, d) <= -2 * euler_chi(d):
                    return False, f"{d.coefficients} breaks the extended inequality"
    return True, f"{checked} cycles checked in every mode"


def check_lambda(g, cycles, side):
    z = fundamental_cycle(g)
    lam = lambda_exact(g, z)
    d = lam.c1 + lam.c2
    attained = (-2 * euler_chi(d)) // -intersection_number(z, d) == lam.value
    return attained, f"lambda(Z_f) = {lam.value}"


def check_blow_ups(g, cycles, side):
    inv = genus_invariants(g)
    profile = almost_cone_profile(g)
    z = inv.z_f
    for site in blow_up_sites(g):
        blow = blow_up(g, site)
        h = blow.graph
        other = genus_invariants(h)
        if (other.p_f, other.p_a) != (inv.p_f, inv.p_a):
            return False, f"genera change at {site}"
        if fundamental_cycle(h) != blow.total_transform(z) or euler_chi(blow.total_transform(z)) != euler_chi(z):
            return False, f"Z_f is not preserved at {site}"
        moved = almost_cone_profile(h)
        if bool(moved) != bool(profile) or (profile and (moved.genus_g, moved.degree_d) != (profile.genus_g, profile.degree_d)):
            return False, f"almost cone status changes at {site}"
        if inv.p_f >= 1 and check_minimal_model_blow_up(z, blow) is False:
            return False, f"minimal model does not transform at {site}"
    return True, f"{len(blow_up_sites(g))} sites"


def check_almost_cone(g, cycles, side):
    profile = almost_cone_profile(g)
    if not profile:
        return True, f"not almost cone ({profile.reason})"
    problems = ac_structure_check(g)
    return not problems, "; ".join(problems) or f"central {profile.central}, degree {profile.degree_d}"


CHECKS = [
    ("negative definite", check_validation),
    ("fundamental cycle", check_fundamental_cycle),
    ("chain-connected set", check_chain_set),
    ("genera", check_genera),
    ("minimal model", check_minimal_model),
    ("CCC decomposition", check_ccc),
    ("vanishing conditions", check_conditions),
    ("lambda", check_lambda),
    ("blow-up invariance", check_blow_ups),
    ("almost cone structure", check_almost_cone),
]


def verify_graph(g, cycles, limit=None):
    """
    Runs every invariant check against one graph. Oracle boxes are capped at
    `limit` lattice points. Returns (all passed, [(check, ok, detail)]).
    """
    side = box_side(len(g), limit or max_box())
    print(f"🔍 Verifying {g.name or 'graph'} ({len(g)} vertices, oracle box side {side})...\n")
    results = []
    for name, check in CHECKS:
        try:
            ok, detail = check(g, cycles, side)
        except PreconditionError as e:
            ok, detail = False, str(e)
        results.append((name, bool(ok), detail))
        print(f"{'✅ PASS' if ok else '❌ FAIL'}: {name} ({detail})")

    passed = all(ok for _, ok, _ in results)
    if passed:
        print("\n🎉 SUCCESS: every invariant holds!")
    else:
        print("\n⚠️  WARNING: some invariants failed.")
    return passed, results
