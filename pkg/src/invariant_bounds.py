from dataclasses import dataclass, field

import networkx as nx

from src.graph_core import (
    Cycle,
    InvariantViolation,
    PreconditionError,
    euler_chi,
    intersection_number,
    is_anti_nef,
    is_anti_nef_on,
    orthogonal_indices,
)
from src.lattice_engine import (
    enumerate_B,
    fundamental_cycle,
    fundamental_vector,
    genus_invariants,
    minimal_model,
    minimize_chi_shifted,
)

# --- Configuration ---
MODES = ("rohr", "exact", "remark1", "remark2")
DEFAULT_GONALITY_LOWER = 2


# --- Result types ---
@dataclass(frozen=True)
class ConditionVerdict:
    mode: str
    holds: bool
    witness: object  # Cycle or None
    margin: int
    chi_l: int = 0


@dataclass(frozen=True)
class LambdaResult:
    value: int
    c1: object
    c2: object
    all_degrees_at_least_two: bool = False


@dataclass(frozen=True)
class AlmostConeProfile:
    central: str
    genus_g: int
    degree_d: int
    delta: int


@dataclass(frozen=True)
class NotAlmostCone:
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class ACBound:
    bound: int
    case: str  # ZC_negative | ZC_zero | global


@dataclass(frozen=True)
class BoundEntry:
    label: str
    value: int
    source: str
    witness: object = None
    note: str = ""


@dataclass(frozen=True)
class BoundReport:
    """
    best bounds br(I_z); global_best only uses bounds valid for the
    singularity itself.
    """
    bounds: tuple
    best: int
    global_best: int
    notes: tuple = field(default_factory=tuple)

    def value(self, label):
        for entry in self.bounds:
            if entry.label == label:
                return entry.value
        return None


# --- Helpers ---
def _require_nontrivial(l):
    g = l.graph
    if l.rational:
        raise PreconditionError("l must be an integer cycle")
    if all(g.pair_vertex(l.coefficients, i) == 0 for i in range(len(g))):
        raise PreconditionError("l is numerically trivial")


def _require_ideal_cycle(z):
    if z.rational or not z.is_positive():
        raise PreconditionError("z must be a positive integer cycle")
    if not is_anti_nef(z):
        raise PreconditionError("z must be anti-nef")


def _min_extension(l, c1, orth):
    """min chi(C1 + C2) over C2 >= 0 on L^perp with C1 anti-nef on C2."""
    g = l.graph
    admissible = [i for i in orth if g.pair_vertex(c1.coefficients, i) <= 0]
    best = minimize_chi_shifted(g, [g.ids[i] for i in admissible], a=c1, allow_zero=True)
    return euler_chi(c1) + best.value, best.witness


def chi_l(l):
    """min chi over positive cycles on L^perp; 0 when L^perp is empty."""
    g = l.graph
    orth = orthogonal_indices(l)
    if not orth:
        return 0
    return minimize_chi_shifted(g, [g.ids[i] for i in orth]).value


# --- Vanishing conditions ---
def restricted_B(g, l):
    _require_nontrivial(l)
    return enumerate_B(g).filter(lambda c: intersection_number(l, c) != 0)


def vanishing_condition(g, l, mode="exact"):
    if mode not in MODES:
        raise PreconditionError(f"unknown mode '{mode}' (expected one of {', '.join(MODES)})")
    _require_nontrivial(l)

    cl = chi_l(l)
    eff = min(cl, 0)
    if mode == "rohr":
        checked = [(intersection_number(l, c) + 2 * euler_chi(c), c) for c in enumerate_B(g)]
    elif mode == "exact":
        orth = orthogonal_indices(l)
        checked = []
        for c1 in restricted_B(g, l):
            low, c2 = _min_extension(l, c1, orth)
            checked.append((intersection_number(l, c1) + 2 * low, c1 + c2))
    elif mode == "remark1":
        checked = [(intersection_number(l, c) + 2 * (euler_chi(c) + eff), c) for c in restricted_B(g, l)]
    else:
        chi_zf = euler_chi(fundamental_cycle(g))
        checked = [(intersection_number(l, c) + 2 * (chi_zf + eff), c) for c in restricted_B(g, l)]

    margin, worst = min(checked, key=lambda t: t[0])
    holds = margin > 0
    return ConditionVerdict(mode, holds, None if holds else worst, margin, cl)


def all_modes(g, l):
    """Every mode's verdict; each later mode must imply the earlier ones."""
    verdicts = {mode: vanishing_condition(g, l, mode) for mode in MODES}
    chain = ("remark2", "remark1", "exact")
    for stronger, weaker in zip(chain, chain[1:]):
        if verdicts[stronger].holds and not verdicts[weaker].holds:
            raise InvariantViolation(f"{stronger} holds but {weaker} fails")
    return verdicts


# --- lambda(Z, X) ---
def lambda_exact(g, z):
    """
    max over C1 in B(Z) of floor(-2 min chi(C1 + C2) / -Z.C1); -Z.D does not
    depend on the L^perp part C2.
    """
    _require_ideal_cycle(z)
    orth = orthogonal_indices(z)
    best = None
    degrees = []
    for c1 in restricted_B(g, z):
        degree = -intersection_number(z, c1)
        degrees.append(degree)
        low, c2 = _min_extension(z, c1, orth)
        value = (-2 * low) // degree
        if best is None or value > best[0]:
            best = (value, c1, c2)

    easy = all(d >= 2 for d in degrees)
    if easy:
        pa = genus_invariants(g).p_a
        if best[0] > pa - 1:
            raise InvariantViolation(f"lambda = {best[0]} exceeds p_a - 1 = {pa - 1} with all degrees >= 2")
    return LambdaResult(best[0], best[1], best[2], easy)


# --- Almost cone singularities ---
def almost_cone_profile(g):
    inv = genus_invariants(g)
    if inv.p_f < 1:
        return NotAlmostCone("p_f = 0")
    m = minimal_model(inv.z_f)
    if len(m.support) != 1 or m.coefficients[m.support[0]] != 1:
        return NotAlmostCone("minimal model of Z_f is not a single reduced component")
    c = m.support[0]
    vertex = g.vertices[c]
    if not vertex.smooth:
        return NotAlmostCone(f"central component '{vertex.id}' is singular")
    if vertex.genus != inv.p_f:
        return NotAlmostCone(f"central genus {vertex.genus} differs from p_f = {inv.p_f}")
    zc = g.pair_vertex(inv.z_f.coefficients, c)
    if zc >= 0:
        return NotAlmostCone(f"Z_f.{vertex.id} = {zc} is not negative")
    return AlmostConeProfile(vertex.id, inv.p_f, -zc, max(2, -zc))


def _require_almost_cone(g):
    profile = almost_cone_profile(g)
    if not profile:
        raise PreconditionError(f"graph is not almost cone: {profile.reason}")
    return profile


def ac_bound(g, z=None, gonality_lower=DEFAULT_GONALITY_LOWER):
    profile = _require_almost_cone(g)
    if gonality_lower < 2:
        raise PreconditionError(f"gonality lower bound must be >= 2, got {gonality_lower}")
    numerator = 2 * profile.genus_g - 2

    if z is None:
        bound = numerator // min(gonality_lower, profile.delta) + 2
        if bound > profile.genus_g + 1:
            raise InvariantViolation(f"global bound {bound} exceeds g + 1 = {profile.genus_g + 1}")
        return ACBound(bound, "global")

    _require_ideal_cycle(z)
    zc = g.pair_vertex(z.coefficients, g.index(profile.central))
    if zc > 0:
        raise InvariantViolation(f"anti-nef z pairs {zc} with the central curve")
    if zc < 0:
        return ACBound(numerator // gonality_lower + 2, "ZC_negative")
    return ACBound(numerator // profile.delta + 2, "ZC_zero")


def ac_structure_check(g):
    """
    Structure of an almost cone graph: members of B avoiding C have chi 1 and
    meet C at most once, members containing C have chi(C) and are reduced at C,
    and the graph is a tree.
    """
    profile = _require_almost_cone(g)
    c = g.index(profile.central)
    chi_c = 1 - profile.genus_g
    problems = []
    for d in enumerate_B(g):
        if d.coefficients[c] == 0:
            if euler_chi(d) != 1:
                problems.append(f"{d.coefficients} avoids C with chi = {euler_chi(d)}")
            if g.pair_vertex(d.coefficients, c) > 1:
                problems.append(f"{d.coefficients} meets C with multiplicity {g.pair_vertex(d.coefficients, c)}")
        else:
            if euler_chi(d) != chi_c:
                problems.append(f"{d.coefficients} contains C with chi = {euler_chi(d)}")
            if d.coefficients[c] != 1:
                problems.append(f"{d.coefficients} is not reduced at C")
    if not nx.is_tree(g.nx_graph) or any(m != 1 for _, _, m in g.edges):
        problems.append("graph is not a tree")
    return problems


# --- Elliptic sequences ---
def elliptic_sequence(g, support=None):
    z = fundamental_cycle(g, support)
    if euler_chi(z) != 0:
        raise PreconditionError(f"fundamental cycle has chi = {euler_chi(z)}, expected 0")
    central = minimal_model(z)
    block = z.support
    seq = [z]
    while intersection_number(z, central) == 0:
        orth = [i for i in block if g.pair_vertex(z.coefficients, i) == 0]
        block = next((comp for comp in g.components(orth) if set(central.support) <= set(comp)), None)
        if block is None:
            raise InvariantViolation("no orthogonal component contains the minimally elliptic cycle")
        z = Cycle(g, fundamental_vector(g, block))
        seq.append(z)

    for zi in seq:
        if not is_anti_nef_on(zi, [g.ids[i] for i in zi.support]) or euler_chi(zi) != 0:
            raise InvariantViolation(f"sequence element {zi.coefficients} is not an elliptic fundamental cycle")
        if any(zi.coefficients[i] != 1 for i in central.support if central.coefficients[i] == 1):
            raise InvariantViolation(f"sequence element {zi.coefficients} is not reduced at the central cycle")
    return seq


def elliptic_sum(seq):
    total = seq[0]
    for zi in seq[1:]:
        total = total + zi
    g = total.graph
    central = minimal_model(seq[0])
    if not is_anti_nef_on(total, [g.ids[i] for i in seq[0].support]):
        raise InvariantViolation(f"elliptic sum {total.coefficients} is not anti-nef on its support")
    if euler_chi(total) != 0:
        raise InvariantViolation(f"elliptic sum has chi = {euler_chi(total)}")
    if intersection_number(total, central) >= 0:
        raise InvariantViolation("elliptic sum does not pair negatively with the central cycle")
    return total


# --- The connecting cycle W ---
def _connecting_indices(g, support):
    inside = set(support)
    return [i for i in support if any(j not in inside for j, _ in g.adjacency[i])]


def connecting_cycle_W(g, z, b=None):
    """
    A cycle W with red(W) = B, anti-nef on B, reduced at the components of B
    meeting the rest of E, and W.M <= -2, where M = mc(Z_f) and B is the
    z-orthogonal block around supp(M).
    """
    _require_ideal_cycle(z)
    z_f = fundamental_cycle(g)
    if euler_chi(z_f) > 0:
        raise PreconditionError("graph is rational; mc(Z_f) is undefined")
    m = minimal_model(z_f)
    m_supp = set(m.support)

    problems = []
    if intersection_number(z_f, m) >= 0:
        problems.append("Z_f.M is not negative")
    if any(z_f.coefficients[i] != m.coefficients[i] for i in m_supp):
        problems.append("Z_f - M contains components of M")

    orth = orthogonal_indices(z)
    block = next((comp for comp in g.components(orth) if m_supp <= set(comp)), None)
    if block is None:
        problems.append("B is not a component of the z-orthogonal subgraph containing supp(M)")
    elif b is not None and tuple(g.indices(b)) != block:
        problems.append("given B is not the component of the z-orthogonal subgraph containing supp(M)")
    if problems:
        raise PreconditionError("; ".join(problems))

    z_b = fundamental_cycle(g, [g.ids[i] for i in block])
    if any(z_b.coefficients[i] != m.coefficients[i] for i in m_supp):
        raise PreconditionError("Z_B - M contains components of M")
    if minimal_model(z_b) != m:
        raise PreconditionError("mc(Z_B) differs from mc(Z_f)")

    if intersection_number(z_b, m) <= -2:
        w = z_b
    else:
        around = [i for i in block if g.pair_vertex(z_b.coefficients, i) == 0]
        joined = sorted(set(around) | m_supp)
        inner = next(comp for comp in g.components(joined) if m_supp <= set(comp))
        w = z_b + fundamental_cycle(g, [g.ids[i] for i in inner])

    block_ids = [g.ids[i] for i in block]
    if w.support != block:
        raise InvariantViolation("red(W) differs from B")
    if not is_anti_nef_on(w, block_ids):
        raise InvariantViolation("W is not anti-nef on B")
    if any(w.coefficients[i] != 1 for i in _connecting_indices(g, block)):
        raise InvariantViolation("W is not reduced at a connecting component")
    if intersection_number(w, m) > -2:
        raise InvariantViolation(f"W.M = {intersection_number(w, m)} > -2")
    return w


# --- Zariski-type formula ---
def zariski_formula(a, b):
    if not 2 <= a <= b:
        raise PreconditionError(f"need 2 <= a <= b, got a = {a}, b = {b}")
    return ((a - 1) * b) // a


# --- Consolidated bound report ---
def br_bound_report(g, z, pg=None, gonality_lower=DEFAULT_GONALITY_LOWER):
    _require_ideal_cycle(z)
    if pg is not None and pg < 0:
        raise PreconditionError(f"p_g must be nonnegative, got {pg}")

    inv = genus_invariants(g)
    entries = [BoundEntry("pa_plus_one", inv.p_a + 1, "arithmetic genus", inv.pa_witness)]
    global_values = [inv.p_a + 1]
    notes = ["lambda is computed on this resolution: lambda(I) <= lambda(Z,X)"]

    lam = lambda_exact(g, z)
    clamped = lam.value + 2 < 1
    entries.append(BoundEntry(
        "lambda_plus_two", max(lam.value + 2, 1), "lambda(Z,X)", (lam.c1, lam.c2),
        note=f"clamped from {lam.value + 2}" if clamped else "",
    ))

    if pg is not None:
        entries.append(BoundEntry("pg_plus_one", pg + 1, "geometric genus (user input)"))
        global_values.append(pg + 1)

    profile = almost_cone_profile(g)
    if profile:
        case = ac_bound(g, z, gonality_lower)
        label = "ac_gonality" if case.case == "ZC_negative" else "ac_delta"
        entries.append(BoundEntry(label, case.bound, f"almost cone, {case.case}", profile,
                                  note=f"gonality lower bound {gonality_lower}"))
        global_values.append(ac_bound(g, None, gonality_lower).bound)
    else:
        notes.append(f"not almost cone: {profile.reason}")

    best = min(e.value for e in entries)
    return BoundReport(tuple(entries), best, min(global_values), tuple(notes))
