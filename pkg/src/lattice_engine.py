import itertools
import math
import sys
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from fractions import Fraction

import sympy as sp

from src.graph_core import (
    Cycle,
    InvariantViolation,
    PreconditionError,
    euler_chi,
)


# --- Result types ---
@dataclass(frozen=True)
class ChainSet:
    """
    A finite set of chain-connected cycles, ordered by (degree, coefficients).
    """
    graph: object
    vectors: tuple

    @classmethod
    def from_vectors(cls, graph, vectors):
        return cls(graph, tuple(sorted(set(vectors), key=lambda v: (sum(v), v))))

    @cached_property
    def index(self):
        return frozenset(self.vectors)

    @property
    def members(self):
        return [Cycle(self.graph, v) for v in self.vectors]

    def __contains__(self, item):
        vec = item.coefficients if isinstance(item, Cycle) else tuple(item)
        return vec in self.index

    def __iter__(self):
        return iter(self.members)

    def __len__(self):
        return len(self.vectors)

    def filter(self, predicate):
        return ChainSet(self.graph, tuple(v for v in self.vectors if predicate(Cycle(self.graph, v))))


@dataclass(frozen=True)
class CCCDecomposition:
    parts: tuple  # ((m_i, D_i), ...)
    fallback_used: bool = False

    def total(self):
        m0, d0 = self.parts[0]
        total = d0 * m0
        for m, d in self.parts[1:]:
            total = total + d * m
        return total


@dataclass(frozen=True)
class ChiMinimum:
    value: int
    witness: Cycle
    search_bound: tuple  # ((vertex id, lo, hi), ...) certified at the first incumbent


@dataclass(frozen=True)
class GenusInvariants:
    p_f: int
    p_a: int
    pa_witness: Cycle
    z_f: Cycle


@dataclass(frozen=True)
class OutsideComponent:
    vertices: frozenset
    z_b: Cycle
    chi: int
    pairing: int


# --- Helpers over raw coefficient vectors ---
def _add_unit(vec, j, step=1):
    out = list(vec)
    out[j] += step
    return tuple(out)


def _unit_vec(n, i):
    vec = [0] * n
    vec[i] = 1
    return tuple(vec)


def _leq(a, b):
    return all(x <= y for x, y in zip(a, b))


def _require_connected(g, idx):
    if not idx:
        raise PreconditionError("vertex subset is empty")
    if not g.is_connected_subset(idx):
        raise PreconditionError(f"vertex subset {sorted(g.vertex_ids(idx), key=g.id_index.get)} is disconnected")


def _require_positive(d, what="cycle"):
    if d.rational or not d.is_positive():
        raise PreconditionError(f"{what} must be a positive integer cycle")


# --- Fundamental cycles & computation sequences ---
def fundamental_vector(g, idx, rng=None):
    """
    Laufer's algorithm on the support idx. rng shuffles the increment order;
    the result does not depend on it.
    """
    n = len(g)
    vec = [0] * n
    for i in idx:
        vec[i] = 1
    order = list(idx)
    while True:
        if rng is not None:
            rng.shuffle(order)
        for i in order:
            if g.pair_vertex(vec, i) > 0:
                vec[i] += 1
                break
        else:
            return tuple(vec)


def fundamental_cycle(g, subset=None, rng=None):
    idx = g.indices(subset)
    _require_connected(g, idx)
    return Cycle(g, fundamental_vector(g, idx, rng))


def _continue_sequence(g, vec):
    """Extends a computation sequence from vec with lowest-index eligible steps."""
    out = []
    while True:
        for j in range(len(g)):
            if g.pair_vertex(vec, j) > 0:
                vec = _add_unit(vec, j)
                out.append(vec)
                break
        else:
            return out


def computation_sequence(g, seed):
    start = _unit_vec(len(g), g.index(seed))
    return [Cycle(g, v) for v in [start] + _continue_sequence(g, start)]


def _closure(g, bound=None, starts=None):
    """
    Breadth-first closure under C -> C + E_j when C.E_j > 0, from unit cycles.
    With bound, states stay <= bound. Returns {state: parent}.
    """
    n = len(g)
    if starts is None:
        starts = range(n) if bound is None else [i for i in range(n) if bound[i] > 0]
    parents = {}
    queue = deque()
    for i in starts:
        u = _unit_vec(n, i)
        if u not in parents:
            parents[u] = None
            queue.append(u)
    while queue:
        state = queue.popleft()
        for j in range(n):
            if bound is not None and state[j] >= bound[j]:
                continue
            if g.pair_vertex(state, j) > 0:
                nxt = _add_unit(state, j)
                if nxt not in parents:
                    parents[nxt] = state
                    queue.append(nxt)
    return parents


def enumerate_B(g):
    """All cycles appearing in some computation sequence for Z_f."""
    return ChainSet.from_vectors(g, _closure(g).keys())


def sequence_to(g, d):
    """
    A computation sequence passing through d and ending at Z_f, for d in B.
    """
    parents = _closure(g, bound=d.coefficients)
    if d.coefficients not in parents:
        raise PreconditionError("cycle is not chain-connected")
    path = []
    state = d.coefficients
    while state is not None:
        path.append(state)
        state = parents[state]
    path.reverse()
    return [Cycle(g, v) for v in path + _continue_sequence(g, d.coefficients)]


# --- Chain-connectedness ---
def is_chain_connected(d):
    """
    Constructive test: d is chain-connected iff it is reachable from a unit
    cycle through states <= d.
    """
    _require_positive(d)
    g = d.graph
    if not g.is_connected_subset(d.support):
        return False
    return d.coefficients in _closure(g, bound=d.coefficients)


def is_chain_connected_bruteforce(d):
    """
    Definition-level oracle: no 0 < D1 < d anti-nef on d - D1.
    """
    _require_positive(d)
    g = d.graph
    vec = d.coefficients
    for sub in itertools.product(*(range(a + 1) for a in vec)):
        if not any(sub) or sub == vec:
            continue
        rest = [i for i in range(len(g)) if vec[i] - sub[i] > 0]
        if all(g.pair_vertex(sub, i) <= 0 for i in rest):
            return False
    return True


# --- CCC decomposition ---
def _greedy_component(g, remaining):
    best = None
    for i in (i for i, a in enumerate(remaining) if a > 0):
        vec = _unit_vec(len(g), i)
        while True:
            for j in range(len(g)):
                if vec[j] < remaining[j] and g.pair_vertex(vec, j) > 0:
                    vec = _add_unit(vec, j)
                    break
            else:
                break
        if best is None or sum(vec) > sum(best):
            best = vec
    return best


def _exhaustive_component(g, remaining):
    states = list(_closure(g, bound=remaining).keys())
    maximal = [s for s in states if not any(t != s and _leq(s, t) for t in states)]
    return min(maximal, key=lambda v: (-sum(v), v))


def _decompose(g, vec, pick):
    parts = []
    remaining = vec
    while any(remaining):
        comp = pick(g, remaining)
        remaining = tuple(a - b for a, b in zip(remaining, comp))
        if parts and parts[-1][1] == comp:
            parts[-1][0] += 1
        else:
            parts.append([1, comp])
    return tuple((m, Cycle(g, c)) for m, c in parts)


def ccc_violations(d, parts):
    """Which of the decomposition conditions fail for parts summing to d."""
    g = d.graph
    problems = []
    total = [0] * len(g)
    for m, c in parts:
        for i, a in enumerate(c.coefficients):
            total[i] += m * a
    if tuple(total) != d.coefficients:
        problems.append("parts do not sum to the cycle")
    cycles = [c for _, c in parts]
    if len(set(cycles)) != len(cycles):
        problems.append("parts are not distinct")
    for m, c in parts:
        if not c.is_positive() or not is_chain_connected(c):
            problems.append(f"part {c.coefficients} is not chain-connected")
        if m >= 2 and not all(g.pair_vertex(c.coefficients, i) <= 0 for i in c.support):
            problems.append(f"part {c.coefficients} has multiplicity {m} but is not anti-nef on itself")
    for a in range(len(parts)):
        for b in range(a + 1, len(parts)):
            da, db = parts[a][1], parts[b][1]
            if set(da.support) & set(db.support) and not da >= db:
                problems.append(f"parts {a + 1} and {b + 1} overlap without domination")
            if not all(g.pair_vertex(da.coefficients, i) <= 0 for i in db.support):
                problems.append(f"part {a + 1} is not anti-nef on part {b + 1}")
    return problems


def ccc_decompose(d):
    """
    Repeatedly extracts the chain-connected component. Greedy saturation is
    tried first; the exhaustive search takes over if verification fails.
    """
    _require_positive(d)
    g = d.graph
    parts = _decompose(g, d.coefficients, _greedy_component)
    if not ccc_violations(d, parts):
        return CCCDecomposition(parts, False)

    print(f"⚠️  CCC greedy saturation failed verification for {d.coefficients}; using exhaustive search", file=sys.stderr)
    parts = _decompose(g, d.coefficients, _exhaustive_component)
    problems = ccc_violations(d, parts)
    if problems:
        raise InvariantViolation(f"CCC decomposition of {d.coefficients} failed: {'; '.join(problems)}")
    return CCCDecomposition(parts, True)


# --- Minimal models ---
def _nef_defects(g, vec):
    """Indices in supp(vec) where (K + vec) pairs negatively."""
    return [i for i in range(len(g)) if vec[i] > 0 and g.k[i] + g.pair_vertex(vec, i) < 0]


def minimal_model(d):
    """
    Strips components while K + C is not nef on C; for d in B with chi(d) <= 0.
    """
    _require_positive(d)
    if not is_chain_connected(d):
        raise PreconditionError("minimal model needs a chain-connected cycle")
    chi_d = euler_chi(d)
    if chi_d > 0:
        raise PreconditionError(f"minimal model needs chi <= 0, got chi = {chi_d}")

    g = d.graph
    vec = d.coefficients
    while True:
        defects = _nef_defects(g, vec)
        if not defects:
            break
        vec = _add_unit(vec, defects[0], -1)

    if not any(vec) or g.chi(vec) != chi_d or _nef_defects(g, vec):
        raise InvariantViolation(f"minimal model stripping of {d.coefficients} ended at {vec}")
    return Cycle(g, vec)


def minimal_model_bruteforce(d):
    """min{C <= d : C > 0, chi(C) = chi(d)}, by enumeration."""
    g = d.graph
    target = euler_chi(d)
    candidates = [
        sub for sub in itertools.product(*(range(a + 1) for a in d.coefficients))
        if any(sub) and g.chi(sub) == target
    ]
    for c in candidates:
        if all(_leq(c, other) for other in candidates):
            return Cycle(g, c)
    raise InvariantViolation(f"no minimum among chi-{target} subcycles of {d.coefficients}")


def check_outside_sequence(seq):
    """
    For a computation sequence starting at a cycle >= mc(D): chi stays constant,
    each added component is rational and pairs to 1 with the previous cycle.
    """
    problems = []
    g = seq[0].graph
    chi0 = euler_chi(seq[0])
    for prev, cur in zip(seq, seq[1:]):
        step = cur - prev
        j = step.support[0]
        if euler_chi(cur) != chi0:
            problems.append(f"chi changes at {cur.coefficients}")
        if g.vertices[j].genus != 0:
            problems.append(f"added component {g.ids[j]} is not rational")
        if g.pair_vertex(prev.coefficients, j) != 1:
            problems.append(f"step to {g.ids[j]} pairs {g.pair_vertex(prev.coefficients, j)} instead of 1")
    return problems


def outside_components(g):
    """
    For p_f >= 1: every connected component B of E - red(mc(Z_f)), with its
    fundamental cycle Z_B, chi(Z_B) = 1 and Z_B.mc(Z_f) = 1.
    """
    z_f = fundamental_cycle(g)
    m = minimal_model(z_f)
    rest = [i for i in range(len(g)) if m.coefficients[i] == 0]
    out = []
    for comp in g.components(rest):
        z_b = Cycle(g, fundamental_vector(g, comp))
        chi_b = euler_chi(z_b)
        pairing = g.pair(z_b.coefficients, m.coefficients)
        if chi_b != 1 or pairing != 1 or not is_chain_connected(m + z_b):
            raise InvariantViolation(
                f"component {sorted(g.vertex_ids(comp))}: chi(Z_B) = {chi_b}, Z_B.M = {pairing}"
            )
        out.append(OutsideComponent(g.vertex_ids(comp), z_b, chi_b, pairing))
    return out


def check_minimal_model_blow_up(d, blow):
    """
    After blowing up a point of supp(mc(d)): mc(f*d) = f*mc(d) - E0.
    Returns None when the point is off supp(mc(d)).
    """
    mc = minimal_model(d)
    if not any(mc.coefficients[i] for i in blow.site):
        return None
    expected = blow.total_transform(mc) - blow.exceptional
    return minimal_model(blow.total_transform(d)) == expected


# --- Bounded integer-quadratic minimization of chi ---
def _integer_window(center, rho):
    """Integers D with (D - center)^2 <= rho, as (lo, hi); None if empty."""
    if rho < 0:
        return None
    p, q = center.numerator, center.denominator
    w = math.isqrt((rho.numerator * q * q) // rho.denominator)
    lo = -((w - p) // q)
    hi = (p + w) // q
    return (lo, hi) if lo <= hi else None


def _to_fraction(x):
    x = sp.Rational(x)
    return Fraction(int(x.p), int(x.q))


class _ChiSearch:
    """
    Branch-and-bound for min q(D) = chi(D) - a.D over integer D >= 0 on idx.
    q(D) = q* + (D - x*)^T Q (D - x*) / 2 with Q = -M|idx, and Q = L diag(d) L^T
    gives exact per-coordinate windows, last coordinate first.
    """

    def __init__(self, g, idx, a_vec, allow_zero):
        self.g = g
        self.idx = idx
        self.a_vec = a_vec
        self.allow_zero = allow_zero
        n = len(idx)

        Q = sp.Matrix([[-g.matrix[i][j] for j in idx] for i in idx])
        lin = sp.Matrix([sp.Rational(-g.k[i], 2) - g.pair_vertex(a_vec, i) for i in idx])
        x_star = -Q.LUsolve(lin)
        L, D = Q.LDLdecomposition()
        Q_inv = Q.inv()

        self.x = [_to_fraction(x_star[i]) for i in range(n)]
        self.q_star = _to_fraction((lin.T * x_star)[0] / 2)
        self.L = [[_to_fraction(L[i, j]) for j in range(n)] for i in range(n)]
        self.d = [_to_fraction(D[i, i]) for i in range(n)]
        self.q_inv_diag = [_to_fraction(Q_inv[i, i]) for i in range(n)]

    def value(self, sub):
        vec = [0] * len(self.g)
        for pos, i in enumerate(self.idx):
            vec[i] = sub[pos]
        vec = tuple(vec)
        return self.g.chi(vec) - self.g.pair(self.a_vec, vec), vec

    def initial(self):
        n = len(self.idx)
        if self.allow_zero:
            return self.value((0,) * n)
        units = [self.value(_unit_vec(n, pos)) for pos in range(n)]
        return min(units, key=lambda t: (t[0], t[1]))

    def box(self, bound_value):
        r = 2 * (Fraction(bound_value) - self.q_star)
        out = []
        for pos, i in enumerate(self.idx):
            window = _integer_window(self.x[pos], r * self.q_inv_diag[pos])
            lo, hi = window if window else (0, -1)
            out.append((self.g.ids[i], max(lo, 0), hi))
        return tuple(out)

    def run(self):
        self.best_value, self.best_vec = self.initial()
        bound = self.box(self.best_value)
        n = len(self.idx)
        y = [Fraction(0)] * n
        sub = [0] * n
        self._descend(n - 1, Fraction(0), y, sub)
        return self.best_value, self.best_vec, bound

    def _descend(self, pos, partial, y, sub):
        r = 2 * (Fraction(self.best_value) - self.q_star)
        t = sum((self.L[j][pos] * y[j] for j in range(pos + 1, len(self.idx))), Fraction(0))
        window = _integer_window(self.x[pos] - t, (r - partial) / self.d[pos])
        if window is None:
            return
        lo, hi = max(window[0], 0), window[1]
        for value in range(lo, hi + 1):
            sub[pos] = value
            y[pos] = value - self.x[pos]
            nxt = partial + self.d[pos] * (y[pos] + t) ** 2
            if pos == 0:
                self._leaf(sub)
            else:
                self._descend(pos - 1, nxt, y, sub)
        sub[pos] = 0
        y[pos] = Fraction(0)

    def _leaf(self, sub):
        if not self.allow_zero and not any(sub):
            return
        value, vec = self.value(tuple(sub))
        if (value, vec) < (self.best_value, self.best_vec):
            self.best_value, self.best_vec = value, vec


def _shift_vector(g, a):
    if a is None:
        return (0,) * len(g)
    if a.rational:
        raise PreconditionError("shift cycle must be integral")
    return tuple(int(x) for x in a.coefficients)


def minimize_chi_shifted(g, subset, a=None, allow_zero=False):
    """
    Exact min of chi(D) - a.D over integer D >= 0 supported in subset
    (D != 0 unless allow_zero), with the lowest-lexicographic witness.
    """
    idx = g.indices(subset) if subset is not None else tuple(range(len(g)))
    a_vec = _shift_vector(g, a)
    if not idx:
        if not allow_zero:
            raise PreconditionError("empty support with allow_zero=False")
        return ChiMinimum(0, g.zero(), ())
    value, vec, bound = _ChiSearch(g, idx, a_vec, allow_zero).run()
    return ChiMinimum(value, Cycle(g, vec), bound)


def minimize_chi_box(g, subset, a=None, allow_zero=False, bound=None):
    """
    Plain box-enumeration oracle over 0 <= D_i <= bound. The default bound is
    the certified ellipsoid box at the first incumbent.
    """
    idx = g.indices(subset) if subset is not None else tuple(range(len(g)))
    a_vec = _shift_vector(g, a)
    if not idx:
        if not allow_zero:
            raise PreconditionError("empty support with allow_zero=False")
        return ChiMinimum(0, g.zero(), ())
    search = _ChiSearch(g, idx, a_vec, allow_zero)
    if bound is None:
        bound = max([hi for _, _, hi in search.box(search.initial()[0])] + [1])
    best = None
    for sub in itertools.product(range(bound + 1), repeat=len(idx)):
        if not allow_zero and not any(sub):
            continue
        candidate = search.value(sub)
        if best is None or candidate < best:
            best = candidate
    if best is None:
        raise PreconditionError(f"box of side {bound} holds no admissible cycle")
    return ChiMinimum(best[0], Cycle(g, best[1]), tuple((g.ids[i], 0, bound) for i in idx))


def genus_invariants(g):
    z_f = fundamental_cycle(g)
    best = minimize_chi_shifted(g, None)
    return GenusInvariants(1 - euler_chi(z_f), 1 - best.value, best.witness, z_f)
