import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import networkx as nx
import sympy as sp

# --- Configuration ---
ID_PATTERN = re.compile(r"^[A-Za-z0-9_]+$")
INT_PATTERN = re.compile(r"^[+-]?[0-9]+$")
DEFAULT_BLOW_UP_ID = "E0"


# --- Errors ---
class SingLatticeError(Exception):
    exit_code = 5


class GraphParseError(SingLatticeError):
    exit_code = 2

    def __init__(self, message, line=0, column=0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class GraphValidationError(SingLatticeError):
    exit_code = 3


class PreconditionError(SingLatticeError):
    exit_code = 4


class GraphMismatchError(PreconditionError):
    pass


class InvariantViolation(SingLatticeError):
    exit_code = 5


# --- Data model ---
@dataclass(frozen=True)
class VertexData:
    id: str
    self_intersection: int
    genus: int = 0
    smooth: bool = True


@dataclass(frozen=True)
class ResolutionGraph:
    """
    Weighted dual graph of a resolution. Vertex declaration order is the
    coefficient order of every cycle on the graph; edges are (i, j, m) with i < j.
    """
    vertices: tuple
    edges: tuple = ()
    name: str = ""

    def __len__(self):
        return len(self.vertices)

    @cached_property
    def ids(self):
        return tuple(v.id for v in self.vertices)

    @cached_property
    def id_index(self):
        return {v.id: i for i, v in enumerate(self.vertices)}

    @cached_property
    def adjacency(self):
        # adjacency[i] = ((j, m), ...), sorted by j
        adj = [[] for _ in self.vertices]
        for i, j, m in self.edges:
            adj[i].append((j, m))
            adj[j].append((i, m))
        return tuple(tuple(sorted(a)) for a in adj)

    @cached_property
    def matrix(self):
        n = len(self.vertices)
        rows = [[0] * n for _ in range(n)]
        for i, v in enumerate(self.vertices):
            rows[i][i] = v.self_intersection
        for i, j, m in self.edges:
            rows[i][j] = m
            rows[j][i] = m
        return tuple(tuple(r) for r in rows)

    @cached_property
    def nx_graph(self):
        G = nx.Graph()
        G.add_nodes_from(range(len(self.vertices)))
        G.add_edges_from((i, j, {"m": m}) for i, j, m in self.edges)
        return G

    @cached_property
    def k(self):
        # adjunction: K.E_i = -E_i^2 - 2 + 2 g_i
        return tuple(-v.self_intersection - 2 + 2 * v.genus for v in self.vertices)

    def index(self, vertex_id):
        if isinstance(vertex_id, int):
            if 0 <= vertex_id < len(self.vertices):
                return vertex_id
            raise PreconditionError(f"vertex index {vertex_id} out of range")
        try:
            return self.id_index[vertex_id]
        except KeyError:
            raise PreconditionError(f"unknown vertex id '{vertex_id}'") from None

    def indices(self, subset=None):
        """Sorted index tuple of a vertex subset given by ids (None = every vertex)."""
        if subset is None:
            return tuple(range(len(self.vertices)))
        if isinstance(subset, str):
            subset = [subset]
        return tuple(sorted({self.index(v) for v in subset}))

    def vertex_ids(self, indices):
        return frozenset(self.vertices[i].id for i in indices)

    def pair_vertex(self, vec, i):
        """vec . E_i for an integer (or rational) coefficient vector."""
        total = self.vertices[i].self_intersection * vec[i]
        for j, m in self.adjacency[i]:
            total += m * vec[j]
        return total

    def pairings(self, vec):
        return tuple(self.pair_vertex(vec, i) for i in range(len(self.vertices)))

    def pair(self, a, b):
        return sum(b[i] * self.pair_vertex(a, i) for i in range(len(self.vertices)) if b[i])

    def chi(self, vec):
        twice = self.pair(vec, vec) + sum(ki * x for ki, x in zip(self.k, vec))
        if twice % 2:
            raise InvariantViolation(f"C.C + K.C = {twice} is odd for {vec}")
        return -twice // 2

    def is_connected_subset(self, indices):
        if not indices:
            return False
        return nx.is_connected(self.nx_graph.subgraph(indices))

    def components(self, indices):
        """Connected components of the induced subgraph, each a sorted index tuple."""
        comps = nx.connected_components(self.nx_graph.subgraph(indices))
        return sorted((tuple(sorted(c)) for c in comps), key=lambda c: c[0])

    # --- cycle constructors ---
    def cycle(self, coefficients=None, **by_id):
        if coefficients is None:
            vec = [0] * len(self.vertices)
            for vid, value in by_id.items():
                vec[self.index(vid)] = value
            return Cycle(self, tuple(vec))
        if isinstance(coefficients, dict):
            vec = [0] * len(self.vertices)
            for vid, value in coefficients.items():
                vec[self.index(vid)] = value
            return Cycle(self, tuple(vec))
        vec = tuple(coefficients)
        if len(vec) != len(self.vertices):
            raise PreconditionError(f"cycle has {len(vec)} coefficients, graph has {len(self.vertices)} vertices")
        return Cycle(self, vec)

    def zero(self):
        return Cycle(self, (0,) * len(self.vertices))

    def unit(self, vertex_id):
        vec = [0] * len(self.vertices)
        vec[self.index(vertex_id)] = 1
        return Cycle(self, tuple(vec))

    def reduced(self, subset=None):
        """The reduced cycle on a vertex subset (None = E)."""
        idx = set(self.indices(subset))
        return Cycle(self, tuple(1 if i in idx else 0 for i in range(len(self.vertices))))


@dataclass(frozen=True)
class Cycle:
    graph: ResolutionGraph = field(compare=False, repr=False)
    coefficients: tuple

    @cached_property
    def rational(self):
        return any(isinstance(x, Fraction) and x.denominator != 1 for x in self.coefficients)

    def __len__(self):
        return len(self.coefficients)

    def __getitem__(self, key):
        if isinstance(key, str):
            key = self.graph.index(key)
        return self.coefficients[key]

    def _check(self, other):
        if not isinstance(other, Cycle):
            raise TypeError(f"expected Cycle, got {type(other).__name__}")
        if other.graph is not self.graph and other.graph != self.graph:
            raise GraphMismatchError("cycles belong to different graphs")

    def __add__(self, other):
        self._check(other)
        return Cycle(self.graph, tuple(a + b for a, b in zip(self.coefficients, other.coefficients)))

    def __sub__(self, other):
        self._check(other)
        return Cycle(self.graph, tuple(a - b for a, b in zip(self.coefficients, other.coefficients)))

    def __neg__(self):
        return Cycle(self.graph, tuple(-a for a in self.coefficients))

    def __mul__(self, scalar):
        return Cycle(self.graph, tuple(scalar * a for a in self.coefficients))

    __rmul__ = __mul__

    def __le__(self, other):
        self._check(other)
        return all(a <= b for a, b in zip(self.coefficients, other.coefficients))

    def __ge__(self, other):
        self._check(other)
        return all(a >= b for a, b in zip(self.coefficients, other.coefficients))

    def __lt__(self, other):
        return self <= other and self != other

    def __gt__(self, other):
        return self >= other and self != other

    @property
    def support(self):
        return tuple(i for i, a in enumerate(self.coefficients) if a != 0)

    @property
    def support_ids(self):
        return self.graph.vertex_ids(self.support)

    def is_zero(self):
        return not any(self.coefficients)

    def is_effective(self):
        return all(a >= 0 for a in self.coefficients)

    def is_positive(self):
        return self.is_effective() and not self.is_zero()

    def is_reduced_on_support(self):
        return all(a in (0, 1) for a in self.coefficients)

    def reduced(self):
        return Cycle(self.graph, tuple(1 if a else 0 for a in self.coefficients))

    def as_dict(self):
        return dict(zip(self.graph.ids, self.coefficients))


@dataclass(frozen=True)
class CanonicalDegrees:
    k: tuple


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    diagnostic: str = ""
    failing_minor: int = 0
    minor_value: int = 0
    components: tuple = ()


@dataclass(frozen=True)
class BlowUp:
    source: ResolutionGraph
    graph: ResolutionGraph
    site: tuple
    new_id: str

    def total_transform(self, c):
        if c.graph != self.source:
            raise GraphMismatchError("cycle is not on the blown-up graph's source")
        extra = sum(c.coefficients[i] for i in self.site)
        return Cycle(self.graph, tuple(c.coefficients) + (extra,))

    @property
    def exceptional(self):
        return self.graph.unit(self.new_id)


# --- Construction & Parsing ---
def build_graph(vertices, edges=(), name=""):
    """
    Builds a graph from VertexData (or (id, sq, genus[, smooth]) tuples) and
    (id1, id2[, m]) edges. Structural checks only; see validate_graph.
    """
    verts = []
    seen = set()
    for v in vertices:
        if not isinstance(v, VertexData):
            v = VertexData(*v)
        if not ID_PATTERN.match(v.id):
            raise GraphValidationError(f"invalid vertex id '{v.id}'")
        if v.id in seen:
            raise GraphValidationError(f"duplicate vertex id '{v.id}'")
        if v.genus < 0:
            raise GraphValidationError(f"vertex '{v.id}' has negative genus {v.genus}")
        seen.add(v.id)
        verts.append(v)

    index = {v.id: i for i, v in enumerate(verts)}
    edge_map = {}
    for e in edges:
        a, b = e[0], e[1]
        m = e[2] if len(e) > 2 else 1
        if a not in index or b not in index:
            raise GraphValidationError(f"edge {a}-{b} references an unknown vertex")
        if a == b:
            raise GraphValidationError(f"self-loop on '{a}'")
        if m < 1:
            raise GraphValidationError(f"edge {a}-{b} has non-positive multiplicity {m}")
        key = tuple(sorted((index[a], index[b])))
        if key in edge_map:
            raise GraphValidationError(f"repeated edge {a}-{b}")
        edge_map[key] = m
    return ResolutionGraph(tuple(verts), tuple((i, j, m) for (i, j), m in sorted(edge_map.items())), name)


def _parse_int(token, line_no, col, what, minimum=None):
    if not INT_PATTERN.match(token):
        raise GraphParseError(f"{what} must be an integer, got '{token}'", line_no, col)
    value = int(token)
    if minimum is not None and value < minimum:
        raise GraphParseError(f"{what} must be >= {minimum}, got {value}", line_no, col)
    return value


def _tokens(line):
    """(token, 1-based column) pairs of a comment-stripped line."""
    return [(m.group(0), m.start() + 1) for m in re.finditer(r"\S+", line)]


def parse_graph(text):
    """
    Parses the line-oriented graph format. Returns (graph, {cycle name: Cycle}).
    """
    name = ""
    vertices = []
    vertex_ids = {}
    edges = []
    edge_keys = set()
    raw_cycles = []
    seen_content = False

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        toks = _tokens(line)
        if not toks:
            continue
        keyword, kcol = toks[0]

        if keyword == "graph":
            if seen_content:
                raise GraphParseError("'graph' must be the first non-comment line and appear once", line_no, kcol)
            if len(toks) != 2:
                raise GraphParseError("expected 'graph <name>'", line_no, kcol)
            name = toks[1][0]
            seen_content = True
            continue
        seen_content = True

        if keyword == "v":
            if len(toks) < 3:
                raise GraphParseError("expected 'v <id> sq=<int> [g=<int>] [sing]'", line_no, kcol)
            vid, vcol = toks[1]
            if not ID_PATTERN.match(vid):
                raise GraphParseError(f"invalid vertex id '{vid}'", line_no, vcol)
            if vid in vertex_ids:
                raise GraphParseError(f"duplicate vertex id '{vid}'", line_no, vcol)
            sq_tok, sq_col = toks[2]
            if not sq_tok.startswith("sq="):
                raise GraphParseError(f"expected 'sq=<int>', got '{sq_tok}'", line_no, sq_col)
            sq = _parse_int(sq_tok[3:], line_no, sq_col, "self-intersection")
            genus, smooth = 0, True
            seen_opts = set()
            for tok, col in toks[3:]:
                opt = "g" if tok.startswith("g=") else tok
                if opt in seen_opts:
                    raise GraphParseError(f"repeated option '{opt}'", line_no, col)
                seen_opts.add(opt)
                if opt == "g":
                    genus = _parse_int(tok[2:], line_no, col, "genus", minimum=0)
                elif tok == "sing":
                    smooth = False
                else:
                    raise GraphParseError(f"unexpected token '{tok}'", line_no, col)
            vertex_ids[vid] = len(vertices)
            vertices.append(VertexData(vid, sq, genus, smooth))

        elif keyword == "e":
            if len(toks) not in (3, 4):
                raise GraphParseError("expected 'e <id1> <id2> [m=<int>]'", line_no, kcol)
            (a, acol), (b, bcol) = toks[1], toks[2]
            for vid, col in ((a, acol), (b, bcol)):
                if not ID_PATTERN.match(vid):
                    raise GraphParseError(f"invalid vertex id '{vid}'", line_no, col)
            if a == b:
                raise GraphParseError(f"self-loop on '{a}'", line_no, bcol)
            m = 1
            if len(toks) == 4:
                m_tok, m_col = toks[3]
                if not m_tok.startswith("m="):
                    raise GraphParseError(f"expected 'm=<int>', got '{m_tok}'", line_no, m_col)
                m = _parse_int(m_tok[2:], line_no, m_col, "edge multiplicity", minimum=1)
            key = frozenset((a, b))
            if key in edge_keys:
                raise GraphParseError(f"repeated edge {a}-{b}", line_no, kcol)
            edge_keys.add(key)
            edges.append((a, b, m, line_no, acol, bcol))

        elif keyword == "cycle":
            if len(toks) < 3:
                raise GraphParseError("expected 'cycle <name> <id>=<int> ...'", line_no, kcol)
            cname, ccol = toks[1]
            if not ID_PATTERN.match(cname):
                raise GraphParseError(f"invalid cycle name '{cname}'", line_no, ccol)
            if any(c[0] == cname for c in raw_cycles):
                raise GraphParseError(f"duplicate cycle name '{cname}'", line_no, ccol)
            terms = []
            for tok, col in toks[2:]:
                vid, sep, value = tok.partition("=")
                if not sep or not ID_PATTERN.match(vid):
                    raise GraphParseError(f"expected '<id>=<int>', got '{tok}'", line_no, col)
                if any(t[0] == vid for t in terms):
                    raise GraphParseError(f"repeated coefficient for '{vid}'", line_no, col)
                terms.append((vid, _parse_int(value, line_no, col, "coefficient"), col))
            raw_cycles.append((cname, terms, line_no))

        else:
            raise GraphParseError(f"unknown keyword '{keyword}'", line_no, kcol)

    if not vertices:
        raise GraphParseError("no vertices declared")

    # Edges and cycles may reference vertices declared later in the file
    for a, b, m, line_no, acol, bcol in edges:
        for vid, col in ((a, acol), (b, bcol)):
            if vid not in vertex_ids:
                raise GraphParseError(f"edge references unknown vertex '{vid}'", line_no, col)
    graph = build_graph(vertices, [(a, b, m) for a, b, m, *_ in edges], name)

    cycles = {}
    for cname, terms, line_no in raw_cycles:
        vec = [0] * len(vertices)
        for vid, value, col in terms:
            if vid not in vertex_ids:
                raise GraphParseError(f"cycle '{cname}' has a coefficient for unknown vertex '{vid}'", line_no, col)
            vec[vertex_ids[vid]] = value
        cycles[cname] = Cycle(graph, tuple(vec))
    return graph, cycles


def format_graph(g, cycles=None):
    """Inverse of parse_graph (declaration order preserved)."""
    lines = [f"graph {g.name}"] if g.name else []
    for v in g.vertices:
        parts = [f"v {v.id} sq={v.self_intersection}"]
        if v.genus:
            parts.append(f"g={v.genus}")
        if not v.smooth:
            parts.append("sing")
        lines.append(" ".join(parts))
    for i, j, m in g.edges:
        lines.append(f"e {g.ids[i]} {g.ids[j]}" + (f" m={m}" if m != 1 else ""))
    for cname, c in (cycles or {}).items():
        lines.append(f"cycle {cname} " + " ".join(f"{vid}={a}" for vid, a in zip(g.ids, c.coefficients)))
    return "\n".join(lines) + "\n"


# --- Validation ---
def leading_minors(g):
    M = sp.Matrix(g.matrix)
    return [int(M[:k, :k].det(method="bareiss")) for k in range(1, len(g) + 1)]


def validate_graph(g):
    """
    ok iff connected and negative definite. Negative definiteness is read off the
    signs of the leading principal minors: the k-th must have sign (-1)^k.
    """
    comps = g.components(range(len(g)))
    if len(comps) > 1:
        sets = tuple(g.vertex_ids(c) for c in comps)
        listing = " | ".join("{" + ",".join(sorted(s, key=g.id_index.get)) + "}" for s in sets)
        return ValidationReport(False, f"graph is disconnected: {listing}", components=sets)

    for k, minor in enumerate(leading_minors(g), start=1):
        if minor == 0 or (minor < 0) != (k % 2 == 1):
            return ValidationReport(
                False,
                f"not negative definite: leading principal minor {k} = {minor} "
                f"(expected sign {'-' if k % 2 else '+'})",
                failing_minor=k,
                minor_value=minor,
            )
    return ValidationReport(True)


def ensure_valid(g):
    report = validate_graph(g)
    if not report.ok:
        raise GraphValidationError(report.diagnostic)
    return g


# --- Intersection arithmetic ---
def intersection_number(a, b):
    a._check(b)
    return a.graph.pair(a.coefficients, b.coefficients)


def canonical_degrees(g):
    return CanonicalDegrees(g.k)


def euler_chi(c):
    """chi(C) = -C(C+K)/2 by Riemann-Roch."""
    if c.rational:
        raise PreconditionError("euler_chi needs an integer cycle")
    return c.graph.chi(tuple(int(a) for a in c.coefficients))


def pa_cycle(c):
    return 1 - euler_chi(c)


def is_anti_nef_on(l, subset=None):
    g = l.graph
    return all(g.pair_vertex(l.coefficients, i) <= 0 for i in g.indices(subset))


def is_anti_nef(l):
    return is_anti_nef_on(l, None)


def orthogonal_indices(l):
    g = l.graph
    return tuple(i for i in range(len(g)) if g.pair_vertex(l.coefficients, i) == 0)


def orthogonal_components(l):
    """Connected components of L^perp, the vertices pairing to zero with l."""
    g = l.graph
    return [g.vertex_ids(c) for c in g.components(orthogonal_indices(l))]


# --- Blow-ups ---
def blow_up_sites(g):
    return [v.id for v in g.vertices] + [(g.ids[i], g.ids[j]) for i, j, _ in g.edges]


def _fresh_id(g, base):
    if base not in g.id_index:
        return base
    n = 1
    while f"{base}_{n}" in g.id_index:
        n += 1
    return f"{base}_{n}"


def blow_up(g, site, new_id=DEFAULT_BLOW_UP_ID):
    """
    Blows up a point on a component (site = vertex id) or at an intersection
    point of two components (site = (id1, id2)). The new (-1)-curve is appended.
    """
    new_id = _fresh_id(g, new_id)
    verts = list(g.vertices)
    edges = {(i, j): m for i, j, m in g.edges}

    if isinstance(site, str):
        i = g.index(site)
        points = (i,)
    else:
        a, b = site
        i, j = sorted((g.index(a), g.index(b)))
        if (i, j) not in edges:
            raise PreconditionError(f"no edge between '{a}' and '{b}'")
        points = (i, j)
        edges[(i, j)] -= 1
        if edges[(i, j)] == 0:
            del edges[(i, j)]

    n = len(verts)
    for p in points:
        v = verts[p]
        verts[p] = VertexData(v.id, v.self_intersection - 1, v.genus, v.smooth)
        edges[(p, n)] = 1
    verts.append(VertexData(new_id, -1, 0, True))

    graph = ResolutionGraph(tuple(verts), tuple((a, b, m) for (a, b), m in sorted(edges.items())), g.name)
    return BlowUp(g, graph, points, new_id)


# --- Pullbacks across contracted subgraphs ---
def numerical_pullback(g, contracted, c):
    """
    The unique c + sum a_i E_i (E_i contracted, a_i rational) pairing to zero
    with every contracted component.
    """
    idx = g.indices(contracted)
    if not idx:
        return Cycle(g, tuple(Fraction(a) for a in c.coefficients))
    for i in idx:
        if c.coefficients[i] != 0:
            raise PreconditionError(f"cycle has a nonzero coefficient on contracted vertex '{g.ids[i]}'")

    A = sp.Matrix([[g.matrix[i][j] for j in idx] for i in idx])
    rhs = sp.Matrix([-g.pair_vertex(c.coefficients, i) for i in idx])
    solution = A.LUsolve(rhs)

    vec = [Fraction(a) for a in c.coefficients]
    for pos, i in enumerate(idx):
        value = sp.Rational(solution[pos])
        vec[i] = Fraction(int(value.p), int(value.q))
    return Cycle(g, tuple(vec))
