import operator
from dataclasses import dataclass, field

from src.graph_core import ensure_valid, parse_graph
from src.invariant_bounds import (
    almost_cone_profile,
    br_bound_report,
    lambda_exact,
    zariski_formula,
)
from src.lattice_engine import genus_invariants, minimal_model
from src import reporting

RELATIONS = {"==": operator.eq, ">=": operator.ge, "<=": operator.le}


@dataclass(frozen=True)
class Expectation:
    quantity: str
    expected: int
    provenance: str
    relation: str = "=="
    gonality: int = 2
    pg: int = None


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    graph_source: str
    expectations: tuple = field(default_factory=tuple)

    def load(self):
        g, cycles = parse_graph(self.graph_source)
        return ensure_valid(g), cycles


# --- Closed-form genera ---
def hypersurface_genera(d):
    """(p_f, p_a) of x^d + y^d + z^d = 0's cone-like resolution."""
    u = d // 2 - 1
    return (d - 1) * (d - 2) // 2, 1 + d * u * (d - u - 2) // 2


def chain_genera(p, m):
    return p, m * p * (p - 1) // 2 + 1


# --- Graph sources ---
def single_vertex_source(name, sq, genus):
    return f"graph {name}\nv E sq={sq}" + (f" g={genus}" if genus else "") + "\n"


def chain_source(p, m):
    lines = [f"graph ELL_CHAIN_{p}_{m}", f"v E1 sq=-1 g={p}"]
    lines += [f"v E{i} sq=-2" for i in range(2, m + 1)]
    lines += [f"e E{i} E{i + 1}" for i in range(1, m)]
    return "\n".join(lines) + "\n"


B346_SOURCE = """graph B346
# x^3 + y^4 + z^6 = 0
v F0 sq=-2 g=1
v F1 sq=-2
v F2 sq=-2
v F3 sq=-2
e F0 F1
e F0 F2
e F0 F3
"""

TWIN_SOURCE = """graph TWIN
v E1 sq=-2
v E2 sq=-3
v E3 sq=-1 g=1
v E4 sq=-1 g=1
e E2 E1
e E2 E3
e E2 E4
"""

STAR_AC_SOURCE = """graph STAR_AC
v C sq=-2 g=2
v E1 sq=-2
e C E1
cycle z C=1 E1=2
"""

STAR_ELL_SOURCE = """graph STAR_ELL
v C sq=-3 g=1
v L1 sq=-2
v L2 sq=-2
e C L1
e C L2
cycle z C=2 L1=3 L2=3
"""


def _entries():
    entries = [CorpusEntry("A1", single_vertex_source("A1", -2, 0), (
        Expectation("p_f", 0, "rational double point"),
        Expectation("p_a", 0, "rational double point"),
        Expectation("best", 1, "rational iff br = 1"),
    ))]

    for d in range(3, 9):
        p_f, p_a = hypersurface_genera(d)
        exps = [
            Expectation("p_f", p_f, "hypersurface genus formula"),
            Expectation("p_a", p_a, "hypersurface genus formula"),
            Expectation("lambda_plus_two", d - 1, "br = d - 1 for homogeneous hypersurfaces"),
            Expectation("ac_degree", d, "cone over a smooth plane curve"),
            Expectation("best", d - 1, "br = d - 1 with gonality d - 1", gonality=d - 1),
            Expectation("global_best", p_f + 1, "br attains g + 1 for special analytic type"),
        ]
        entries.append(CorpusEntry(f"HY{d}", single_vertex_source(f"HY{d}", -d, p_f), tuple(exps)))

    for p in (1, 2, 3):
        for m in (1, 2, 3):
            p_f, p_a = chain_genera(p, m)
            entries.append(CorpusEntry(f"ELL_CHAIN_{p}_{m}", chain_source(p, m), (
                Expectation("p_f", p_f, "elliptic chain genus formula"),
                Expectation("p_a", p_a, "elliptic chain genus formula"),
                Expectation("zf_reduced", 1, "elliptic chain fundamental cycle"),
                Expectation("ac_degree", 1 if m == 1 else 0, "Z_f.E1 = -1" if m == 1 else "Z_f.E1 = 0"),
            )))

    entries += [
        CorpusEntry("B346", B346_SOURCE, (
            Expectation("p_f", 2, "x^3 + y^4 + z^6"),
            Expectation("p_a", 2, "x^3 + y^4 + z^6"),
            Expectation("lambda", 1, "derived: B(Z) sweep"),
            Expectation("mc_is_zf", 1, "x^3 + y^4 + z^6 minimal model"),
            Expectation("best", 3, "bound with p_g = 3", pg=3),
            Expectation("best", 2, "true br(m) = 2", relation=">=", pg=3),
        )),
        CorpusEntry("TWIN", TWIN_SOURCE, (
            Expectation("p_f", 2, "two elliptic leaves"),
            Expectation("p_a", 3, "derived: chi((1,2,2,2)) = -2, oracle minimum"),
            Expectation("zf_reduced", 1, "derived: anti-nef minimality"),
            Expectation("pa_plus_one", zariski_formula(2, 9), "br(m) via zariski_formula(2, 9)", relation=">="),
        )),
        CorpusEntry("STAR_AC", STAR_AC_SOURCE, (
            Expectation("p_f", 2, "derived genus-2 star"),
            Expectation("p_a", 2, "derived genus-2 star"),
            Expectation("ac_degree", 1, "derived: Z_f.C = -1"),
            Expectation("global_best", 3, "g + 1 with gonality 2"),
        )),
        CorpusEntry("STAR_ELL", STAR_ELL_SOURCE, (
            Expectation("p_f", 1, "derived elliptic star"),
            Expectation("ac_degree", 1, "derived: Z_f.C = -1"),
            Expectation("mc_is_zf", 0, "derived: mc(Z_f) = C"),
        )),
    ]
    return entries


CORPUS = _entries()


# --- Measurement ---
def measure(g, exp):
    inv = genus_invariants(g)
    if exp.quantity == "p_f":
        return inv.p_f
    if exp.quantity == "p_a":
        return inv.p_a
    if exp.quantity == "pa_plus_one":
        return inv.p_a + 1
    if exp.quantity == "zf_reduced":
        return int(inv.z_f.is_reduced_on_support())
    if exp.quantity == "mc_is_zf":
        return int(minimal_model(inv.z_f) == inv.z_f)
    if exp.quantity == "ac_degree":
        profile = almost_cone_profile(g)
        return profile.degree_d if profile else 0
    if exp.quantity == "lambda":
        return lambda_exact(g, inv.z_f).value
    report = br_bound_report(g, inv.z_f, pg=exp.pg, gonality_lower=exp.gonality)
    if exp.quantity == "best":
        return report.best
    if exp.quantity == "global_best":
        return report.global_best
    value = report.value(exp.quantity)
    if value is None:
        raise KeyError(f"unknown corpus quantity '{exp.quantity}'")
    return value


def check_entry(entry):
    g, _ = entry.load()
    rows = []
    for exp in entry.expectations:
        actual = measure(g, exp)
        ok = RELATIONS[exp.relation](actual, exp.expected)
        expected = str(exp.expected) if exp.relation == "==" else f"{exp.relation} {exp.expected}"
        rows.append((entry.name, exp.quantity, expected, str(actual), "PASS" if ok else "FAIL", exp.provenance))
    return rows


def corpus_verify(results_dir=reporting.RESULTS_DIR, write=True):
    """Runs every bundled entry; returns (all passed, report frame)."""
    print(f"🚀 Running corpus ({len(CORPUS)} entries)...\n")
    rows = []
    for entry in CORPUS:
        entry_rows = check_entry(entry)
        failed = [r for r in entry_rows if r[4] == "FAIL"]
        print(f"{'❌ FAIL' if failed else '✅ PASS'}: {entry.name}")
        rows.extend(entry_rows)

    df = reporting.report_frame(rows)
    reporting.print_corpus_table(df)
    if write:
        path = reporting.write_corpus_report(df, results_dir)
        print(f"💾 Saved report to {path}")
    ok = all(r[4] == "PASS" for r in rows)
    return ok, df
