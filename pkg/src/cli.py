import argparse
import contextlib
import io
import sys

from src.graph_core import (
    GraphParseError,
    PreconditionError,
    SingLatticeError,
    ensure_valid,
    euler_chi,
    parse_graph,
)
from src.invariant_bounds import (
    MODES,
    almost_cone_profile,
    br_bound_report,
    elliptic_sequence,
    lambda_exact,
    restricted_B,
    vanishing_condition,
    zariski_formula,
)
from src.lattice_engine import (
    ccc_decompose,
    enumerate_B,
    fundamental_cycle,
    genus_invariants,
    minimal_model,
)
from src import corpus, verify
from src.reporting import format_cycle, format_ids, kv, parse_cycle_pairs


# --- Input helpers ---
def load_graph(path):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise GraphParseError(f"cannot read {path}: {e.strerror}") from None
    except UnicodeDecodeError as e:
        raise GraphParseError(f"{path} is not valid UTF-8: {e.reason} at byte {e.start}") from None
    g, cycles = parse_graph(text)
    return ensure_valid(g), cycles


def lookup_cycle(g, cycles, name):
    if name in cycles:
        return cycles[name]
    if ":" in name:
        return parse_cycle_pairs(g, name)
    raise PreconditionError(f"no cycle named '{name}' in the graph file")


def split_ids(text):
    return [t for t in text.split(",") if t] if text else None


# --- Subcommands (each returns (exit code, lines)) ---
def cmd_invariants(args):
    g, _ = load_graph(args.file)
    inv = genus_invariants(g)
    return 0, [
        kv("graph", g.name or args.file),
        kv("vertices", len(g)),
        kv("negative_definite", "yes"),
        kv("Z_f", format_cycle(inv.z_f)),
        kv("p_f", inv.p_f),
        kv("p_a", inv.p_a),
        kv("p_a_witness", format_cycle(inv.pa_witness)),
    ]


def cmd_zf(args):
    g, _ = load_graph(args.file)
    z = fundamental_cycle(g, split_ids(args.support))
    return 0, [kv("Z", format_cycle(z)), kv("chi", euler_chi(z))]


def cmd_b(args):
    g, cycles = load_graph(args.file)
    if args.restrict_to:
        chain = restricted_B(g, lookup_cycle(g, cycles, args.restrict_to))
    else:
        chain = enumerate_B(g)
    lines = [kv("count", len(chain))]
    lines += [kv(f"C{n}", format_cycle(c)) for n, c in enumerate(chain, start=1)]
    return 0, lines


def cmd_ccc(args):
    g, cycles = load_graph(args.file)
    dec = ccc_decompose(lookup_cycle(g, cycles, args.cycle))
    lines = [kv("parts", len(dec.parts))]
    lines += [kv(f"part{n}", f"{m} x {format_cycle(c)}") for n, (m, c) in enumerate(dec.parts, start=1)]
    lines.append(kv("fallback", "yes" if dec.fallback_used else "no"))
    return 0, lines


def cmd_mc(args):
    g, cycles = load_graph(args.file)
    d = lookup_cycle(g, cycles, args.cycle)
    m = minimal_model(d)
    return 0, [kv("mc", format_cycle(m)), kv("chi", euler_chi(m))]


def cmd_condition(args):
    g, cycles = load_graph(args.file)
    verdict = vanishing_condition(g, lookup_cycle(g, cycles, args.l), args.mode)
    lines = [
        kv("mode", verdict.mode),
        kv("holds", "yes" if verdict.holds else "no"),
        kv("margin", verdict.margin),
        kv("chi_L", verdict.chi_l),
    ]
    if verdict.witness is not None:
        lines.append(kv("witness", format_cycle(verdict.witness)))
    return (0 if verdict.holds else 1), lines


def cmd_lambda(args):
    g, cycles = load_graph(args.file)
    lam = lambda_exact(g, lookup_cycle(g, cycles, args.ideal))
    return 0, [
        kv("lambda", lam.value),
        kv("lambda_plus_two", max(lam.value + 2, 1)),
        kv("witness_C1", format_cycle(lam.c1)),
        kv("witness_C2", format_cycle(lam.c2)),
    ]


def cmd_bounds(args):
    g, cycles = load_graph(args.file)
    report = br_bound_report(g, lookup_cycle(g, cycles, args.ideal), pg=args.pg, gonality_lower=args.gonality)
    lines = [kv(entry.label, entry.value) for entry in report.bounds]
    lines += [kv("best", report.best), kv("global_best", report.global_best)]
    lines += [kv("note", n) for n in report.notes]
    lines += [kv(f"note_{e.label}", e.note) for e in report.bounds if e.note]
    return 0, lines


def cmd_almost_cone(args):
    g, _ = load_graph(args.file)
    profile = almost_cone_profile(g)
    if not profile:
        return 0, [kv("almost_cone", "no"), kv("reason", profile.reason)]
    return 0, [
        kv("almost_cone", "yes"),
        kv("central", profile.central),
        kv("genus", profile.genus_g),
        kv("degree", profile.degree_d),
        kv("delta", profile.delta),
    ]


def cmd_elliptic_seq(args):
    g, _ = load_graph(args.file)
    seq = elliptic_sequence(g, split_ids(args.support))
    lines = [kv("length", len(seq))]
    lines += [kv(f"Z{n}", format_cycle(z)) for n, z in enumerate(seq)]
    lines.append(kv("blocks", " | ".join(format_ids(z.support_ids, g) for z in seq)))
    return 0, lines


def cmd_zariski(args):
    return 0, [kv("br_m", zariski_formula(args.a, args.b))]


def cmd_verify(args):
    g, cycles = load_graph(args.file)
    ok, _ = verify.verify_graph(g, cycles)
    return (0 if ok else 5), []


def cmd_corpus(args):
    ok, _ = corpus.corpus_verify(write=not args.no_write)
    return (0 if ok else 1), []


def build_parser():
    parser = argparse.ArgumentParser(prog="singlattice", description="Combinatorial invariants of resolution graphs")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, func, with_file=True):
        p = sub.add_parser(name)
        if with_file:
            p.add_argument("file")
        p.set_defaults(func=func)
        return p

    add("invariants", cmd_invariants)
    add("zf", cmd_zf).add_argument("--support")
    add("b", cmd_b).add_argument("--restrict-to", dest="restrict_to")
    add("ccc", cmd_ccc).add_argument("--cycle", required=True)
    add("mc", cmd_mc).add_argument("--cycle", required=True)
    p = add("condition", cmd_condition)
    p.add_argument("--l", required=True)
    p.add_argument("--mode", choices=MODES, default="exact")
    add("lambda", cmd_lambda).add_argument("--ideal", required=True)
    p = add("bounds", cmd_bounds)
    p.add_argument("--ideal", required=True)
    p.add_argument("--pg", type=int)
    p.add_argument("--gonality", type=int, default=2)
    add("almost-cone", cmd_almost_cone)
    add("elliptic-seq", cmd_elliptic_seq).add_argument("--support")
    p = add("zariski", cmd_zariski, with_file=False)
    p.add_argument("a", type=int)
    p.add_argument("b", type=int)
    add("verify", cmd_verify)
    add("corpus", cmd_corpus, with_file=False).add_argument("--no-write", action="store_true")
    return parser


def run_command(argv):
    """Runs one subcommand. Returns (exit code, stdout text)."""
    parser = build_parser()
    out = io.StringIO()
    err = io.StringIO()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as e:
        sys.stderr.write(err.getvalue())
        return (e.code if isinstance(e.code, int) else 2), out.getvalue()

    try:
        with contextlib.redirect_stdout(out):
            code, lines = args.func(args)
    except SingLatticeError as e:
        print(kv("error", e), file=sys.stderr)
        return e.exit_code, out.getvalue()
    text = out.getvalue() + "".join(line + "\n" for line in lines)
    return code, text


def main(argv=None):
    code, text = run_command(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
