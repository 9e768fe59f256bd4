import os

import polars as pl

from src.graph_core import Cycle, GraphParseError, INT_PATTERN

RESULTS_DIR = "data/results"
REPORT_COLUMNS = ["entry", "quantity", "expected", "actual", "status", "provenance"]


def kv(key, value):
    return f"{key} = {value}"


def format_cycle(c):
    """`id:coef` pairs in declaration order."""
    return " ".join(f"{vid}:{a}" for vid, a in zip(c.graph.ids, c.coefficients))


def parse_cycle_pairs(g, text):
    """Reads `id:coef` pairs (space or comma separated) back into a cycle on g."""
    vec = [0] * len(g)
    for token in text.replace(",", " ").split():
        vid, sep, value = token.partition(":")
        if not sep or vid not in g.id_index or not INT_PATTERN.match(value):
            raise GraphParseError(f"expected '<id>:<int>', got '{token}'")
        vec[g.id_index[vid]] = int(value)
    return Cycle(g, tuple(vec))


def format_ids(ids, g):
    return ",".join(sorted(ids, key=g.id_index.get))


def report_frame(rows):
    return pl.DataFrame(rows, schema=REPORT_COLUMNS, orient="row")


def write_corpus_report(df, results_dir=RESULTS_DIR):
    os.makedirs(results_dir, exist_ok=True)
    path = os.path.join(results_dir, "corpus_report.csv")
    df.write_csv(path)
    return path


def print_corpus_table(df):
    with pl.Config(tbl_rows=-1, tbl_width_chars=160, fmt_str_lengths=60):
        print(df)
    failed = df.filter(pl.col("status") == "FAIL")
    print(f"\n📊 {df.height} expectations, {df.height - failed.height} passed, {failed.height} failed")
