import os

import polars as pl
import pytest

from conftest import ell_chain
from src import verify
from src.cli import main, run_command
from src.corpus import CORPUS, corpus_verify, hypersurface_genera, chain_genera
from src.graph_core import format_graph, parse_graph
from src.lattice_engine import fundamental_cycle
from src.reporting import REPORT_COLUMNS, format_cycle, parse_cycle_pairs

GRAPHS_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "graphs")


def graph_file(name):
    return os.path.join(GRAPHS_DIR, name)


@pytest.fixture
def write_graph(tmp_path):
    def _write(text, name="g.graph"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write


def lines_of(text):
    return text.splitlines()


# --- Subcommands ---
def test_zariski_command():
    assert run_command(["zariski", "2", "9"]) == (0, "br_m = 4\n")


def test_zariski_precondition_exit_code(capsys):
    code, text = run_command(["zariski", "3", "2"])
    assert code == 4
    assert text == ""
    assert "error = need 2 <= a <= b" in capsys.readouterr().err


def test_invariants_b346():
    code, text = run_command(["invariants", graph_file("b346.graph")])
    assert code == 0
    out = lines_of(text)
    assert "graph = B346" in out
    assert "Z_f = F0:2 F1:1 F2:1 F3:1" in out
    assert "p_f = 2" in out
    assert "p_a = 2" in out


def test_validation_error_exit_code(write_graph, capsys):
    code, _ = run_command(["invariants", write_graph("v a sq=1\n")])
    assert code == 3
    assert "error = " in capsys.readouterr().err


def test_parse_error_exit_codes(write_graph, tmp_path):
    assert run_command(["invariants", write_graph("v a sq=x\n")])[0] == 2
    assert run_command(["invariants", str(tmp_path / "missing.graph")])[0] == 2


def test_non_utf8_file_is_a_parse_error(tmp_path, capsys):
    path = tmp_path / "bad.graph"
    path.write_bytes(b"v a sq=-2 \xff\n")
    assert run_command(["invariants", str(path)])[0] == 2
    assert "not valid UTF-8" in capsys.readouterr().err


def test_help_is_captured(capsys):
    code, text = run_command(["zariski", "--help"])
    assert code == 0
    assert text.startswith("usage:")
    assert capsys.readouterr().out == ""


def test_argparse_errors_exit_two():
    assert run_command(["condition", graph_file("chain3.graph"), "--l", "L", "--mode", "loose"])[0] == 2
    assert run_command([])[0] == 2


def test_condition_exit_codes(write_graph):
    code, text = run_command(["condition", graph_file("chain3.graph"), "--l", "L"])
    assert code == 0
    assert lines_of(text) == ["mode = exact", "holds = yes", "margin = 1", "chi_L = 0"]

    path = write_graph("v E sq=-4 g=3\ncycle L E=-1\n")
    code, text = run_command(["condition", path, "--l", "L"])
    assert code == 1
    assert "witness = E:1" in lines_of(text)


def test_condition_accepts_inline_cycle():
    code, text = run_command(["condition", graph_file("chain3.graph"), "--l", "E1:-1,E2:-1,E3:-1", "--mode", "remark1"])
    assert code == 0
    assert "mode = remark1" in lines_of(text)


def test_unknown_cycle_name(capsys):
    code, _ = run_command(["mc", graph_file("chain3.graph"), "--cycle", "nope"])
    assert code == 4
    assert "no cycle named 'nope'" in capsys.readouterr().err


def test_chain_set_and_decomposition_commands():
    code, text = run_command(["b", graph_file("chain3.graph"), "--restrict-to", "L"])
    assert (code, lines_of(text)[0]) == (0, "count = 3")
    code, text = run_command(["b", graph_file("chain3.graph")])
    assert lines_of(text)[0] == "count = 6"
    code, text = run_command(["ccc", graph_file("chain3.graph"), "--cycle", "E1:2,E2:2,E3:1"])
    assert lines_of(text) == [
        "parts = 2", "part1 = 1 x E1:1 E2:1 E3:1", "part2 = 1 x E1:1 E2:1 E3:0", "fallback = no"
    ]


def test_minimal_model_and_fundamental_cycle_commands():
    code, text = run_command(["mc", graph_file("chain3.graph"), "--cycle", "E"])
    assert lines_of(text) == ["mc = E1:1 E2:0 E3:0", "chi = 0"]
    code, text = run_command(["zf", graph_file("b346.graph"), "--support", "F0,F1"])
    assert lines_of(text) == ["Z = F0:1 F1:1 F2:0 F3:0", "chi = 0"]


def test_lambda_and_bounds_commands():
    code, text = run_command(["lambda", graph_file("b346.graph"), "--ideal", "Zf"])
    assert code == 0
    assert lines_of(text)[:2] == ["lambda = 1", "lambda_plus_two = 3"]
    code, text = run_command(["bounds", graph_file("star_ac.graph"), "--ideal", "z"])
    out = lines_of(text)
    assert code == 0
    for line in ("pa_plus_one = 3", "lambda_plus_two = 2", "ac_delta = 3", "best = 2", "global_best = 3"):
        assert line in out


def test_bounds_with_gonality(write_graph):
    path = write_graph("graph HY5\nv E sq=-5 g=6\ncycle z E=1\n")
    code, text = run_command(["bounds", path, "--ideal", "z", "--gonality", "4"])
    out = lines_of(text)
    for line in ("pa_plus_one = 7", "lambda_plus_two = 4", "ac_gonality = 4", "best = 4", "global_best = 4"):
        assert line in out


def test_almost_cone_and_elliptic_commands():
    code, text = run_command(["almost-cone", graph_file("chain3.graph")])
    assert lines_of(text)[0] == "almost_cone = no"
    code, text = run_command(["almost-cone", graph_file("star_ac.graph")])
    assert lines_of(text)[:3] == ["almost_cone = yes", "central = C", "genus = 2"]
    code, text = run_command(["elliptic-seq", graph_file("chain3.graph")])
    out = lines_of(text)
    assert out[0] == "length = 3"
    assert out[-1] == "blocks = E1,E2,E3 | E1,E2 | E1"


def test_main_writes_stdout(capsys):
    assert main(["zariski", "2", "2"]) == 0
    assert capsys.readouterr().out == "br_m = 1\n"


# --- Cycle text formats ---
def test_cycle_pairs_round_trip(b346):
    z = fundamental_cycle(b346)
    assert parse_cycle_pairs(b346, format_cycle(z)) == z
    text = format_graph(b346) + "cycle Zf " + format_cycle(z).replace(":", "=") + "\n"
    g, cycles = parse_graph(text)
    assert g == b346
    assert cycles["Zf"] == z


# --- Corpus ---
def test_corpus_closed_forms():
    assert [hypersurface_genera(d) for d in range(3, 9)] == [(1, 1), (3, 3), (6, 6), (10, 13), (15, 22), (21, 37)]
    assert chain_genera(3, 1) == (3, 4)
    assert all(e.expectations for e in CORPUS)


def test_corpus_names_are_unique():
    names = [e.name for e in CORPUS]
    assert len(names) == len(set(names))
    assert {"A1", "HY3", "HY8", "ELL_CHAIN_1_3", "B346", "TWIN", "STAR_AC", "STAR_ELL"} <= set(names)


def test_corpus_passes_and_is_deterministic(tmp_path):
    ok, df = corpus_verify(results_dir=str(tmp_path))
    assert ok
    assert df.columns == REPORT_COLUMNS
    assert df.filter(pl.col("status") == "FAIL").height == 0
    saved = pl.read_csv(tmp_path / "corpus_report.csv", infer_schema_length=0)
    assert saved.height == df.height
    _, again = corpus_verify(write=False)
    assert again.equals(df)


# --- Verification driver ---
def test_verify_graph_small_box():
    g, cycles = parse_graph(open(graph_file("chain3.graph"), encoding="utf-8").read())
    passed, results = verify.verify_graph(g, cycles, limit=64)
    assert passed
    assert [name for name, _, _ in results] == [name for name, _ in verify.CHECKS]


def test_verify_command_with_env_limit(monkeypatch):
    monkeypatch.setenv(verify.MAX_BOX_ENV, "200")
    code, text = run_command(["verify", graph_file("star_ac.graph")])
    assert code == 0
    assert "🎉 SUCCESS" in text


def test_max_box_env(monkeypatch, capsys):
    monkeypatch.delenv(verify.MAX_BOX_ENV, raising=False)
    assert verify.max_box() == verify.DEFAULT_MAX_BOX
    monkeypatch.setenv(verify.MAX_BOX_ENV, "500")
    assert verify.max_box() == 500
    monkeypatch.setenv(verify.MAX_BOX_ENV, "lots")
    assert verify.max_box() == verify.DEFAULT_MAX_BOX
    assert "Ignoring" in capsys.readouterr().err


def test_box_side():
    assert verify.box_side(3, 64) == 3
    assert verify.box_side(2, 1) == 0
    assert verify.box_side(1, 1000) == 999


def test_chain_fixture_matches_graph_file():
    g, cycles = parse_graph(open(graph_file("chain3.graph"), encoding="utf-8").read())
    assert g.matrix == ell_chain(1, 3).matrix
    assert cycles["L"] == -cycles["E"]
