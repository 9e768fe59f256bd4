import glob
import os
import sys
import time

from src import corpus, verify
from src.cli import load_graph, main as cli_main
from src.graph_core import SingLatticeError

GRAPHS_DIR = "data/graphs"


def run_pipeline():
    """
    Master orchestration: corpus regression, then every bundled graph file
    through the invariant checks.
    """
    start_time = time.time()
    print("🚀 STARTING PIPELINE: resolution graph invariant audit\n")

    # --- PHASE 1: Corpus ---
    print("--- [PHASE 1] Corpus expectations ---")
    corpus_ok, _ = corpus.corpus_verify()

    # --- PHASE 2: Graph files ---
    print("\n--- [PHASE 2] Invariant checks on bundled graphs ---")
    files = sorted(glob.glob(os.path.join(GRAPHS_DIR, "*.graph")))
    if not files:
        print(f"❌ No graph files found in {GRAPHS_DIR}")
    failures = []
    for path in files:
        try:
            g, cycles = load_graph(path)
            ok, _ = verify.verify_graph(g, cycles)
        except SingLatticeError as e:
            print(f"   ❌ {os.path.basename(path)}: {e}")
            ok = False
        if not ok:
            failures.append(os.path.basename(path))
        print()

    elapsed = time.time() - start_time
    if corpus_ok and not failures:
        print(f"✅ PIPELINE COMPLETE in {elapsed:.1f} seconds.")
        return 0
    print(f"⚠️  PIPELINE FINISHED WITH FAILURES in {elapsed:.1f} seconds: corpus {'ok' if corpus_ok else 'failed'}, graphs {failures or 'ok'}")
    return 1


if __name__ == "__main__":
    sys.exit(cli_main() if len(sys.argv) > 1 else run_pipeline())
