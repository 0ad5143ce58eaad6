"""Run every config in configs/ and report each one's exit code.

    python scripts/run_all_configs.py [--out runs]

Configs whose name starts with ``invalid`` are expected to exit with 2.
"""

import argparse
import sys
from pathlib import Path

from dcforge import cli

ROOT = Path(__file__).resolve().parents[1]


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default=str(ROOT / "runs"))
    args = ap.parse_args()
    bad = 0
    for cfg in sorted((ROOT / "configs").glob("*.cfg")):
        want = 2 if cfg.stem.startswith("invalid") else 0
        out = Path(args.out) / cfg.stem
        code = cli.main(["run", str(cfg), "--out", str(out)])
        if code == 0:
            cli.main(["report", str(out)])
        ok = code == want
        bad += not ok
        print(f"{'ok  ' if ok else 'BAD '} {cfg.name}: exit {code} (expected {want})", flush=True)
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
