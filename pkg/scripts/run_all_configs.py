"""Run every shipped config through the CLI and print exit codes."""

import argparse
import sys
from pathlib import Path

from contractlab import cli


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", default=str(Path(__file__).parents[1] / "configs"))
    ap.add_argument("--out", default="out")
    ap.add_argument("--threads", type=int, default=None)
    args = ap.parse_args()
    Path(args.out).mkdir(parents=True, exist_ok=True)
    worst = 0
    for cfg in sorted(Path(args.configs).glob("*.json")):
        import json

        exp = json.loads(cfg.read_text())["experiment"]
        argv = [exp, "--config", str(cfg), "--out", str(Path(args.out) / cfg.stem)]
        if args.threads:
            argv += ["--threads", str(args.threads)]
        code = cli.main(argv)
        print(f"{cfg.name}: exit {code}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
