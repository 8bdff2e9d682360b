"""Run every CLI command on the bundled configs and write the reports to a directory.

    python scripts/run_reference_jobs.py [out_dir]
"""

import sys
from pathlib import Path

from padic_zeta.cli import main

CONFIGS = Path(__file__).resolve().parent / "configs"

JOBS = [
    ("lsy", "lsy_z2_plus_1.json"),
    ("lsy", "lsy_cubic.json"),
    ("partition", "reference.json"),
    ("trace-check", "reference.json"),
    ("zeta", "reference.json"),
    ("zeta", "reference_with_charts.json"),
    ("dim", "reference.json"),
    ("dim", "golden_mean.json"),
]


def run_all(out_dir: Path) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    worst = 0
    for command, cfg in JOBS:
        out = out_dir / f"{command}__{Path(cfg).stem}.json"
        code = main([command, "--config", str(CONFIGS / cfg), "--out", str(out)])
        print(f"{command:12s} {cfg:30s} exit {code}  -> {out}")
        worst = max(worst, code)
    return worst


if __name__ == "__main__":
    sys.exit(run_all(Path(sys.argv[1] if len(sys.argv) > 1 else "reports")))
