"""Regenerate the frozen files in tests/golden/.

The sweep table is evaluated independently of the package with mpmath at 50
digits, so the golden file is an oracle rather than a snapshot of our own output.

    python scripts/make_golden.py
"""
import json
import subprocess
import sys
from pathlib import Path

import mpmath as mp

GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden"
P1S = ["0.05", "0.1", "0.2"]

mp.mp.dps = 50


def h2(p):
    if p == 0 or p == 1:
        return mp.mpf(0)
    return -p * mp.log(p, 2) - (1 - p) * mp.log(1 - p, 2)


def sweep_rows():
    rows = []
    for p1s in P1S:
        p1 = mp.mpf(p1s)
        for k in range(11):
            alpha = mp.mpf(k) / 20
            rows.append((p1s, mp.nstr(alpha, 3), 1 - h2(p1 + alpha * (1 - 2 * p1))))
    return rows


def main():
    GOLDEN.mkdir(parents=True, exist_ok=True)
    with open(GOLDEN / "alpha_sweep.csv", "w") as fh:
        fh.write("p1,alpha,capacity_bits,mode\n")
        for p1, a, c in sweep_rows():
            fh.write(f"{p1},{a},{mp.nstr(c, 15, min_fixed=-30, max_fixed=30)},closed-form\n")

    spec = {"binary": {"p1": 0.1, "alpha": 0.1}}
    src = GOLDEN / "binary_spec.json"
    src.write_text(json.dumps(spec) + "\n")
    out = subprocess.run(
        [sys.executable, "-m", "macc", "capacity", str(src), "--dump-spec"],
        check=True, capture_output=True, text=True,
    ).stdout
    (GOLDEN / "binary_spec.dump.json").write_text(out)


if __name__ == "__main__":
    main()
