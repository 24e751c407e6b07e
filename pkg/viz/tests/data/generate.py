"""Regenerate the golden run directories using the solver CLI.

Run from the repository root with the solver package installed:

    python viz/tests/data/generate.py

The golden outputs freeze the on-disk formats the figure tools must parse.
"""

import json
import shutil
import subprocess
import sys
from pathlib import Path

HERE = Path(__file__).parent
GOLDEN = HERE / "golden"

RUN_1D = """
grid.dim = 1
grid.n = 64
model.epsilon = 0.2
model.alpha = 0.05
scheme.kind = UL
scheme.theta = 0.75
steps.T = 0.05
steps.n = 50
ic.kind = abs_sin
output.snapshot_times = 0.0, 0.025, 0.05
output.dir = run1d
"""

RUN_2D = """
grid.dim = 2
grid.n = 32
model.epsilon = 0.2
model.alpha = 0.0
scheme.kind = UL
scheme.theta = 0.75
steps.T = 0.02
steps.n = 20
ic.kind = two_circles
output.snapshot_times = 0.0, 0.01, 0.02
output.dir = run2d
"""

RUN_VL = """
grid.dim = 1
grid.n = 64
model.epsilon = 0.2
model.alpha = 0.05
scheme.kind = VL
scheme.theta = 0.75
steps.T = 0.005
steps.n = 50
steps.kind = random_admissible
run.seed = 5
ic.kind = abs_sin
output.dir = runvl
"""

MMS = """
grid.dim = 1
grid.n = 64
model.epsilon = 0.2
scheme.kind = UL
scheme.theta = 1.0
scheme.s1 = 0.0
steps.T = 0.15
ic.kind = abs_sin
mms.enabled = true
mms.tau_list = 2e-3, 1e-3, 5e-4
output.dir = mms_theta1
"""


def main():
    if GOLDEN.exists():
        shutil.rmtree(GOLDEN)
    GOLDEN.mkdir(parents=True)
    for name, text in [("run1d", RUN_1D), ("run2d", RUN_2D),
                       ("runvl", RUN_VL), ("mms_theta1", MMS)]:
        cfg = GOLDEN / f"{name}.cfg"
        cfg.write_text(text)
        subprocess.run([sys.executable, "-m", "anich.cli", "run", str(cfg),
                        "-o", str(GOLDEN)], check=True)
        cfg.unlink()

    # summary the contract tests compare parsed values against
    from anich.gridio import read_log, read_snapshot

    summary = {}
    for name in ("run1d", "run2d", "runvl"):
        recs = read_log(GOLDEN / name / "log.csv")
        summary[name] = {
            "n_records": len(recs),
            "first_t": recs[0].t,
            "last_t": recs[-1].t,
            "first_mass": recs[0].mass,
            "last_energy_modified": recs[-1].energy_modified,
        }
    field, t = read_snapshot(GOLDEN / "run2d" / "snapshots" / "t_0.f64grid")
    summary["run2d_snapshot"] = {
        "time": t, "n": list(field.grid.n),
        "min": float(field.values.min()), "max": float(field.values.max()),
        "center": float(field.values[16, 16]),
    }
    (GOLDEN / "expected.json").write_text(json.dumps(summary, indent=2) + "\n")
    print("golden outputs written to", GOLDEN)


if __name__ == "__main__":
    main()
