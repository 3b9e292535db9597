# # Command line and benchmark files
#
# Everything in the library is reachable from the `regsubset` command.
# This walkthrough drives it from Python with subprocess so it can run as
# a script; the same commands work in a shell.

import csv
import json
import subprocess
import sys
import tempfile
from pathlib import Path

work = Path(tempfile.mkdtemp())


def cli(*args):
    out = subprocess.run([sys.executable, "-m", "regsubset", *map(str, args)],
                         capture_output=True, text=True, check=True)
    return out.stdout


# ## Generate an instance
#
# The CSV has a `b` column plus one column per predictor; a JSON sidecar
# records the generator settings.

cli("generate", "--m", 10, "--n", 40, "--seed", 5, "--out", work / "inst.csv")
print((work / "inst.json").read_text())

# ## Solve it and score a hand-picked subset

doc = json.loads(cli("solve", work / "inst.csv", "--objective", "mse", "--method", "mip"))
print(doc["subset"], round(doc["objective"], 4), doc["big_m"]["method"])

names = ",".join(doc["subset"][:2])
print(json.loads(cli("evaluate", work / "inst.csv", "--subset", names, "--objective", "mse")))

# ## A small benchmark sweep
#
# `bench` writes one CSV row per (instance, criterion, method), an
# aggregate table, and a JSON dump of both.

print(cli("bench", "--out", work / "bench", "--methods", "stepwise,mip,exhaustive",
          "--replicates", 1, "--time-limit", 30))
with open(work / "bench" / "thin" / "aggregates.csv") as fh:
    for row in csv.DictReader(fh):
        print(row["m"], row["n"], row["objective_kind"], row["method"].ljust(10),
              "gap_sol", round(float(row["mean_gap_sol"]), 4))
