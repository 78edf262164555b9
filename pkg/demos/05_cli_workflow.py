"""Drive the command-line tool from a script and read back its outputs.

Writes a spec file into a temporary directory, runs ``measure`` and
``diffuse`` there and prints the JSON fields.
"""
import json
import os
import subprocess
import sys
import tempfile

work = tempfile.mkdtemp(prefix="fisherq-demo-")
spec = os.path.join(work, "squeezed.spec")
with open(spec, "w") as fh:
    fh.write("kind = squeezed\nr = 0.4\nx0 = 0.5\n")

env = dict(os.environ, FISHERQ_OUT=work)
for command in ("measure", "diffuse"):
    proc = subprocess.run([sys.executable, "-m", "fisherq", command, "--spec", spec],
                          env=env, capture_output=True, text=True)
    print(f"fisherq {command}: exit {proc.returncode}")

with open(os.path.join(work, "measure.json")) as fh:
    report = json.load(fh)
print("metadata:", report["meta"]["version"], report["meta"]["manifest_hash"][:12])
print({k: round(report[k], 6) for k in ("j_nc", "j_r", "delta_x", "delta_p")})

with open(os.path.join(work, "debruijn.json")) as fh:
    rates = json.load(fh)
print({k: round(rates[k], 6) for k in ("f_x", "rate_x", "f_p", "rate_p", "j_r")})
print("outputs in", work)
