"""
Command-line pipeline
=====================

Every computation is also reachable from the ``nlkit`` command, which reads
tuple JSON files and writes JSON, or CSV for sweeps.
"""

import json
import math
import subprocess
import sys
import tempfile
from pathlib import Path

from nlkit import make_theta_family, pr_box


def nlkit(*args):
    out = subprocess.run([sys.executable, "-m", "nlkit", *args], capture_output=True, text=True, check=True)
    return out.stdout


tmp = Path(tempfile.mkdtemp())
make_theta_family(math.pi / 4).save(tmp / "theta.json")
make_theta_family(0.5, extended=True).save(tmp / "p.json")
make_theta_family(0.5, extended=True, primed=True).save(tmp / "p_primed.json")
pr_box().save(tmp / "pr.json")

print((tmp / "theta.json").read_text()[:200], "...")

####################################################################
# Verdicts come back as data, with exit code 0.

print(nlkit("validate", str(tmp / "theta.json")))
print(nlkit("chsh", str(tmp / "pr.json")))
print(json.loads(nlkit("order", str(tmp / "p.json"), str(tmp / "p_primed.json")))["terms"][0]["wiring"])
print(nlkit("threshold"))

####################################################################
# A sweep as CSV, and a seeded simulation.

print(nlkit("theta-sweep", "--from", "0", "--to", "0.7854", "--steps", "5", "--csv"))
print(nlkit("--threads", "2", "simulate", str(tmp / "theta.json"), "--rounds", "100000", "--seed", "7"))
