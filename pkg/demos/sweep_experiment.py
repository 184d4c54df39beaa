"""A miniature error-rate sweep through the experiment harness.

Runs the antenna sweep of the large-array scenario at desk scale and
prints the aggregated CSV. The same thing is available from the command
line as `ncim run --preset fig8 --desk-scale --out results/`.
"""

import tempfile

from ncim.config import SimConfig
from ncim.harness import SweepSpec, run_experiment

base = SimConfig(K=100, Ka=10, L=30, I=2, snr_db=5.0, master_seed=1,
                 algorithms=("ae-jabid", "benchmark1", "somp"))
sweep = SweepSpec("M", (16, 32))

with tempfile.TemporaryDirectory() as tmp:
    path = run_experiment(base, sweep, f"{tmp}/antenna_sweep.csv",
                          trials=20, experiment="antenna-sweep")
    print(open(path, encoding="utf-8").read())

print("Columns: one row per (sweep value, algorithm); error rates are")
print("means over paired trials, cm/ec the complexity and efficiency scores.")
