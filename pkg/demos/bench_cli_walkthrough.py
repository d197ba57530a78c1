"""The bench command line, end to end, in a temporary directory.

A run is a subcommand plus a flat key=value config; outputs are plain CSVs
(and optional SVG plots) in a chosen directory, and a fixed config+seed pair
reproduces every byte.  This script writes a small optimizer-comparison
config, runs it twice through the same entry point the `bench` executable
uses, prints what appeared on disk, and verifies the reruns match.
"""

import hashlib
import pathlib
import tempfile

from sketchopt.bench.cli import main as bench_main

CONFIG = """\
# compare full vs leverage-sampled Hessians on a planted instance
subcommand = optimize
dataset = synth:n=400,d=8,heavy_rows=40,heavy_scale=100
loss = nlls_classification
lambda_policy = convex_auto
algorithm = trust_region
schemes = full,ls,uniform
sample_size = 80
seeds = 2
max_outer = 40
grad_tol = 1e-6
"""

with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    config_path = tmp / "optimize.cfg"
    config_path.write_text(CONFIG)
    print("config file:")
    print("  " + "\n  ".join(CONFIG.splitlines()))

    digests = []
    for run in ("first", "second"):
        out = tmp / run
        code = bench_main(["optimize", "--config", str(config_path),
                           "--out", str(out), "--seed", "5", "--svg"])
        assert code == 0, "bench run failed"
        digests.append({p.name: hashlib.sha256(p.read_bytes()).hexdigest()
                        for p in sorted(out.glob("*.csv"))})

    print("\nfiles written by the first run:")
    for path in sorted((tmp / "first").iterdir()):
        print(f"  {path.name:<28} {path.stat().st_size:>7} bytes")

    print("\nsummary.csv:")
    for line in (tmp / "first" / "summary.csv").read_text().splitlines():
        print("  " + line)

    same = digests[0] == digests[1]
    print(f"\nrerun with the same config and seed is byte-identical: {same}")
