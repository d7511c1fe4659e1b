# Time the readout pipeline stage by stage
import sys
import time

from quartonsim import ReadoutSimulator, RunConfig, read_config

cfg = read_config(sys.argv[1]) if len(sys.argv) > 1 else RunConfig()
sim = ReadoutSimulator(cfg)

stages = [
    ("basis", lambda: sim.basis),
    ("hamiltonian", lambda: sim.hamiltonian),
    ("spectrum", sim.spectrum),
    ("metrics", sim.metrics),
    ("qnd", sim.qnd),
    ("dynamics |0>", lambda: sim.dynamics(0)),
    ("decoherence (no echo)", lambda: sim.decoherence(include_echo=False)),
]

total = 0.0
for name, stage in stages:
    start = time.time()
    stage()
    elapsed = time.time() - start
    total += elapsed
    print(f"{name:24s} {elapsed:8.2f} s")

print(f"{'total':24s} {total:8.2f} s")
print(f"Hilbert space {cfg.solver.dims_a} x {cfg.solver.dims_b}, "
      f"tilt {sim.params.tilt:.3f}")
