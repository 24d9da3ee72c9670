#!/usr/bin/env python3
"""Energy uncertainty as the speed limit of quantum evolution.

A state's ray moves at exactly twice its energy uncertainty (hbar = 1):
d theta / dt = 2 dE.  The cleanest illustration is precession: put an
equal superposition in a static field and watch the overlap with the
initial state wind down to orthogonality at the constant rate 2 dE.
"""

import numpy as np

import qgeom as qg

model = qg.spin_half(1.0)  # H = sz at theta = 0: levels at -+1
sched = qg.schedule(model, {"theta": "0", "phi": "0"})
psi0 = np.array([1.0, 1.0]) / np.sqrt(2)

print("dE of the superposition:", qg.energy_uncertainty(psi0, qg.hamiltonian_at(model, [0, 0])))
print("predicted ray speed 2 dE = 2; first orthogonality at t = pi/4 * 2 = pi/2")
print()

traj = qg.evolve(model, sched, psi0, 0.0, np.pi / 2, 1e-4)
report = qg.aa_consistency(traj)

print("max |measured rate - 2 dE| / rate:", report.max_relative_deviation)
print("norm drift over the whole run:    ", traj.norm_drift_max)
print()

print("accumulated ray angle vs direct fidelity angle to the start:")
accumulated = np.concatenate([[0.0], np.cumsum(traj.step_angle)])
for frac in (0.25, 0.5, 0.75, 1.0):
    k = int(frac * traj.n_steps)
    direct = qg.fidelity_angle(psi0, traj.states[k])
    print(f"  t = {traj.times[k]:.4f}: accumulated = {accumulated[k]:.9f}, "
          f"direct = {direct:.9f}")
print()
print("overlap at the end (orthogonal ray reached):",
      abs(np.vdot(psi0, traj.states[-1])))
print()

print("an eigenstate has dE = 0 and does not move:")
eig = qg.evolve(model, sched, [1.0, 0.0], 0.0, 1.0, 1e-3)
print("  max ray angle per step:", eig.step_angle.max())
