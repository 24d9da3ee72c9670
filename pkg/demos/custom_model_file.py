#!/usr/bin/env python3
"""Defining a model in a JSON file, and what degeneracy does to the tensor.

Model files carry Hermitian basis matrices (complex entries as [re, im]
pairs) and coefficient expressions in declared parameters.  This script
writes one, loads it back, and then explores a family with a twofold
degenerate ground level, where the geometric tensor becomes a 2x2 block
per parameter pair and transforms by conjugation under basis rotations.
"""

import json
import tempfile
from pathlib import Path

import numpy as np

import qgeom as qg

# -- write and load a model file -------------------------------------------


def pair(z):
    z = complex(z)
    return [z.real, z.imag]


doc = {
    "name": "anisotropic two-level",
    "dim": 2,
    "parameters": ["a", "b"],
    "terms": [
        {"matrix": [[pair(0), pair(1)], [pair(1), pair(0)]], "coeff": "sin(a)"},
        {"matrix": [[pair(0), pair(-1j)], [pair(1j), pair(0)]], "coeff": "0.5*sin(b)"},
        {"matrix": [[pair(1), pair(0)], [pair(0), pair(-1)]], "coeff": "cos(a)*cos(b)"},
    ],
}

with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "model.json"
    path.write_text(json.dumps(doc, indent=2))
    model = qg.load_model_spec(path)

print("loaded:", model.name, "| parameters:", model.parameters)
point = [0.9, 0.3]
q = qg.qgt_sum_over_states(model, point, 1)
print("tensor at", point)
print(q.matrix)
print("metric eigenvalues (non-negative):", np.linalg.eigvalsh(q.metric))
print()

# validation is strict: a non-Hermitian matrix is refused with its location
broken = json.loads(json.dumps(doc))
broken["terms"][0]["matrix"][0][1] = [1.001, 0.0]
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "broken.json"
    path.write_text(json.dumps(broken))
    try:
        qg.load_model_spec(path)
    except qg.InputError as exc:
        print("validation catches the broken file:")
        print(" ", exc)
print()

# -- degenerate levels: the block tensor ------------------------------------

# two decoupled spin copies seeing different field orientations: the ground
# level is twofold degenerate everywhere, with distinct per-copy geometry
sx = np.array([[0, 1], [1, 0]], dtype=complex)
sy = np.array([[0, -1j], [1j, 0]], dtype=complex)
sz = np.array([[1, 0], [0, -1]], dtype=complex)
terms = []
for pauli, ca, cb in (
    (sx, "sin(theta)*cos(phi)", "sin(theta + 0.4)*cos(phi - 0.3)"),
    (sy, "sin(theta)*sin(phi)", "sin(theta + 0.4)*sin(phi - 0.3)"),
    (sz, "cos(theta)", "cos(theta + 0.4)"),
):
    top = np.zeros((4, 4), dtype=complex)
    top[:2, :2] = pauli
    bottom = np.zeros((4, 4), dtype=complex)
    bottom[2:, 2:] = pauli
    terms.append((top, ca))
    terms.append((bottom, cb))
pair_model = qg.model_spec("two twisted copies", 4, ("theta", "phi"), terms)

lam = [1.0, 0.4]
es = qg.hermitian_eigensystem(qg.hamiltonian_at(pair_model, lam))
print("energies:", np.round(es.energies, 9), "| degenerate clusters:", es.groups)

try:
    qg.qgt_sum_over_states(pair_model, lam, 0)
except qg.DegeneracyError as exc:
    print("scalar tensor refused on the degenerate level:")
    print(" ", exc)

na = qg.qgt_nonabelian(pair_model, lam, (0, 1))
print()
print("block for (mu, nu) = (theta, theta):")
print(np.round(na.blocks[0, 0], 9))
print("(diagonal: one entry per copy, each that copy's scalar g_theta_theta)")
print()
print("block for (mu, nu) = (theta, phi):")
print(np.round(na.blocks[0, 1], 9))
