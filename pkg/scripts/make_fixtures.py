"""Regenerate the bundled problem files under src/qdiscrim/fixtures/."""

from pathlib import Path

import numpy as np

from qdiscrim.oracle import random_density_matrix
from qdiscrim.serialization import SCHEMA_VERSION, dumps, encode_array

OUT = Path(__file__).resolve().parents[1] / "src" / "qdiscrim" / "fixtures"


def doc(mode, states, description, **extra):
    d = {"schema_version": SCHEMA_VERSION, "mode": mode, "description": description}
    d["states"] = [encode_array(s) for s in states]
    d.update(extra)
    return d


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def main():
    files = {}
    pair = [np.diag([1.0, 0.0]), np.eye(2) / 2]
    files["up_vs_mixed"] = doc("minimax", pair, "diag(1,0) against the maximally mixed qubit")
    files["up_vs_mixed_bayes"] = doc(
        "bayes", pair, "diag(1,0) against the maximally mixed qubit at the least favorable prior", prior=[1 / 3, 2 / 3]
    )
    # trine: real qubit states at 120 degrees, generated by a rotation of 2*pi/3 on the Bloch sphere
    psi0 = np.array([1.0, 0.0])
    group = [rotation(2 * np.pi * k / 3) for k in range(3)]
    files["trine"] = doc(
        "covariant", [np.outer(psi0, psi0)], "trine orbit of |0> under rotations by 2pi/3", group=[encode_array(u) for u in group]
    )
    files["trine_minimax"] = doc("minimax", [np.outer(u @ psi0, u @ psi0) for u in group], "the trine states as a plain minimax problem")
    for seed in (11, 12, 13):
        rng = np.random.default_rng(seed)
        pair = [random_density_matrix(2, rng) for _ in range(2)]
        files[f"qubit_pair_{seed}"] = doc("minimax", pair, f"random mixed qubit pair, numpy default_rng({seed})")
    c = 0.5
    three = [np.array([1.0, 0, 0]), np.array([c, np.sqrt(1 - c * c), 0]), np.array([0, 0, 1.0])]
    files["unambiguous_three_state"] = doc(
        "unambiguous", three, "planar pair with overlap 1/2 plus an orthogonal third state (non-unique optimum)"
    )
    files["unambiguous_orthonormal"] = doc("unambiguous", [np.array([1.0, 0]), np.array([0, 1.0])], "two orthonormal states")
    for name, d in files.items():
        (OUT / f"{name}.json").write_text(dumps(d), encoding="utf-8")


if __name__ == "__main__":
    main()
