"""JSON documents for problems, solutions and oracle reports.

Every complex number is an explicit ``[re, im]`` pair.  Floats are written
with Python's shortest round-trip representation, so reading a document back
gives bit-identical values.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import jsonschema
import numpy as np

from .errors import DimensionMismatch
from .herm import pure_state
from .problem import DiscriminationProblem

SCHEMA_VERSION = "1.0"
MODES = ("bayes", "minimax", "unambiguous", "covariant")

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_vector = {"type": "array", "items": _complex, "minItems": 1}
_matrix = {"type": "array", "items": _vector, "minItems": 1}
_real_vector = {"type": "array", "items": {"type": "number"}, "minItems": 1}

PROBLEM_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "mode", "states"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": list(MODES)},
        "states": {"type": "array", "minItems": 1, "items": {"anyOf": [_vector, _matrix]}},
        "weights": {"type": "array", "items": _real_vector, "minItems": 1},
        "prior": _real_vector,
        "group": {"type": "array", "items": _matrix, "minItems": 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                name: {"type": "number", "exclusiveMinimum": 0}
                for name in ("gap_tol", "kernel_tol", "equalization_tol", "simplex_grid_step")
            },
        },
        "description": {"type": "string"},
    },
}

SOLUTION_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["schema_version", "kind", "mode", "status", "povm"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "kind": {"const": "solution"},
        "mode": {"enum": list(MODES)},
        "status": {"enum": ["ok", "convergence_failure"]},
        "povm": {"type": "array", "items": _matrix},
        "risk": {"type": "number"},
        "prior": _real_vector,
        "worst_prior": _real_vector,
        "per_state_risk": _real_vector,
        "success_per_state": _real_vector,
        "certificate": {
            "type": "object",
            "required": ["y", "prior", "bound"],
            "additionalProperties": False,
            "properties": {"y": _matrix, "prior": _real_vector, "bound": {"type": "number"}},
        },
        "gap": {"type": "number"},
        "best_gap": {"type": "number"},
        "equalized": {"type": "boolean"},
        "unique": {"type": "boolean"},
        "kappa": {"type": "number"},
        "witnesses": {"type": "array", "items": {"type": "integer"}},
        "refined": {
            "type": "object",
            "required": ["povm", "kappas", "success_per_state", "matches_canonical", "trace"],
            "additionalProperties": False,
            "properties": {
                "povm": {"type": "array", "items": _matrix},
                "kappas": _real_vector,
                "success_per_state": _real_vector,
                "matches_canonical": {"type": "boolean"},
                "trace": {"type": "array", "items": {"type": "array", "items": {"type": "integer"}}},
            },
        },
        "message": {"type": "string"},
    },
}


def encode_array(a) -> list:
    """Nested lists with complex entries as ``[re, im]``."""
    a = np.asarray(a, dtype=complex)
    return np.stack([a.real, a.imag], axis=-1).tolist()


def decode_array(data) -> np.ndarray:
    a = np.asarray(data, dtype=float)
    if a.ndim == 0 or a.shape[-1] != 2:
        raise ValueError("complex entries must be [re, im] pairs")
    return a[..., 0] + 1j * a[..., 1]


def real_list(a) -> list:
    return [float(x) for x in np.asarray(a, dtype=float).ravel()]


def validate(doc, schema):
    """Raise ``ValueError`` with a one-line reason if ``doc`` does not match ``schema``."""
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ValueError(f"schema violation at {where}: {exc.message}") from None


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """A parsed problem document."""

    mode: str
    states: list  # density matrices or state vectors as given
    is_pure: bool
    weights: np.ndarray | None
    prior: np.ndarray | None
    group: list | None
    tolerances: dict

    def problem(self) -> DiscriminationProblem:
        """Density-matrix problem; covariant mode expands the group orbit."""
        if self.mode == "covariant":
            rho0 = self.density_matrices()[0]
            states = [u @ rho0 @ u.conj().T for u in self.group]
        else:
            states = self.density_matrices()
        return DiscriminationProblem(tuple(states), weights=self.weights, **self.tolerances)

    def density_matrices(self) -> list:
        return [pure_state(s) for s in self.states] if self.is_pure else list(self.states)


def parse_problem(doc: dict) -> ProblemSpec:
    validate(doc, PROBLEM_SCHEMA)
    mode = doc["mode"]
    arrays = [decode_array(s) for s in doc["states"]]
    ndims = {a.ndim for a in arrays}
    if len(ndims) != 1:
        raise DimensionMismatch("states mix vectors and matrices")
    is_pure = ndims == {1}
    if is_pure:
        arrays = [v / np.linalg.norm(v) for v in arrays]
    if mode == "unambiguous" and not is_pure:
        raise ValueError("unambiguous mode takes state vectors")
    if "prior" in doc and mode != "bayes":
        raise ValueError("prior is only accepted in bayes mode")
    if mode == "bayes" and "prior" not in doc:
        raise ValueError("bayes mode needs a prior")
    if ("group" in doc) != (mode == "covariant"):
        raise ValueError("group is required in covariant mode and rejected otherwise")
    if mode == "covariant" and len(arrays) != 1:
        raise ValueError("covariant mode takes a single seed state and a group")
    if "weights" in doc and mode in ("unambiguous", "covariant"):
        raise ValueError(f"weights are not used in {mode} mode")
    return ProblemSpec(
        mode=mode,
        states=arrays,
        is_pure=is_pure,
        weights=np.asarray(doc["weights"], dtype=float) if "weights" in doc else None,
        prior=np.asarray(doc["prior"], dtype=float) if "prior" in doc else None,
        group=[decode_array(u) for u in doc["group"]] if "group" in doc else None,
        tolerances=dict(doc.get("tolerances", {})),
    )


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"
