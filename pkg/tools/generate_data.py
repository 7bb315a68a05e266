"""Regenerate the bundled model files under src/superselect/data."""
import math
from pathlib import Path

import numpy as np

from superselect import schemes
from superselect.modelfile import SCHEMA_VERSION, encode_matrix, encode_vector, dumps_model

DATA = Path(__file__).resolve().parents[1] / "src" / "superselect" / "data"


def cnot_model():
    s = schemes.build_discrete_von_neumann(2)
    r = 1 / math.sqrt(2)
    return {
        "schema_version": SCHEMA_VERSION,
        "space": {"object_dim": 2, "apparatus_dim": 2},
        "operators": {
            "cnot": {"matrix": encode_matrix(s.unitary), "unitary": True},
            "q": {"matrix": encode_matrix(s.object_observable), "hermitian": True},
            "Q": {"matrix": encode_matrix(s.meter), "hermitian": True},
            "zero": {"matrix": encode_matrix(np.zeros((2, 2))), "hermitian": True},
            "sx": {"matrix": encode_matrix(schemes.PAULI_X), "hermitian": True},
        },
        "states": {
            "zero": encode_vector([1, 0]),
            "one": encode_vector([0, 1]),
            "plus": encode_vector([r, r]),
            "plus_i": encode_vector([r, 1j * r]),
        },
        "actions": {
            "phase": {"kind": "one-parameter", "side": "object", "generator": "q",
                      "samples": [1.0, -1.0, 0.5, 2.0]},
            "trivial": {"kind": "one-parameter", "side": "apparatus", "generator": "zero"},
        },
        "scheme": {"label": "CNOT position measurement", "unitary": "cnot",
                   "object_observable": "q", "meter": "Q", "apparatus_state": "zero"},
        "analysis": {
            "audit": {"object_action": "phase", "apparatus_action": "trivial",
                      "states": ["zero", "one", "plus", "plus_i"], "tolerance": 1e-9},
            "bound": {"observable": "q", "object_charge": "q", "apparatus_charge": None,
                      "states": ["zero", "one", "plus", "plus_i"], "slack": 1e-9},
        },
    }


def qubit_search():
    r = 1 / math.sqrt(2)
    return {
        "schema_version": SCHEMA_VERSION,
        "space": {"object_dim": 2, "apparatus_dim": 4},
        "observable": encode_matrix(schemes.PAULI_X),
        "charge": encode_matrix(schemes.PAULI_Z),
        "meter": encode_matrix(np.diag([1.0, -1.0, 1.0, -1.0])),
        "apparatus_state": encode_vector([1, 0, 0, 0]),
        "object_states": [encode_vector([1, 0]), encode_vector([r, 1j * r])],
        "restarts": 20,
        "time": 1.0,
        "control": True,
    }


if __name__ == "__main__":
    (DATA / "cnot_model.json").write_text(dumps_model(cnot_model()))
    (DATA / "qubit_search.json").write_text(dumps_model(qubit_search()))
