"""JSON and CSV formats for pipeline artifacts.

Floats are written with ``repr``, which is the shortest string that reads back
to the same double, so JSON round trips are exact.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .polyrat import Polynomial, RationalFunction


def matrix_to_json(A) -> dict:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return {"rows": int(A.shape[0]), "cols": int(A.shape[1]), "data": [float(v) for v in A.ravel()]}


def matrix_from_json(d) -> np.ndarray:
    if isinstance(d, dict):
        return np.asarray(d["data"], dtype=float).reshape(int(d["rows"]), int(d["cols"]))
    return np.atleast_2d(np.asarray(d, dtype=float))


def polynomial_to_json(p: Polynomial) -> list:
    return p.to_list()


def polynomial_from_json(d) -> Polynomial:
    return Polynomial(d)


def rational_from_json(d) -> RationalFunction:
    return RationalFunction.from_dict(d)


def state_space_from_json(d):
    from .realization import StateSpaceModel

    D = matrix_from_json(d["D"]) if d.get("D") is not None else None
    return StateSpaceModel(matrix_from_json(d["F"]), matrix_from_json(d["G"]), matrix_from_json(d["H"]), D)


def pair_from_json(d):
    from .realization import ForwardBackwardPair, StateSpaceModel

    fwd = StateSpaceModel(matrix_from_json(d["F"]), matrix_from_json(d["G"]), matrix_from_json(d["H"]))
    bwd = StateSpaceModel(matrix_from_json(d["Fbar"]), matrix_from_json(d["Gbar"]), matrix_from_json(d["Hbar"]))
    return ForwardBackwardPair(fwd, matrix_from_json(d["P"]), bwd)


def bath_from_json(d):
    from .bath import FiniteBath

    return FiniteBath(matrix_from_json(d["Vsq"]), float(d["beta"]))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj))


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _fmt(v) -> str:
    return repr(float(v))


def write_path_csv(path, sample, include_states=True):
    """Columns ``t, y_1..y_m[, x_1..x_n]``."""
    m = sample.m
    cols = [sample.times[:, None], sample.values]
    header = ["t"] + [f"y_{i + 1}" for i in range(m)]
    if include_states and sample.states is not None and sample.states.shape[1]:
        cols.append(sample.states)
        header += [f"x_{i + 1}" for i in range(sample.states.shape[1])]
    data = np.hstack(cols)
    _write_table(path, header, data)


def read_path_csv(path):
    header, data = _read_table(path)
    return header, data


def write_psd_csv(path, freqs, values):
    _write_table(path, ["lambda", "value"], np.column_stack([freqs, values]))


def write_samples_csv(path, samples):
    N = samples.q.shape[1]
    header = [f"q_{i + 1}" for i in range(N)] + [f"p_{i + 1}" for i in range(N)]
    _write_table(path, header, samples.stacked())


def _write_table(path, header, data):
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in data:
            fh.write(",".join(map(_fmt, row)) + "\n")


def _read_table(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        data = np.array([[float(v) for v in row] for row in reader])
    return header, data
