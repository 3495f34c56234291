"""JSON file formats.

Complex numbers are ``[re, im]`` pairs and matrices are lists of rows.  File
references inside a document (a design or state given as a string) are
resolved relative to the referencing file.
"""

import json
from pathlib import Path

import numpy as np

from . import tolerances as tol
from .chi2stat import ExperimentRecord
from .errors import ValidationError
from .operators import as_state, validate_density
from .povm import MeasurementDesign, Povm, validate_povm


def encode_matrix(m):
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(rows, dim=None):
    try:
        a = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"malformed matrix: {exc}") from exc
    if a.ndim != 3 or a.shape[2] != 2 or a.shape[0] != a.shape[1]:
        raise ValidationError(f"matrix must be D x D x [re, im], got shape {a.shape}")
    if dim is not None and a.shape[0] != dim:
        raise ValidationError(f"declared dim {dim} but matrix is {a.shape[0]} x {a.shape[1]}")
    return a[..., 0] + 1j * a[..., 1]


def read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


def write_json(path, doc):
    text = json.dumps(doc, indent=2) + "\n"
    if path is None or str(path) == "-":
        print(text, end="")
    else:
        Path(path).write_text(text)


def _resolve(obj, base):
    if isinstance(obj, str):
        path = Path(obj)
        if not path.is_absolute() and base is not None:
            path = Path(base).parent / path
        return read_json(path), path
    return obj, base


# -- states ------------------------------------------------------------------


def state_to_json(state):
    state = as_state(state)
    return {"dim": state.dim, "matrix": encode_matrix(state.matrix)}


def state_from_json(doc, base=None):
    doc, _ = _resolve(doc, base)
    if "matrix" not in doc:
        raise ValidationError("state document needs a 'matrix' field")
    return validate_density(decode_matrix(doc["matrix"], doc.get("dim")))


def load_state(path):
    return state_from_json(read_json(path), path)


# -- POVMs and designs -------------------------------------------------------


def povm_to_json(povm: Povm):
    return {
        "dim": povm.dim,
        "elements": [encode_matrix(e) for e in povm.elements],
        "labels": list(povm.labels),
    }


def povm_from_json(doc, base=None):
    doc, _ = _resolve(doc, base)
    dim = doc.get("dim")
    elems = [decode_matrix(e, dim) for e in doc["elements"]]
    return validate_povm(elems, doc.get("labels"))


def design_to_json(design: MeasurementDesign):
    return {
        "dim": design.dim,
        "groups": [
            {"povm": povm_to_json(g), "fraction": float(f)}
            for g, f in zip(design.groups, design.fractions)
        ],
    }


def design_from_json(doc, base=None):
    """A design document, or a bare POVM document read as a one-group design."""
    doc, base = _resolve(doc, base)
    if "groups" in doc and isinstance(doc["groups"], list) and doc["groups"] and "povm" in doc["groups"][0]:
        groups = tuple(povm_from_json(g["povm"], base) for g in doc["groups"])
        fractions = tuple(float(g["fraction"]) for g in doc["groups"])
        return MeasurementDesign(groups, fractions)
    if "design" in doc:
        return design_from_json(doc["design"], base)
    if "elements" in doc:
        return MeasurementDesign.single(povm_from_json(doc, base))
    raise ValidationError("document is neither a design nor a POVM")


def load_design(path):
    return design_from_json(read_json(path), path)


# -- records and plans -------------------------------------------------------


def record_to_json(record: ExperimentRecord, prng=None):
    doc = {
        "design": design_to_json(record.design),
        "groups": [
            {"n": int(n), "counts": [int(c) for c in counts]}
            for n, counts in zip(record.totals, record.counts)
        ],
    }
    if prng is not None:
        doc["prng"] = prng
    return doc


def record_from_json(doc, base=None):
    doc, base = _resolve(doc, base)
    design = design_from_json(doc["design"], base)
    groups = doc["groups"]
    counts = tuple(g["counts"] for g in groups)
    totals = tuple(int(g["n"]) for g in groups)
    return ExperimentRecord(design, counts, totals)


def load_record(path):
    return record_from_json(read_json(path), path)


def plan_from_json(doc, base=None):
    from .simulator import PRNG_NAME, SimulationPlan

    doc, base = _resolve(doc, base)
    prng = doc.get("prng", PRNG_NAME)
    if prng != PRNG_NAME:
        raise ValidationError(f"unsupported prng {prng!r}; this build provides {PRNG_NAME!r}")
    design = design_from_json(doc["design"], base)
    rho = state_from_json(doc["rho"], base)
    return SimulationPlan(design, rho, int(doc["n"]), int(doc.get("seed", 0)))


def plan_to_json(plan):
    from .simulator import PRNG_NAME

    return {
        "design": design_to_json(plan.design),
        "rho": state_to_json(plan.rho),
        "n": int(plan.n_total),
        "seed": int(plan.seed),
        "prng": PRNG_NAME,
    }


def load_plan(path):
    return plan_from_json(read_json(path), path)


def manifest(command, inputs=(), seed=None, overrides=None):
    from . import __version__

    return {
        "command": command,
        "inputs": [str(p) for p in inputs],
        "seed": seed,
        "version": __version__,
        "tolerances": tol.snapshot(),
        "overrides": overrides or {},
    }
