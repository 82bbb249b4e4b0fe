"""JSON documents for systems, filters, scenarios, thresholds and polynomial matrices.

Matrices are row-major nested lists. Floats are written with Python's
shortest round-trip representation, so load(dump(x)) is bit-exact.
"""

from __future__ import annotations

import json

import numpy as np

from .model import DetectionFilter, Fault, FmiiModel, check
from .pde import HyperbolicPde, discretize
from .polymat import BivarPolyMatrix
from .sim import FaultSchedule, Scenario, ThresholdSpec


class DocumentError(ValueError):
    """A JSON document is malformed or does not describe a valid object."""


def _m(a):
    return np.asarray(a, dtype=float).tolist()


def _arr(doc, key, ctx):
    try:
        a = np.asarray(doc[key], dtype=float)
    except KeyError:
        raise DocumentError(f"{ctx}: missing field {key!r}") from None
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{ctx}: field {key!r} is not numeric: {exc}") from None
    if a.ndim == 1:
        a = a.reshape(-1, 1) if key not in ("C", "M", "H") else a.reshape(1, -1)
    return a


def _list(doc, key, ctx):
    try:
        return [np.atleast_2d(np.asarray(a, dtype=float)) for a in doc[key]]
    except KeyError:
        raise DocumentError(f"{ctx}: missing field {key!r}") from None
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"{ctx}: field {key!r} is malformed: {exc}") from None


# ---------------------------------------------------------------------------
# systems


def system_to_dict(model):
    doc = {
        "name": model.name,
        "n": model.n, "m": model.m, "q": model.q, "k": model.k,
        "A": [_m(A) for A in model.shift_ops],
        "B": [_m(B) for B in model.input_maps],
        "C": _m(model.C),
        "faults": [{"name": f.name, "L": [_m(L) for L in f.signatures]}
                   for f in model.faults],
        "tolerances": {"rank": model.rank_tol},
    }
    return doc


def _pde_from_dict(doc):
    ctx = "pde"
    try:
        faults = {name: np.asarray(v, dtype=float)
                  for name, v in doc.get("faults", {}).items()}
        pde = HyperbolicPde(_arr(doc, "A1", ctx), _arr(doc, "A2", ctx), _arr(doc, "B", ctx),
                            faults, dz=float(doc.get("dz", 0.1)), dt=float(doc.get("dt", 0.1)),
                            length=float(doc.get("length", 1.0)))
    except (TypeError, ValueError) as exc:
        raise DocumentError(f"pde: {exc}") from None
    return discretize(pde)


def system_from_dict(doc):
    if not isinstance(doc, dict):
        raise DocumentError("system document must be a JSON object")
    tol = doc.get("tolerances", {}).get("rank")
    if "pde" in doc:
        base = _pde_from_dict(doc["pde"])
        C = _arr(doc, "C", "system") if "C" in doc else base.C
        model = FmiiModel(base.shift_ops, base.input_maps, C, base.faults,
                          name=doc.get("name", "pde"))
    else:
        A = _list(doc, "A", "system")
        B = _list(doc, "B", "system") if "B" in doc else [np.zeros((A[0].shape[0], 1))
                                                           for _ in A]
        C = _arr(doc, "C", "system")
        faults = []
        for i, f in enumerate(doc.get("faults", [])):
            try:
                faults.append(Fault(str(f["name"]),
                                    tuple(np.asarray(L, dtype=float) for L in f["L"])))
            except (KeyError, TypeError, ValueError) as exc:
                raise DocumentError(f"fault #{i}: {exc}") from None
        model = FmiiModel(tuple(A), tuple(B), C, tuple(faults), name=doc.get("name", ""))
    if tol is not None:
        model = FmiiModel(model.shift_ops, model.input_maps, model.C, model.faults,
                          float(tol), model.name)
    for key in ("n", "m", "q", "k"):
        if key in doc and doc[key] != getattr(model, key):
            raise DocumentError(f"declared {key} = {doc[key]} but matrices give "
                                f"{getattr(model, key)}")
    try:
        return check(model)
    except ValueError as exc:
        raise DocumentError(str(exc)) from None


# ---------------------------------------------------------------------------
# filters


def _extras_to_dict(extras):
    out = {}
    for key, val in extras.items():
        if isinstance(val, (list, tuple)):
            out[key] = [_m(v) for v in val]
        else:
            out[key] = _m(val)
    return out


def filter_to_dict(f):
    doc = {
        "target": f.target,
        "F": [_m(x) for x in f.F], "K": [_m(x) for x in f.K], "E": [_m(x) for x in f.E],
        "M": _m(f.M), "H": _m(f.H),
        "extras": _extras_to_dict(f.extras),
    }
    if f.projection is not None:
        doc["P"] = _m(f.projection)
    return doc


def _shape_from(doc, key, rows, cols):
    a = np.asarray(doc[key], dtype=float)
    return a.reshape(rows, cols)


def filter_from_dict(doc):
    ctx = "filter"
    if not isinstance(doc, dict):
        raise DocumentError("filter document must be a JSON object")
    F = _list(doc, "F", ctx)
    K = _list(doc, "K", ctx)
    E = _list(doc, "E", ctx)
    o = F[0].shape[0]
    try:
        M = np.asarray(doc["M"], dtype=float)
        H = np.asarray(doc["H"], dtype=float)
    except KeyError as exc:
        raise DocumentError(f"filter: missing field {exc}") from None
    M = M.reshape(-1, o) if M.size else np.zeros((0, o))
    q = E[0].shape[1] if E[0].size else 0
    H = H.reshape(M.shape[0], q) if H.size else np.zeros((M.shape[0], q))
    K = [k.reshape(o, -1) for k in K]
    P = np.asarray(doc["P"], dtype=float).reshape(o, -1) if "P" in doc else None
    extras = {}
    for key, val in doc.get("extras", {}).items():
        if key in ("D", "D_o"):
            extras[key] = [np.atleast_2d(np.asarray(v, dtype=float)) for v in val]
        else:
            extras[key] = np.asarray(val, dtype=float)
    return DetectionFilter(tuple(F), tuple(K), tuple(E), M, H, P,
                           doc.get("target", ""), extras)


# ---------------------------------------------------------------------------
# scenarios and thresholds


def scenario_to_dict(sc):
    doc = {"I": sc.I, "J": sc.J, "sigma": sc.sigma, "seed": sc.seed,
           "faults": [{"name": f.name, "i_from": f.i_from, "j_from": f.j_from,
                       "severity": f.severity, "i_to": f.i_to, "j_to": f.j_to}
                      for f in sc.faults]}
    for key in ("h1", "h2", "inputs"):
        val = getattr(sc, key)
        if val is not None:
            doc[key] = _m(val)
    return doc


def scenario_from_dict(doc):
    from .sim import heat_exchanger_scenario

    if not isinstance(doc, dict):
        raise DocumentError("scenario document must be a JSON object")
    if "preset" in doc:
        if doc["preset"] != "heat-exchanger":
            raise DocumentError(f"unknown scenario preset {doc['preset']!r}")
        try:
            return heat_exchanger_scenario(doc.get("kind", "healthy"), int(doc.get("size", 100)),
                                           float(doc.get("sigma", 0.01)), doc.get("seed", 0))
        except ValueError as exc:
            raise DocumentError(str(exc)) from None
    try:
        faults = tuple(FaultSchedule(str(f["name"]), int(f["i_from"]), int(f["j_from"]),
                                     float(f.get("severity", 1.0)), f.get("i_to", -1),
                                     f.get("j_to"))
                       for f in doc.get("faults", []))
        return Scenario(int(doc["I"]), int(doc["J"]),
                        doc.get("h1"), doc.get("h2"), doc.get("inputs"), faults,
                        float(doc.get("sigma", 0.0)), doc.get("seed"))
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"scenario: {exc}") from None


def thresholds_to_dict(spec, targets=()):
    return {"runs": spec.runs, "horizon": spec.horizon,
            "thresholds": list(spec.thresholds), "targets": list(targets)}


def thresholds_from_dict(doc):
    try:
        return ThresholdSpec(int(doc["runs"]), doc.get("horizon"),
                             tuple(float(t) for t in doc["thresholds"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise DocumentError(f"thresholds: {exc}") from None


# ---------------------------------------------------------------------------
# files

_LOADERS = {
    "system": system_from_dict,
    "filter": filter_from_dict,
    "scenario": scenario_from_dict,
    "thresholds": thresholds_from_dict,
    "polymatrix": BivarPolyMatrix.from_json,
}


def load(path, kind):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON: {exc}") from None
    try:
        return _LOADERS[kind](doc)
    except DocumentError:
        raise
    except ValueError as exc:
        raise DocumentError(f"{path}: {exc}") from None


def dumps(doc):
    return json.dumps(doc, indent=1)


def save(path, doc):
    with open(path, "w") as fh:
        fh.write(dumps(doc) + "\n")
