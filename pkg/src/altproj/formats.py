"""JSON readers and writers for measures and chain specifications."""
from __future__ import annotations

import json

import numpy as np

from .dynamics import AlternatingChain
from .exceptions import AltProjError, SpecValidationError
from .measures import (
    X_GIVEN_Y,
    Y_GIVEN_X,
    ConditionalKernel,
    JointMeasure,
    SupportSet,
)

CORE_KEYS = ("nx", "ny", "support", "kernel_y_given_x", "kernel_x_given_y", "es", "burn_in")
ES_REREAD_TOL = 1e-9


def _support(d):
    try:
        return SupportSet.from_pairs(int(d["nx"]), int(d["ny"]), d["support"])
    except KeyError as exc:
        raise SpecValidationError("schema", f"missing field {exc.args[0]!r}") from None
    except (AltProjError, IndexError, ValueError) as exc:
        raise SpecValidationError("support", str(exc)) from None


def measure_to_json(pi):
    s = pi.support
    return {
        "nx": s.nx,
        "ny": s.ny,
        "support": [list(p) for p in s.pairs()],
        "joint": [[x, y, float(pi.weights[x, y])] for x, y in s.pairs()],
    }


def measure_from_json(d):
    """Probability measure from the instance fragment; weights may be strings."""
    support = _support(d)
    w = np.zeros(support.shape)
    for x, y, val in d["joint"]:
        w[int(x), int(y)] = float(val)
    try:
        return JointMeasure(support, w)
    except (AltProjError, ValueError) as exc:
        raise SpecValidationError("joint", str(exc)) from None


def _grid(values):
    return [[float(v) for v in row] for row in np.asarray(values)]


def chain_to_json(chain):
    s = chain.support
    out = {
        "nx": s.nx,
        "ny": s.ny,
        "support": [list(p) for p in s.pairs()],
        "kernel_y_given_x": _grid(chain.kernel_y_given_x.rows),
        "kernel_x_given_y": _grid(chain.kernel_x_given_y.rows),
        "es": _grid(chain.es.weights),
        "burn_in": int(chain.burn_in),
    }
    for key, val in chain.meta.items():
        out.setdefault(key, val)
    return out


def chain_from_json(d):
    """Rebuild and validate a chain; stored ``es``/``burn_in`` must match the rederived ones."""
    support = _support(d)
    try:
        kyx = ConditionalKernel(Y_GIVEN_X, np.array(d["kernel_y_given_x"], dtype=float), support)
        kxy = ConditionalKernel(X_GIVEN_Y, np.array(d["kernel_x_given_y"], dtype=float), support)
    except KeyError as exc:
        raise SpecValidationError("schema", f"missing field {exc.args[0]!r}") from None
    except SpecValidationError:
        raise
    except (AltProjError, ValueError) as exc:
        raise SpecValidationError("kernel", str(exc)) from None
    meta = {k: v for k, v in d.items() if k not in CORE_KEYS}
    chain = AlternatingChain.from_kernels(kyx, kxy, meta=meta)
    if "es" in d:
        stored = np.array(d["es"], dtype=float)
        if stored.shape != support.shape or np.abs(stored - chain.es.weights).max() > ES_REREAD_TOL:
            raise SpecValidationError("es", "stored ES measure does not match the kernels")
    if "burn_in" in d and int(d["burn_in"]) != chain.burn_in:
        raise SpecValidationError("burn_in", f"stored burn-in {d['burn_in']} != derived {chain.burn_in}")
    return chain


def dumps(obj):
    return json.dumps(obj, indent=2) + "\n"


def load_chain(path):
    with open(path) as fh:
        return chain_from_json(json.load(fh))


def save_chain(chain, path):
    with open(path, "w") as fh:
        fh.write(dumps(chain_to_json(chain)))
