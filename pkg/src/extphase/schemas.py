"""JSON input formats for direction sets, states and ensemble specs."""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import spin_model, twoslit
from .amplitude import AmplitudeDistribution
from .errors import ValidationError
from .sampler import Constraint, EnsembleSpec, singlet_constraints


def load_json(path) -> object:
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise ValidationError(f"no such file: {path}") from None
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None


def vectors_from_json(data) -> list[tuple[float, float, float]]:
    """A list of 3-vectors and/or planar angles in degrees, or
    ``{"directions": [...]}`` / ``{"angles": [...]}``."""
    if isinstance(data, dict):
        data = data["angles"] if "angles" in data else data.get("directions")
    if not isinstance(data, list) or not data:
        raise ValidationError("direction set must be a non-empty list")
    vecs = []
    for item in data:
        if isinstance(item, (int, float)):
            t = np.radians(float(item))
            vecs.append((float(np.sin(t)), 0.0, float(np.cos(t))))
        elif isinstance(item, list) and len(item) == 3:
            try:
                vecs.append(tuple(float(c) for c in item))
            except (TypeError, ValueError):
                raise ValidationError(f"bad direction {item!r}") from None
        else:
            raise ValidationError(f"bad direction {item!r}")
    return vecs


def directions_from_json(data) -> spin_model.DirectionSet:
    return spin_model.DirectionSet.from_vectors(vectors_from_json(data))


def state_from_json(data) -> AmplitudeDistribution:
    """Dense ``{"family", "amplitudes"}`` or a named model:
    ``{"model": "singlet" | "known_spin" | "two_slit", ...}``."""
    if not isinstance(data, dict):
        raise ValidationError("state must be a JSON object")
    model = data.get("model")
    if model is None:
        return AmplitudeDistribution.from_json(data)
    try:
        if model == "singlet":
            return spin_model.singlet_state(directions_from_json(data["directions"]))
        if model == "known_spin":
            dirs = directions_from_json(data["directions"])
            return spin_model.known_spin_state(dirs, int(data.get("direction", 0)), int(data.get("spin", 1)))
        if model == "two_slit":
            geom = twoslit.SlitGeometry(
                float(data.get("separation", 5.0)),
                float(data.get("wavelength", 1.0)),
                float(data.get("screen_distance", 1000.0)),
            )
            screen = twoslit.Screen.default(geom, int(data.get("screen_points", 501)))
            return twoslit.build_state(geom, screen)
    except KeyError as exc:
        raise ValidationError(f"state model {model!r} is missing {exc}") from None
    raise ValidationError(f"unknown state model {model!r}")


def ensemble_from_json(data) -> tuple[EnsembleSpec, list[tuple[str, ...]]]:
    """``{"state": ..., "contexts": [[names...], ...], "constraints": [...] | "singlet",
    "seed": int, "n": int, "workers": int}``."""
    if not isinstance(data, dict) or "state" not in data:
        raise ValidationError("ensemble spec needs a 'state'")
    Z = state_from_json(data["state"])
    contexts = data.get("contexts")
    if contexts is None and "context" in data:
        contexts = [data["context"]]
    if not contexts or not all(isinstance(c, list) and c for c in contexts):
        raise ValidationError("ensemble spec needs a non-empty 'contexts' list of magnitude-name lists")
    raw = data.get("constraints", [])
    if raw == "singlet":
        constraints = singlet_constraints(len(Z.family) // 2)
    else:
        try:
            constraints = [Constraint(tuple(c["magnitudes"]), float(c.get("sum", 0.0))) for c in raw]
        except (KeyError, TypeError, AttributeError) as exc:
            raise ValidationError(f"malformed constraint: {exc}") from None
    spec = EnsembleSpec(
        Z,
        constraints,
        seed=int(data.get("seed", 0)),
        n=int(data.get("n", 1000)),
        workers=int(data.get("workers", 1)),
    )
    return spec, [tuple(c) for c in contexts]
