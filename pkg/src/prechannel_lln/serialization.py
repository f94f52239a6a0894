"""JSON encodings for operators, pre-channels, ensembles and configs.

Complex arrays are stored row-major as ``[re, im]`` pairs.  Floats go through
``repr``, which round-trips exactly.
"""

from __future__ import annotations

import hashlib
import json
import math
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, default_test_vector
from .ensembles import generate
from .operators import INF, as_op
from .prob import Ensemble, SeedSpec
from .semigroup import TimeGrid
from .superop import PreChannel, induced_norm

__all__ = [
    "array_from_pairs",
    "array_to_pairs",
    "config_digest",
    "config_from_dict",
    "config_to_dict",
    "dumps",
    "ensemble_from_dict",
    "ensemble_to_dict",
    "load_ensemble",
    "op_from_dict",
    "op_to_dict",
    "prechannel_from_dict",
    "prechannel_to_dict",
    "save_ensemble",
]


def array_to_pairs(a: np.ndarray) -> list[list[float]]:
    flat = np.asarray(a, dtype=complex).reshape(-1)
    return [[float(z.real), float(z.imag)] for z in flat]


def array_from_pairs(pairs, shape: tuple[int, int]) -> np.ndarray:
    arr = np.asarray(pairs, dtype=float)
    if arr.shape != (shape[0] * shape[1], 2):
        raise ValueError(f"expected {shape[0] * shape[1]} [re, im] pairs, got array of shape {arr.shape}")
    return (arr[:, 0] + 1j * arr[:, 1]).reshape(shape)


def op_to_dict(X) -> dict:
    X = as_op(X)
    return {"dim": X.shape[0], "entries": array_to_pairs(X)}


def op_from_dict(data: dict) -> np.ndarray:
    d = int(data["dim"])
    return as_op(array_from_pairs(data["entries"], (d, d)))


def prechannel_to_dict(U: PreChannel) -> dict:
    return {"dim": U.dim, "rep": array_to_pairs(U.rep)}


def prechannel_from_dict(data: dict) -> PreChannel:
    d = int(data["dim"])
    return PreChannel(array_from_pairs(data["rep"], (d * d, d * d)), d)


def ensemble_to_dict(E: Ensemble, with_norms: bool = True) -> dict:
    atoms = []
    for ch, pk in E:
        atom = {"prob": float(pk), "rep": array_to_pairs(ch.rep)}
        if with_norms:
            est = induced_norm(ch, 2, 2)
            atom["norm_22"] = est.value
            atom["norm_22_exact"] = est.exact
        atoms.append(atom)
    out = {"dim": E.dim, "atoms": atoms}
    if E.generator is not None:
        out["generator"] = E.generator
    return out


def ensemble_from_dict(data: dict) -> Ensemble:
    try:
        d = int(data["dim"])
        atoms = data["atoms"]
        channels = tuple(PreChannel(array_from_pairs(a["rep"], (d * d, d * d)), d) for a in atoms)
        probs = np.array([float(a["prob"]) for a in atoms])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed ensemble: missing or invalid field {exc}") from None
    return Ensemble(channels, probs, data.get("generator"))


def _encode(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_encode(v) for v in obj]
    if isinstance(obj, np.generic):
        return _encode(obj.item())
    return obj


def dumps(obj, indent: int | None = 1) -> str:
    """Deterministic JSON: sorted keys, exact floats, infinities as strings."""
    return json.dumps(_encode(obj), sort_keys=True, indent=indent, allow_nan=False) + "\n"


def save_ensemble(E: Ensemble, path) -> Path:
    path = Path(path)
    path.write_text(dumps(ensemble_to_dict(E)))
    return path


def load_ensemble(path) -> Ensemble:
    return ensemble_from_dict(json.loads(Path(path).read_text()))


def _exponent(value) -> float:
    if isinstance(value, str) and value.lower() in ("inf", "infinity"):
        return INF
    return float(value)


def _grid_from_dict(data: dict) -> TimeGrid:
    if "points" in data:
        grid = TimeGrid(tuple(data["points"]))
        if "T" in data and float(data["T"]) != grid.T:
            raise ValueError(f"grid points end at {grid.T}, but T = {data['T']}")
        return grid
    return TimeGrid.uniform(float(data.get("T", 1.0)), int(data.get("count", 65)))


def config_from_dict(data: dict, base_dir=None, seed_override: int | None = None) -> ExperimentConfig:
    """Build a config; ``ensemble`` may be inline, a ``path``, or a generator spec."""
    base_dir = Path(base_dir) if base_dir is not None else Path.cwd()
    spec = data.get("ensemble")
    if spec is None:
        raise ValueError("config has no 'ensemble' entry")
    if "atoms" in spec:
        E = ensemble_from_dict(spec)
    elif "path" in spec:
        path = Path(spec["path"])
        E = load_ensemble(path if path.is_absolute() else base_dir / path)
    elif "family" in spec:
        E = generate(spec["family"], spec.get("params"), int(spec.get("seed", 0)))
    else:
        raise ValueError("ensemble entry needs one of 'atoms', 'path' or 'family'")
    if "dim" in data and int(data["dim"]) != E.dim:
        raise ValueError(f"config dim {data['dim']} does not match ensemble dim {E.dim}")
    x = op_from_dict(data["x"]) if "x" in data else default_test_vector(E.dim)
    seed = seed_override if seed_override is not None else int(data.get("seed", 0))
    kwargs = {}
    for key in ("n_schedule", "trials", "eps", "verify_n", "verify_t", "probe_p"):
        if key in data:
            kwargs[key] = data[key]
    return ExperimentConfig(
        ensemble=E,
        x=x,
        grid=_grid_from_dict(data.get("grid", {})),
        p=_exponent(data.get("p", 2.0)),
        seed=SeedSpec(seed),
        **kwargs,
    )


def config_to_dict(config: ExperimentConfig) -> dict:
    """Fully resolved config; reloading it reproduces every result."""
    return {
        "dim": config.dim,
        "ensemble": ensemble_to_dict(config.ensemble, with_norms=False),
        "x": op_to_dict(config.x),
        "grid": {"T": config.grid.T, "points": list(config.grid.points)},
        "n_schedule": list(config.n_schedule),
        "trials": config.trials,
        "eps": config.eps,
        "p": config.p,
        "seed": config.seed.root,
        "verify_n": list(config.verify_n),
        "verify_t": list(config.verify_t),
        "probe_p": list(config.probe_p),
    }


def config_digest(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical resolved config."""
    return hashlib.sha256(dumps(config_to_dict(config), indent=None).encode()).hexdigest()
