"""Run configuration documents (JSON, ``schema: 1``).

A document describes a graph, walkers, coins, defects and requested outputs.
Complex numbers are ``[re, im]`` pairs.  :func:`load_config` validates the
document against :data:`SCHEMA` and reports the offending field path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from pathlib import Path
from typing import Any

import jsonschema
import numpy as np

from . import fock
from .errors import CapExceededError, ValidationError
from .graph import Graph, build_complete_with_loops, build_cycle, build_line, from_edges
from .walk import (
    DEFAULT_MAX_WALKERS,
    HARD_MAX_WALKERS,
    CoinAssignment,
    CPhaseDefect,
    Defect,
    KerrDefect,
    PositionPhase,
    WalkSchedule,
    WalkStep,
    coin_preset,
    symmetric_walkers,
)

SCHEMA_VERSION = 1
OUTPUTS = ("position", "coincidence", "spread", "virtual-compare")
# largest n-walker Fock dimension a run may touch
MAX_STATE_SPACE = 2_000_000

_complex = {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
_matrix = {"type": "array", "minItems": 1, "items": {"type": "array", "minItems": 1, "items": _complex}}
_mode = {"type": "array", "items": {"type": "integer", "minimum": 0}, "minItems": 2, "maxItems": 2}
_coins = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"preset": {"enum": ["hadamard", "identity", "dft", "random"]}},
            "required": ["preset"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {"matrices": {"type": "array", "minItems": 1, "items": _matrix}},
            "required": ["matrices"],
            "additionalProperties": False,
        },
    ]
}
_steps_field = {"type": "array", "items": {"type": "integer", "minimum": 0}}

SCHEMA: dict[str, Any] = {
    "type": "object",
    "properties": {
        "schema": {"const": SCHEMA_VERSION},
        "graph": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "preset": {"enum": ["line", "cycle", "complete-with-loops"]},
                        "size": {"type": "integer", "minimum": 1},
                    },
                    "required": ["preset", "size"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "vertices": {"type": "integer", "minimum": 1},
                        "edges": {"type": "array", "items": _mode},
                    },
                    "required": ["vertices", "edges"],
                    "additionalProperties": False,
                },
            ]
        },
        "walkers": {"type": "integer", "minimum": 0},
        "initial": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "positions": {"type": "array", "items": {"type": "integer", "minimum": 0}},
                        "coin": {"const": "symmetric"},
                    },
                    "required": ["positions"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "modes": {"type": "array", "items": _mode},
                        "amplitudes": {"type": "array", "items": _complex},
                    },
                    "required": ["modes"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "superposition": {
                            "type": "array",
                            "minItems": 1,
                            "items": {
                                "type": "object",
                                "properties": {"modes": {"type": "array", "items": _mode}, "amplitude": _complex},
                                "required": ["modes", "amplitude"],
                                "additionalProperties": False,
                            },
                        }
                    },
                    "required": ["superposition"],
                    "additionalProperties": False,
                },
            ]
        },
        "coins": {
            "oneOf": [
                _coins,
                {
                    "type": "object",
                    "properties": {"per_step": {"type": "array", "items": _coins}},
                    "required": ["per_step"],
                    "additionalProperties": False,
                },
            ]
        },
        "defects": {
            "type": "array",
            "items": {
                "oneOf": [
                    {
                        "type": "object",
                        "properties": {
                            "type": {"const": "cphase"},
                            "a": _mode,
                            "b": _mode,
                            "theta": {"type": "number"},
                            "steps": _steps_field,
                        },
                        "required": ["type", "a", "b"],
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "properties": {
                            "type": {"const": "position"},
                            "positions": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 0}},
                            "theta": {"type": "number"},
                            "steps": _steps_field,
                        },
                        "required": ["type", "positions"],
                        "additionalProperties": False,
                    },
                    {
                        "type": "object",
                        "properties": {
                            "type": {"const": "kerr"},
                            "position": {"type": "integer", "minimum": 0},
                            "phi": {"type": "number"},
                            "steps": _steps_field,
                        },
                        "required": ["type", "position", "phi"],
                        "additionalProperties": False,
                    },
                ]
            },
        },
        "defects_first": {"type": "boolean"},
        "steps": {"type": "integer", "minimum": 0},
        "outputs": {"type": "array", "items": {"enum": list(OUTPUTS)}, "uniqueItems": True},
        "origin": {"type": "number"},
        "seed": {"type": "integer", "minimum": 0},
        "routing": {"type": "array"},
    },
    "required": ["schema", "graph", "coins", "steps"],
    "additionalProperties": False,
}


class ConfigError(ValidationError):
    """Schema violation; ``path`` locates the offending field."""

    def __init__(self, message: str, path: str = "$"):
        super().__init__(f"{path}: {message}")
        self.path = path


def _field_path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _deepest(error: jsonschema.ValidationError) -> jsonschema.ValidationError:
    # oneOf failures hide the useful message in the branch that got furthest
    while error.context:
        error = max(error.context, key=lambda e: len(e.absolute_path))
    return error


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration document.

    ``document`` keeps the JSON form so that :meth:`to_json` reproduces the
    input exactly; the typed accessors build library objects from it.
    """

    document: dict[str, Any] = field(repr=False)

    @classmethod
    def from_dict(cls, doc: Any) -> RunConfig:
        validator = jsonschema.Draft202012Validator(SCHEMA)
        errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
        if errors:
            err = _deepest(errors[0])
            raise ConfigError(err.message, _field_path(err.absolute_path))
        cfg = cls(json.loads(json.dumps(doc)))
        cfg._check_semantics()
        return cfg

    @classmethod
    def from_json(cls, text: str) -> RunConfig:
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
        return cls.from_dict(doc)

    def to_dict(self) -> dict[str, Any]:
        return json.loads(json.dumps(self.document))

    def to_json(self) -> str:
        return json.dumps(self.document, indent=2, sort_keys=True) + "\n"

    # typed views

    @property
    def steps(self) -> int:
        return int(self.document["steps"])

    @property
    def seed(self) -> int:
        return int(self.document.get("seed", 0))

    @property
    def outputs(self) -> tuple[str, ...]:
        return tuple(self.document.get("outputs", ["position"]))

    @property
    def defects_first(self) -> bool:
        return bool(self.document.get("defects_first", False))

    def graph(self) -> Graph:
        desc = self.document["graph"]
        if "preset" in desc:
            build = {"line": build_line, "cycle": build_cycle, "complete-with-loops": build_complete_with_loops}
            try:
                return build[desc["preset"]](desc["size"])
            except ValidationError as exc:
                raise ConfigError(str(exc), "$.graph.size") from None
        try:
            return from_edges(desc["vertices"], desc["edges"])
        except ValidationError as exc:
            raise ConfigError(str(exc), "$.graph.edges") from None

    def walkers(self) -> int:
        if "walkers" in self.document:
            return int(self.document["walkers"])
        init = self.document.get("initial")
        if init is None:
            return 0
        if "positions" in init:
            return len(init["positions"])
        if "modes" in init:
            return 1 if "amplitudes" in init else len(init["modes"])
        return len(init["superposition"][0]["modes"])

    def initial_state(self, g: Graph) -> fock.FockState:
        init = self.document.get("initial")
        if init is None:
            raise ConfigError("an initial state is needed to run a walk", "$.initial")
        for i, x in enumerate(init.get("positions", [])):
            if x >= g.n_vertices:
                raise ConfigError(f"position {x} is not a vertex of the graph", f"$.initial.positions[{i}]")
        if "positions" in init:
            return symmetric_walkers(g, init["positions"])
        if "modes" in init:
            modes = [self._mode_index(g, m, f"$.initial.modes[{i}]") for i, m in enumerate(init["modes"])]
            amps = init.get("amplitudes")
            if amps is None:
                return fock.create(modes, g.mode_count)
            # one walker in a superposition over the listed modes
            if len(amps) != len(modes):
                raise ConfigError(f"{len(amps)} amplitudes for {len(modes)} modes", "$.initial.amplitudes")
            walker = {}
            for m, a in zip(modes, amps):
                walker[m] = walker.get(m, 0) + complex(*a)
            return fock.product_state([walker], g.mode_count).normalized()
        terms: dict[tuple[int, ...], complex] = {}
        n = None
        for i, term in enumerate(init["superposition"]):
            modes = [self._mode_index(g, m, f"$.initial.superposition[{i}].modes[{j}]") for j, m in enumerate(term["modes"])]
            if n is not None and len(modes) != n:
                raise ConfigError("all terms need the same walker number", f"$.initial.superposition[{i}].modes")
            n = len(modes)
            key = tuple(sorted(modes))
            terms[key] = terms.get(key, 0) + complex(*term["amplitude"])
        state = fock.FockState(terms, g.mode_count)
        if state.norm() == 0:
            raise ConfigError("superposition has zero norm", "$.initial.superposition")
        return state.normalized()

    @staticmethod
    def _mode_index(g: Graph, mode, path: str) -> int:
        try:
            return g.mode_index(int(mode[0]), int(mode[1]))
        except (KeyError, ValidationError) as exc:
            raise ConfigError(str(exc), path) from None

    def coin_assignments(self, g: Graph) -> list[CoinAssignment]:
        desc = self.document["coins"]
        rng = np.random.default_rng(self.seed)
        if "per_step" in desc:
            if len(desc["per_step"]) != self.steps:
                raise ConfigError(f"{len(desc['per_step'])} coin entries for {self.steps} steps", "$.coins.per_step")
            return [self._coins(g, c, rng, f"$.coins.per_step[{i}]") for i, c in enumerate(desc["per_step"])]
        coins = self._coins(g, desc, rng, "$.coins")
        return [coins] * self.steps

    @staticmethod
    def _coins(g: Graph, desc, rng, path: str) -> CoinAssignment:
        if "preset" in desc:
            try:
                return coin_preset(g, desc["preset"], rng)
            except ValidationError as exc:
                raise ConfigError(str(exc), path + ".preset") from None
        mats = desc["matrices"]
        if len(mats) != g.n_vertices:
            raise ConfigError(f"{len(mats)} coin matrices for {g.n_vertices} vertices", path + ".matrices")
        parsed = []
        for x, m in enumerate(mats):
            if len({len(row) for row in m}) != 1:
                raise ConfigError(f"coin at vertex {x} is not a square matrix", f"{path}.matrices[{x}]")
            parsed.append(np.array([[complex(*z) for z in row] for row in m]))
        coins = CoinAssignment(tuple(parsed))
        try:
            coins.validate(g)
        except ValidationError as exc:
            vertex = next((x for x, m in enumerate(parsed) if m.shape != (g.degree(x),) * 2), None)
            sub = f"{path}.matrices[{vertex}]" if vertex is not None else path + ".matrices"
            raise ConfigError(str(exc), sub) from None
        return coins

    def defects(self, g: Graph) -> list[tuple[Defect, tuple[int, ...] | None]]:
        out = []
        for i, d in enumerate(self.document.get("defects", [])):
            path = f"$.defects[{i}]"
            theta = float(d.get("theta", np.pi))
            if d["type"] == "cphase":
                a, b = tuple(d["a"]), tuple(d["b"])
                self._mode_index(g, a, path + ".a")
                self._mode_index(g, b, path + ".b")
                defect: Defect = CPhaseDefect(a, b, theta)
            elif d["type"] == "position":
                for j, x in enumerate(d["positions"]):
                    if x >= g.n_vertices:
                        raise ConfigError(f"position {x} is not a vertex", f"{path}.positions[{j}]")
                defect = PositionPhase(tuple(d["positions"]), theta)
            else:
                if d["position"] >= g.n_vertices:
                    raise ConfigError(f"position {d['position']} is not a vertex", path + ".position")
                defect = KerrDefect(int(d["position"]), float(d["phi"]))
            steps = d.get("steps")
            if steps is not None:
                bad = [s for s in steps if s >= self.steps]
                if bad:
                    raise ConfigError(f"step {bad[0]} is beyond the last step {self.steps - 1}", path + ".steps")
                steps = tuple(sorted(set(steps)))
            out.append((defect, steps))
        return out

    def schedule(self, g: Graph) -> WalkSchedule:
        coins = self.coin_assignments(g)
        defects = self.defects(g)
        steps = []
        for t, c in enumerate(coins):
            active = tuple(d for d, when in defects if when is None or t in when)
            steps.append(WalkStep(c, active))
        return WalkSchedule(tuple(steps), self.defects_first)

    def _check_semantics(self) -> None:
        init = self.document.get("initial")
        if init is not None and "walkers" in self.document:
            declared = self.document["walkers"]
            if "positions" in init:
                found, where = len(init["positions"]), "$.initial.positions"
            elif "modes" in init and "amplitudes" in init:
                found, where = 1, "$.initial.amplitudes"
            elif "modes" in init:
                found, where = len(init["modes"]), "$.initial.modes"
            else:
                found, where = len(init["superposition"][0]["modes"]), "$.initial.superposition"
            if found != declared:
                raise ConfigError(f"initial state has {found} walkers, 'walkers' says {declared}", where)


def check_caps(g: Graph, n: int, max_walkers: int = DEFAULT_MAX_WALKERS) -> int:
    """Raise before any compute if ``n`` walkers on ``g`` are out of bounds.

    Returns the estimated Fock-space dimension ``C(M + n - 1, n)``.
    """
    if max_walkers > HARD_MAX_WALKERS:
        raise CapExceededError(f"walker cap {max_walkers} exceeds the hard ceiling {HARD_MAX_WALKERS}")
    if n > max_walkers:
        raise CapExceededError(f"{n} walkers requested; the cap is {max_walkers} (override with --max-walkers)")
    size = comb(g.mode_count + n - 1, n)
    if size > MAX_STATE_SPACE:
        raise CapExceededError(f"state space of about {size} basis states exceeds the limit {MAX_STATE_SPACE}")
    return size


def load_config(path: str | Path) -> RunConfig:
    return RunConfig.from_json(Path(path).read_text())
